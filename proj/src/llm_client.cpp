// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/llm_client.hpp"

#include <cctype>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dst/error.hpp"

namespace dst {

namespace {

using nlohmann::json;

json parse_body(std::string_view body, std::string_view what) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

const json& require(const json& obj, const char* field, std::string_view what) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw ProtocolError(std::string(what) + ": missing field '" + field + "'");
  }
  return obj.at(field);
}

std::atomic<std::uint64_t> g_request_counter{0};

httplib::Headers make_headers(const HttpEndpoint& endpoint, std::string& request_id) {
  request_id = "dst-" + std::to_string(++g_request_counter);
  httplib::Headers headers{{"X-Request-Id", request_id}};
  if (!endpoint.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.bearer_token);
  }
  return headers;
}

/// Runs `send` with bounded retries on transport errors; returns the body of a
/// 200 response.
template <typename Send>
std::string with_retries(const HttpEndpoint& endpoint, std::string_view route, Send send) {
  httplib::Client client(endpoint.base_url);
  const auto secs = static_cast<time_t>(endpoint.timeout_seconds);
  const auto usecs = static_cast<time_t>((endpoint.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  const std::size_t attempts = std::max<std::size_t>(1, endpoint.max_attempts);
  std::string last_error;
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(endpoint.backoff * (1 << (attempt - 1)));
    std::string request_id;
    httplib::Result res = send(client, make_headers(endpoint, request_id));
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProtocolError(std::string(route) + ": HTTP " + std::to_string(res->status) + " " +
                          res->body);
    }
    if (res->has_header("X-Request-Id") && res->get_header_value("X-Request-Id") != request_id) {
      throw ProtocolError(std::string(route) + ": response correlation id mismatch");
    }
    return res->body;
  }
  throw ConnectionError(endpoint.base_url + std::string(route) + ": " + last_error + " after " +
                            std::to_string(attempts) + " attempts",
                        true);
}

}  // namespace

std::string thoughts_request_body(const ThoughtsRequest& request) {
  json j{{"prompt", request.prompt},
         {"num_candidates", request.num_candidates},
         {"stop", request.stop},
         {"temperature", request.temperature},
         {"max_tokens", request.max_tokens}};
  return j.dump();
}

GeneratorMeta parse_meta_response(std::string_view body) {
  const json j = parse_body(body, "/v1/meta");
  const json& model = require(j, "model_id", "/v1/meta");
  const json& dim = require(j, "hidden_dim", "/v1/meta");
  if (!model.is_string()) throw ProtocolError("/v1/meta: model_id must be a string");
  if (!dim.is_number_integer() || dim.get<std::int64_t>() < 1) {
    throw ProtocolError("/v1/meta: hidden_dim must be a positive integer");
  }
  GeneratorMeta meta;
  meta.name = model.get<std::string>();
  meta.embedding_dim = dim.get<std::size_t>();
  meta.deterministic = false;
  return meta;
}

std::vector<Candidate> parse_thoughts_response(std::string_view body, std::size_t hidden_dim,
                                               std::size_t num_candidates, std::string_view stop) {
  constexpr std::string_view what = "/v1/thoughts";
  const json j = parse_body(body, what);
  const json& list = require(j, "candidates", what);
  if (!list.is_array()) throw ProtocolError("/v1/thoughts: candidates must be an array");
  if (list.size() != num_candidates) {
    throw ProtocolError("/v1/thoughts: requested " + std::to_string(num_candidates) +
                        " candidates, server returned " + std::to_string(list.size()));
  }
  std::vector<Candidate> out;
  out.reserve(list.size());
  for (const json& item : list) {
    const json& text = require(item, "text", what);
    const json& hidden = require(item, "hidden_state", what);
    const json& tokens = require(item, "tokens_generated", what);
    const json& finished = require(item, "finished", what);
    if (!text.is_string() || !hidden.is_array() || !tokens.is_number_integer() ||
        !finished.is_boolean()) {
      throw ProtocolError("/v1/thoughts: candidate field has the wrong type");
    }
    if (hidden.size() != hidden_dim) {
      throw ProtocolError("/v1/thoughts: hidden_state length " + std::to_string(hidden.size()) +
                          " does not match advertised hidden_dim " + std::to_string(hidden_dim));
    }
    if (tokens.get<std::int64_t>() < 0) throw ProtocolError("/v1/thoughts: negative token count");
    Candidate c;
    c.thought.text = text.get<std::string>();
    if (!stop.empty()) {
      if (auto pos = c.thought.text.find(stop); pos != std::string::npos) c.thought.text.resize(pos);
    }
    while (!c.thought.text.empty() && std::isspace(static_cast<unsigned char>(c.thought.text.back())))
      c.thought.text.pop_back();
    c.thought.tokens_generated = tokens.get<std::size_t>();
    c.thought.terminal = finished.get<bool>();
    c.embedding.reserve(hidden.size());
    for (const json& x : hidden) {
      if (!x.is_number()) throw ProtocolError("/v1/thoughts: hidden_state must hold numbers");
      c.embedding.push_back(x.get<double>());
    }
    if (item.contains("answer") && !item.at("answer").is_null()) {
      if (!item.at("answer").is_string()) throw ProtocolError("/v1/thoughts: answer must be a string");
      if (c.thought.terminal) c.answer = item.at("answer").get<std::string>();
    }
    // A finished candidate without an explicit answer is judged on its text.
    if (c.thought.terminal && !c.answer) c.answer = c.thought.text;
    out.push_back(std::move(c));
  }
  return out;
}

GeneratorMeta fetch_meta(const HttpEndpoint& endpoint) {
  const std::string body = with_retries(endpoint, "/v1/meta", [](httplib::Client& c, const httplib::Headers& h) {
    return c.Get("/v1/meta", h);
  });
  return parse_meta_response(body);
}

std::vector<Candidate> fetch_thoughts(const HttpEndpoint& endpoint, const ThoughtsRequest& request,
                                      std::size_t hidden_dim) {
  if (request.num_candidates < 1) throw ValidationError("num_candidates must be >= 1");
  if (request.stop.empty()) throw ValidationError("stop string must be non-empty");
  const std::string payload = thoughts_request_body(request);
  const std::string body =
      with_retries(endpoint, "/v1/thoughts", [&](httplib::Client& c, const httplib::Headers& h) {
        return c.Post("/v1/thoughts", h, payload, "application/json");
      });
  return parse_thoughts_response(body, hidden_dim, request.num_candidates, request.stop);
}

std::string build_prompt(const Problem& problem, const ReasoningState& state,
                         std::string_view stop) {
  const std::string delimiter = "\n" + std::string(stop) + "\n";
  std::string prompt = problem.text;
  for (const auto& t : state.thoughts) {
    prompt += delimiter;
    prompt += t.text;
  }
  prompt += delimiter;
  return prompt;
}

HttpGenerator::HttpGenerator(HttpEndpoint endpoint, HttpGeneratorOptions options)
    : endpoint_(std::move(endpoint)), options_(std::move(options)) {
  meta_ = fetch_meta(endpoint_);
  const auto limit = static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, endpoint_.max_in_flight));
  in_flight_ = std::make_unique<std::counting_semaphore<>>(limit);
}

std::vector<Candidate> HttpGenerator::call(const ThoughtsRequest& request) {
  in_flight_->acquire();
  try {
    auto out = fetch_thoughts(endpoint_, request, meta_.embedding_dim);
    in_flight_->release();
    return out;
  } catch (...) {
    in_flight_->release();
    throw;
  }
}

std::vector<double> HttpGenerator::embed_root(const Problem& problem) {
  ThoughtsRequest req;
  req.prompt = problem.text + "\n" + options_.stop + "\n";
  req.num_candidates = 1;
  req.stop = options_.stop;
  req.temperature = 0.0;
  req.max_tokens = 1;
  try {
    return call(req).front().embedding;
  } catch (const GenerationError&) {
    throw;
  } catch (const Error& e) {
    throw GenerationError(problem.id, 0, e.what());
  }
}

std::vector<Candidate> HttpGenerator::generate(const Problem& problem, const ReasoningState& state,
                                               const GenerateRequest& request) {
  ThoughtsRequest req;
  req.prompt = build_prompt(problem, state, options_.stop);
  req.num_candidates = request.n;
  req.stop = options_.stop;
  req.temperature = request.temperature;
  req.max_tokens = options_.max_tokens;
  try {
    return call(req);
  } catch (const Error& e) {
    throw GenerationError(state.problem_id, state.depth, e.what());
  }
}

}  // namespace dst
