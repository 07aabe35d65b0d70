// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "dst/generator.hpp"

namespace dst {

/// Connection settings for a white-box generation server.
///
/// Wire protocol:
///   GET  /v1/meta     -> {"model_id": str, "hidden_dim": int}
///   POST /v1/thoughts    {"prompt": str, "num_candidates": int, "stop": str,
///                         "temperature": num, "max_tokens": int}
///                     -> {"candidates": [{"text": str, "hidden_state": [num],
///                         "tokens_generated": int, "finished": bool,
///                         "answer": str|null}]}
struct HttpEndpoint {
  /// Scheme, host and port, e.g. "http://127.0.0.1:8000".
  std::string base_url;
  /// Sent as "Authorization: Bearer <token>" when non-empty.
  std::string bearer_token;
  double timeout_seconds = 120.0;
  /// Transport failures are retried with exponential backoff, then surfaced.
  std::size_t max_attempts = 3;
  std::chrono::milliseconds backoff{200};
  std::size_t max_in_flight = 4;
};

struct ThoughtsRequest {
  std::string prompt;
  std::size_t num_candidates = 1;
  std::string stop = "#step";
  double temperature = 0.7;
  std::size_t max_tokens = 256;
};

/// Request body for POST /v1/thoughts.
std::string thoughts_request_body(const ThoughtsRequest& request);

/// Parses and validates a /v1/meta body. Throws ProtocolError.
GeneratorMeta parse_meta_response(std::string_view body);

/// Parses and validates a /v1/thoughts body against the advertised dimension
/// and the requested count. Text is cut at the first occurrence of `stop`.
/// Throws ProtocolError.
std::vector<Candidate> parse_thoughts_response(std::string_view body, std::size_t hidden_dim,
                                               std::size_t num_candidates, std::string_view stop);

/// Throws ConnectionError on transport failure after retries, ProtocolError on
/// a malformed response.
GeneratorMeta fetch_meta(const HttpEndpoint& endpoint);

std::vector<Candidate> fetch_thoughts(const HttpEndpoint& endpoint, const ThoughtsRequest& request,
                                      std::size_t hidden_dim);

/// Problem text, then each prior thought, each preceded by the step delimiter,
/// ending with a delimiter that cues the next step.
std::string build_prompt(const Problem& problem, const ReasoningState& state,
                         std::string_view stop);

struct HttpGeneratorOptions {
  std::string stop = "#step";
  std::size_t max_tokens = 256;
};

class HttpGenerator final : public Generator {
 public:
  /// Fetches /v1/meta; the advertised hidden_dim pins d for the run.
  HttpGenerator(HttpEndpoint endpoint, HttpGeneratorOptions options = {});

  const GeneratorMeta& meta() const override { return meta_; }

  /// The protocol has no embedding endpoint; the root embedding is the hidden
  /// state after a single generated token on the bare problem prompt.
  std::vector<double> embed_root(const Problem& problem) override;
  std::vector<Candidate> generate(const Problem& problem, const ReasoningState& state,
                                  const GenerateRequest& request) override;

 private:
  std::vector<Candidate> call(const ThoughtsRequest& request);

  HttpEndpoint endpoint_;
  HttpGeneratorOptions options_;
  GeneratorMeta meta_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace dst
