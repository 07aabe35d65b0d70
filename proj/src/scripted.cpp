// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/scripted.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dst/error.hpp"

namespace dst {

namespace {

using nlohmann::json;

std::string path_string(const NodePath& path) {
  std::string s = "[";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(path[i]);
  }
  return s + "]";
}

ScriptRecord record_from_json(const json& j) {
  ScriptRecord r;
  if (j.contains("problem_id") && !j.at("problem_id").is_null())
    r.problem_id = j.at("problem_id").get<std::string>();
  r.path = j.at("path").get<NodePath>();
  if (j.contains("index") && !j.at("index").is_null()) r.slot = j.at("index").get<std::size_t>();
  r.embedding = j.at("embedding").get<std::vector<double>>();
  if (r.slot) {
    r.text = j.at("text").get<std::string>();
    r.tokens = j.at("tokens").get<std::size_t>();
    r.terminal = j.at("terminal").get<bool>();
    if (j.contains("answer") && !j.at("answer").is_null())
      r.answer = j.at("answer").get<std::string>();
  }
  return r;
}

json record_to_json(const ScriptRecord& r) {
  json j;
  if (r.problem_id) j["problem_id"] = *r.problem_id;
  j["path"] = r.path;
  if (r.slot) {
    j["index"] = *r.slot;
    j["text"] = r.text;
    j["embedding"] = r.embedding;
    j["tokens"] = r.tokens;
    j["terminal"] = r.terminal;
    j["answer"] = r.answer ? json(*r.answer) : json(nullptr);
  } else {
    j["embedding"] = r.embedding;
  }
  return j;
}

}  // namespace

std::vector<ScriptRecord> read_script(std::istream& in, const std::string& source) {
  std::vector<ScriptRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DeserializationError(source + ":" + std::to_string(lineno), e.what());
    }
  }
  return records;
}

std::vector<ScriptRecord> load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DeserializationError(path, "cannot open replay script");
  return read_script(in, path);
}

void write_script(std::ostream& out, const std::vector<ScriptRecord>& records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

void save_script(const std::string& path, const std::vector<ScriptRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DeserializationError(path, "cannot write replay script");
  write_script(out, records);
}

ScriptedGenerator::ScriptedGenerator(std::vector<ScriptRecord> records,
                                     std::optional<std::size_t> embedding_dim) {
  std::optional<std::size_t> dim = embedding_dim;
  for (auto& r : records) {
    if (!dim) dim = r.embedding.size();
    if (r.embedding.size() != *dim) {
      throw ConfigError("replay script mixes embedding dimensions " + std::to_string(*dim) +
                        " and " + std::to_string(r.embedding.size()));
    }
    Key key{r.problem_id.value_or(""), r.path, r.slot};
    records_.insert_or_assign(std::move(key), std::move(r));
  }
  meta_ = GeneratorMeta{"scripted", dim.value_or(0), true, false};
}

const ScriptRecord* ScriptedGenerator::find(const std::string& problem_id, const NodePath& path,
                                            std::optional<std::size_t> slot) const {
  if (auto it = records_.find(Key{problem_id, path, slot}); it != records_.end()) return &it->second;
  if (auto it = records_.find(Key{"", path, slot}); it != records_.end()) return &it->second;
  return nullptr;
}

std::vector<double> ScriptedGenerator::embed_root(const Problem& problem) {
  const ScriptRecord* r = find(problem.id, {}, std::nullopt);
  if (!r) throw ReplayError(problem.id, 0, "replay script has no root embedding");
  return r->embedding;
}

std::vector<Candidate> ScriptedGenerator::generate(const Problem& problem,
                                                   const ReasoningState& state,
                                                   const GenerateRequest& request) {
  std::vector<Candidate> out;
  for (std::size_t j = 0; j < request.n; ++j) {
    const std::size_t slot = request.first_slot + j;
    const ScriptRecord* r = find(problem.id, state.path, slot);
    if (!r) {
      throw ReplayError(state.problem_id, state.depth,
                        "replay script has no entry for node path " + path_string(state.path) +
                            " slot " + std::to_string(slot));
    }
    Candidate c;
    c.thought = Thought{r->text, r->tokens, r->terminal};
    c.embedding = r->embedding;
    c.answer = r->answer;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<double> RecordingGenerator::embed_root(const Problem& problem) {
  auto embedding = inner_.embed_root(problem);
  ScriptRecord r;
  r.problem_id = problem.id;
  r.embedding = embedding;
  add(std::move(r));
  return embedding;
}

std::vector<Candidate> RecordingGenerator::generate(const Problem& problem,
                                                    const ReasoningState& state,
                                                    const GenerateRequest& request) {
  auto candidates = inner_.generate(problem, state, request);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto& c = candidates[j];
    ScriptRecord r;
    r.problem_id = problem.id;
    r.path = state.path;
    r.slot = request.first_slot + j;
    r.text = c.thought.text;
    r.embedding = c.embedding;
    r.tokens = c.thought.tokens_generated;
    r.terminal = c.thought.terminal;
    r.answer = c.answer;
    add(std::move(r));
  }
  return candidates;
}

void RecordingGenerator::add(ScriptRecord record) {
  std::lock_guard lock(mu_);
  auto key = std::make_tuple(record.problem_id.value_or(""), record.path, record.slot);
  if (seen_.contains(key)) return;
  seen_.emplace(std::move(key), records_.size());
  records_.push_back(std::move(record));
}

std::vector<ScriptRecord> RecordingGenerator::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

}  // namespace dst
