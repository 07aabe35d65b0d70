// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dst/generator.hpp"

namespace dst {

/// One line of a replay script. A record without `slot` holds the root
/// embedding for its problem. Records without `problem_id` match any problem.
struct ScriptRecord {
  std::optional<std::string> problem_id;
  NodePath path;
  std::optional<std::size_t> slot;
  std::string text;
  std::vector<double> embedding;
  std::size_t tokens = 0;
  bool terminal = false;
  std::optional<std::string> answer;
};

/// Reads JSON-lines replay records. Blank lines are skipped.
/// Throws DeserializationError naming `source` and the line number.
std::vector<ScriptRecord> read_script(std::istream& in, const std::string& source = "<script>");
std::vector<ScriptRecord> load_script(const std::string& path);
void write_script(std::ostream& out, const std::vector<ScriptRecord>& records);
void save_script(const std::string& path, const std::vector<ScriptRecord>& records);

/// Replays candidates verbatim, keyed by (problem, node path, slot).
class ScriptedGenerator final : public Generator {
 public:
  /// The embedding dimension comes from the records, or from `embedding_dim`
  /// for an empty script.
  explicit ScriptedGenerator(std::vector<ScriptRecord> records,
                             std::optional<std::size_t> embedding_dim = std::nullopt);

  const GeneratorMeta& meta() const override { return meta_; }
  std::vector<double> embed_root(const Problem& problem) override;
  std::vector<Candidate> generate(const Problem& problem, const ReasoningState& state,
                                  const GenerateRequest& request) override;

 private:
  using Key = std::tuple<std::string, NodePath, std::optional<std::size_t>>;
  const ScriptRecord* find(const std::string& problem_id, const NodePath& path,
                           std::optional<std::size_t> slot) const;

  GeneratorMeta meta_;
  std::map<Key, ScriptRecord> records_;
};

/// Pass-through generator that records every root embedding and candidate it
/// serves, producing a script that replays the session exactly.
class RecordingGenerator final : public Generator {
 public:
  explicit RecordingGenerator(Generator& inner) : inner_(inner) {}

  const GeneratorMeta& meta() const override { return inner_.meta(); }
  std::vector<double> embed_root(const Problem& problem) override;
  std::vector<Candidate> generate(const Problem& problem, const ReasoningState& state,
                                  const GenerateRequest& request) override;

  /// Records in call order, without duplicates.
  std::vector<ScriptRecord> records() const;

 private:
  void add(ScriptRecord record);

  Generator& inner_;
  mutable std::mutex mu_;
  std::vector<ScriptRecord> records_;
  std::map<std::tuple<std::string, NodePath, std::optional<std::size_t>>, std::size_t> seen_;
};

}  // namespace dst
