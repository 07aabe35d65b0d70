// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dst/core.hpp"

namespace dst {

/// A proposed next thought together with the hidden-state embedding of the
/// extended state.
struct Candidate {
  Thought thought;
  std::vector<double> embedding;
  /// Present iff the thought is terminal.
  std::optional<std::string> answer;
};

struct GeneratorMeta {
  std::string name;
  std::size_t embedding_dim = 0;
  bool deterministic = false;
  /// When set, callers must not issue concurrent generate calls.
  bool serialized = false;
};

struct GenerateRequest {
  std::size_t n = 1;
  std::uint64_t seed_context = 0;
  /// Candidate slot of the first returned candidate under the expanded node.
  std::size_t first_slot = 0;
  double temperature = 0.7;
};

/// Thought generator contract: text plus embeddings for the extended states.
/// Implementations own the embedding function; the engines never see model
/// internals.
class Generator {
 public:
  virtual ~Generator() = default;

  virtual const GeneratorMeta& meta() const = 0;

  /// Embedding of the problem statement alone (the root state).
  virtual std::vector<double> embed_root(const Problem& problem) = 0;

  /// Exactly `request.n` candidates extending `state`.
  /// Throws GenerationError (or a subclass) on failure.
  virtual std::vector<Candidate> generate(const Problem& problem, const ReasoningState& state,
                                          const GenerateRequest& request) = 0;
};

/// Checks count, embedding dimension and the terminal/answer pairing.
/// Throws GenerationError naming the state on violation.
void validate_candidates(const GeneratorMeta& meta, const ReasoningState& state,
                         const GenerateRequest& request, const std::vector<Candidate>& candidates);

/// Draws the candidate for one slot under `state`, seeded by
/// `seed_context(run_seed, problem id, state path, slot)`.
Candidate draw_candidate(Generator& generator, const Problem& problem, const ReasoningState& state,
                         std::size_t slot, std::uint64_t run_seed, double temperature);

/// Wraps a generator whose meta declares serialized access behind a mutex.
class SerializedGenerator final : public Generator {
 public:
  explicit SerializedGenerator(Generator& inner) : inner_(inner) {}

  const GeneratorMeta& meta() const override { return inner_.meta(); }
  std::vector<double> embed_root(const Problem& problem) override;
  std::vector<Candidate> generate(const Problem& problem, const ReasoningState& state,
                                  const GenerateRequest& request) override;

 private:
  Generator& inner_;
  std::mutex mu_;
};

}  // namespace dst
