// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dst/generator.hpp"

namespace dst {

/// Desk-scale reasoning world: chains of integer add/multiply steps whose
/// candidates are either correct or numerically corrupted, with embeddings
/// that carry a noisy correctness anchor.
struct SyntheticWorldConfig {
  /// Number of operations m; candidates at depth m are terminal.
  std::size_t chain_length = 5;
  /// Probability that a step is correct when its parent is the root or is off
  /// the correct trajectory.
  double correct_step_prob = 0.7;
  /// Pull toward correctness once a chain is on track: a step whose parent is
  /// on the correct trajectory is correct with probability q + momentum*(1-q).
  /// Zero gives i.i.d. steps.
  double momentum = 0.9;
  /// Weight alpha of the correctness anchor against isotropic noise.
  double separability = 0.8;
  std::size_t embedding_dim = 16;
  /// Bounds for the start value and additive operands.
  std::int64_t value_min = 1;
  std::int64_t value_max = 9;
  /// Multipliers are drawn from [2, multiplier_max].
  std::int64_t multiplier_max = 5;

  void validate() const;
};

struct SyntheticOp {
  enum class Kind { add, multiply };
  Kind kind = Kind::add;
  std::int64_t operand = 0;

  std::int64_t apply(std::int64_t value) const;
};

struct SyntheticProblemSpec {
  std::int64_t start = 0;
  std::vector<SyntheticOp> ops;

  /// Values along the correct chain: trajectory()[t] is the value after t ops.
  std::vector<std::int64_t> trajectory() const;
};

/// Renders a problem whose gold answer is the result of applying `ops` to `start`.
Problem make_synthetic_problem(std::string id, std::int64_t start, std::vector<SyntheticOp> ops);

/// Seeded random problem with `config.chain_length` operations.
Problem make_synthetic_problem(const SyntheticWorldConfig& config, std::uint64_t seed);

/// Recovers the start value and operations from a synthetic problem text.
/// Throws ValidationError when the text is not a synthetic problem.
SyntheticProblemSpec parse_synthetic_problem(std::string_view text);

/// Current running value of a synthetic state (the start value at the root).
std::int64_t synthetic_running_value(const SyntheticProblemSpec& spec, const ReasoningState& state);

/// True iff every step so far was correct.
bool synthetic_on_track(const Problem& problem, const ReasoningState& state);

class SyntheticGenerator final : public Generator {
 public:
  explicit SyntheticGenerator(SyntheticWorldConfig config);

  const GeneratorMeta& meta() const override { return meta_; }
  const SyntheticWorldConfig& config() const noexcept { return config_; }

  /// The root embedding is the correctness anchor.
  std::vector<double> embed_root(const Problem& problem) override;

  /// Each candidate's correctness is drawn from the world's step probability,
  /// then realised by step(). Candidate j uses hash(seed_context, j).
  std::vector<Candidate> generate(const Problem& problem, const ReasoningState& state,
                                  const GenerateRequest& request) override;

  /// Applies the next operation, correctly or with a nonzero offset from
  /// {+-1, +-2} that never lands on the correct trajectory value. The embedding
  /// is normalize(alpha*anchor + (1-alpha)*eta) with eta a seeded unit vector.
  Candidate step(const Problem& problem, const ReasoningState& state, bool correct,
                 std::uint64_t noise_seed) const;

  /// Orthogonal unit anchors for correct and wrong steps.
  const std::vector<double>& correct_anchor() const noexcept { return u_correct_; }
  const std::vector<double>& wrong_anchor() const noexcept { return u_wrong_; }

 private:
  SyntheticWorldConfig config_;
  GeneratorMeta meta_;
  std::vector<double> u_correct_;
  std::vector<double> u_wrong_;
};

}  // namespace dst
