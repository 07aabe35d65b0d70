// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/generator.hpp"

#include "dst/error.hpp"
#include "dst/hashing.hpp"

namespace dst {

void validate_candidates(const GeneratorMeta& meta, const ReasoningState& state,
                         const GenerateRequest& request, const std::vector<Candidate>& candidates) {
  auto fail = [&](const std::string& what) {
    throw GenerationError(state.problem_id, state.depth, meta.name + ": " + what);
  };
  if (candidates.size() != request.n) {
    fail("expected " + std::to_string(request.n) + " candidates, got " +
         std::to_string(candidates.size()));
  }
  for (const auto& c : candidates) {
    if (c.embedding.size() != meta.embedding_dim) {
      fail("candidate embedding has dimension " + std::to_string(c.embedding.size()) +
           ", generator declares " + std::to_string(meta.embedding_dim));
    }
    if (c.thought.terminal != c.answer.has_value()) {
      fail("terminal candidates must carry an answer and only they may");
    }
    if (c.thought.text.empty() && !c.thought.terminal) fail("empty non-terminal thought");
  }
}

Candidate draw_candidate(Generator& generator, const Problem& problem, const ReasoningState& state,
                         std::size_t slot, std::uint64_t run_seed, double temperature) {
  GenerateRequest request;
  request.n = 1;
  request.first_slot = slot;
  request.seed_context = seed_context(run_seed, problem.id, state.path, slot);
  request.temperature = temperature;
  auto candidates = generator.generate(problem, state, request);
  validate_candidates(generator.meta(), state, request, candidates);
  return std::move(candidates.front());
}

std::vector<double> SerializedGenerator::embed_root(const Problem& problem) {
  std::lock_guard lock(mu_);
  return inner_.embed_root(problem);
}

std::vector<Candidate> SerializedGenerator::generate(const Problem& problem,
                                                     const ReasoningState& state,
                                                     const GenerateRequest& request) {
  std::lock_guard lock(mu_);
  return inner_.generate(problem, state, request);
}

}  // namespace dst
