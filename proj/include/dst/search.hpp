// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dst/core.hpp"
#include "dst/generator.hpp"
#include "dst/predictor.hpp"

namespace dst {

enum class ExpansionAction { shortcut, fallback };

/// One parent-node expansion. `scores` are in slot order; `admitted` lists the
/// slots that entered the depth's selection pool.
struct ExpansionEvent {
  std::string problem_id;
  std::size_t depth = 0;
  NodePath node_path;
  ExpansionAction action = ExpansionAction::fallback;
  std::vector<double> scores;
  std::vector<std::size_t> admitted;
};

struct SearchResult {
  /// Root-to-leaf thoughts of the selected node; empty when the beam emptied.
  std::vector<Thought> final_path;
  NodePath final_node_path;
  std::optional<std::string> answer;
  std::optional<double> final_score;
  bool beam_emptied = false;

  std::size_t explored_nodes = 0;
  /// One call per generated candidate.
  std::size_t generator_calls = 0;
  std::size_t generated_tokens = 0;
  /// Whitespace tokens of every prompt sent (problem text plus prior thoughts).
  std::size_t prompt_tokens = 0;
  std::size_t shortcut_events = 0;
  std::size_t fallback_events = 0;
  std::size_t admitted_candidates = 0;
  /// Admitted candidates per depth, depth 1 first.
  std::vector<std::size_t> per_depth_effective_beam;

  /// Paths of every generated node, in generation order.
  std::vector<NodePath> explored_paths;
  std::vector<ExpansionEvent> trace;

  std::size_t expansions() const noexcept { return shortcut_events + fallback_events; }
  double shortcut_rate() const noexcept;
  /// Admitted candidates per expansion; 0 when nothing was expanded.
  double effective_beam_width() const noexcept;
};

/// Predict-first-thought beam search. Each beam node draws one candidate; a
/// score >= tau admits it alone, otherwise the remaining k-1 slots are drawn
/// and admitted according to the fallback pool policy. The next beam is the
/// top-b of the pooled admissions (score descending, generation order
/// ascending); terminal nodes stay in the pool but are never expanded.
SearchResult adaptive_search(const Problem& problem, Generator& generator,
                             const Predictor& predictor, const SearchConfig& config);

/// Single chain, one candidate per depth.
SearchResult greedy_search(const Problem& problem, Generator& generator, const Predictor& predictor,
                           const SearchConfig& config);

/// Every beam node expands into k scored candidates; the top-b survive.
SearchResult beam_search_reference(const Problem& problem, Generator& generator,
                                   const Predictor& predictor, const SearchConfig& config);

enum class SearchMode { greedy, adaptive, full_beam };

SearchMode parse_search_mode(std::string_view text);
std::string_view to_string(SearchMode mode);

SearchResult run_search(SearchMode mode, const Problem& problem, Generator& generator,
                        const Predictor& predictor, const SearchConfig& config);

/// Expected admitted candidates per expansion when shortcuts fire with
/// probability p: 1*p + b*(1-p).
double expected_beam_width(double shortcut_prob, std::size_t beam_width);

/// Total admitted candidates over total expansions across `results`.
/// Throws ValidationError on an empty list.
double measure_effective_beam(std::span<const SearchResult> results);

/// Shortcut rate a threshold would produce on a fixed stream of recorded
/// first-candidate scores.
double replay_shortcut_rate(std::span<const ExpansionEvent> trace, double tau);

// Trace files: JSON lines {problem_id, depth, node_path, action, scores, admitted}.
void write_trace(std::ostream& out, std::span<const ExpansionEvent> trace);
std::vector<ExpansionEvent> read_trace(std::istream& in, const std::string& source = "<trace>");

}  // namespace dst
