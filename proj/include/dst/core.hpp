// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dst {

/// A task instance. `gold_answer` is read only by collection and verification.
struct Problem {
  std::string id;
  std::string text;
  std::string gold_answer;
};

/// One delimiter-bounded reasoning step.
struct Thought {
  std::string text;
  std::size_t tokens_generated = 0;
  bool terminal = false;
};

/// Semantic embedding of a state plus its consistency with the ancestors.
/// The predictor consumes the flattened form `[embedding; consistency]`.
struct FeatureVector {
  std::vector<double> embedding;
  double consistency = 1.0;

  std::size_t dim() const noexcept { return embedding.size(); }
  std::size_t flat_size() const noexcept { return embedding.size() + 1; }
  std::vector<double> flatten() const;
};

using NodeId = std::size_t;
/// Candidate slot indices from the root to a node; the root has an empty path.
using NodePath = std::vector<std::size_t>;

struct ReasoningState {
  std::string problem_id;
  std::vector<Thought> thoughts;
  FeatureVector features;
  std::size_t depth = 0;
  std::optional<NodeId> parent;
  std::optional<double> predictor_score;
  /// Final answer reported by the generator; only terminal states carry one.
  std::optional<std::string> answer;
  NodePath path;

  bool is_root() const noexcept { return depth == 0; }
  bool terminal() const noexcept { return !thoughts.empty() && thoughts.back().terminal; }
};

/// Root state: no thoughts, consistency pinned to 1.
ReasoningState make_root(const Problem& problem, std::vector<double> root_embedding);

/// Returns a new state one step deeper than `parent`; `parent` is untouched.
/// Throws ConfigError when the embedding dimension differs from `run_dim`.
ReasoningState extend_state(const ReasoningState& parent, Thought thought, FeatureVector features,
                            std::size_t run_dim, std::size_t slot,
                            std::optional<std::string> answer = std::nullopt);

/// Rooted tree of states. Node ids are dense and assigned in insertion order,
/// so a child always has a larger id than its parent.
class ThoughtTree {
 public:
  explicit ThoughtTree(ReasoningState root);

  NodeId root() const noexcept { return 0; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(NodeId id) const noexcept { return id < nodes_.size(); }

  /// Links `child` under `parent`. The child's depth must be parent depth + 1.
  NodeId add_child(NodeId parent, ReasoningState child);

  const ReasoningState& node(NodeId id) const;
  ReasoningState& node(NodeId id);
  std::span<const NodeId> children(NodeId id) const;
  bool is_leaf(NodeId id) const { return children(id).empty(); }

  std::optional<double> label(NodeId id) const;
  void set_label(NodeId id, double y);
  void clear_labels();

  /// Depth of the deepest node.
  std::size_t height() const;

 private:
  void check(NodeId id) const;

  std::vector<ReasoningState> nodes_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::optional<double>> labels_;
};

/// Root-to-node thought sequence, reconstructed through parent links.
std::vector<Thought> path_of(const ThoughtTree& tree, NodeId id);

enum class FallbackPoolPolicy { all_candidates, above_threshold_only };

std::string_view to_string(FallbackPoolPolicy policy);
FallbackPoolPolicy parse_fallback_policy(std::string_view text);

struct SearchConfig {
  std::size_t beam_width = 3;
  std::size_t fanout = 3;
  std::size_t max_depth = 6;
  /// Shortcut threshold. Values above 1 disable shortcuts for a clamped predictor.
  double tau = 0.7;
  double gamma = 0.99;
  /// Forwarded to remote generators only.
  double temperature = 0.7;
  std::uint64_t seed = 0;
  FallbackPoolPolicy fallback_pool_policy = FallbackPoolPolicy::all_candidates;

  /// Throws ConfigError on b, k or d_max of zero, or gamma outside (0, 1].
  void validate() const;
};

/// Whitespace-delimited token count.
std::size_t count_whitespace_tokens(std::string_view text);

}  // namespace dst
