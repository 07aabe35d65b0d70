// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "dst/error.hpp"

namespace dst {

std::vector<double> FeatureVector::flatten() const {
  std::vector<double> flat;
  flat.reserve(flat_size());
  flat.insert(flat.end(), embedding.begin(), embedding.end());
  flat.push_back(consistency);
  return flat;
}

ReasoningState make_root(const Problem& problem, std::vector<double> root_embedding) {
  if (problem.text.empty()) throw ValidationError("problem '" + problem.id + "' has empty text");
  ReasoningState root;
  root.problem_id = problem.id;
  root.features.embedding = std::move(root_embedding);
  root.features.consistency = 1.0;
  return root;
}

ReasoningState extend_state(const ReasoningState& parent, Thought thought, FeatureVector features,
                            std::size_t run_dim, std::size_t slot,
                            std::optional<std::string> answer) {
  if (features.dim() != run_dim) {
    throw ConfigError("embedding dimension " + std::to_string(features.dim()) +
                      " does not match run dimension " + std::to_string(run_dim));
  }
  if (thought.text.empty() && !thought.terminal) {
    throw ValidationError("non-terminal thought with empty text");
  }
  ReasoningState child;
  child.problem_id = parent.problem_id;
  child.thoughts.reserve(parent.thoughts.size() + 1);
  child.thoughts = parent.thoughts;
  child.thoughts.push_back(std::move(thought));
  child.features = std::move(features);
  child.depth = parent.depth + 1;
  child.answer = std::move(answer);
  child.path = parent.path;
  child.path.push_back(slot);
  return child;
}

ThoughtTree::ThoughtTree(ReasoningState root) {
  if (root.depth != 0 || !root.thoughts.empty() || root.parent) {
    throw ValidationError("tree root must have depth 0, no thoughts and no parent");
  }
  nodes_.push_back(std::move(root));
  children_.emplace_back();
  labels_.emplace_back();
}

void ThoughtTree::check(NodeId id) const {
  if (!contains(id)) {
    throw LookupError("node " + std::to_string(id) + " is not in the tree (size " +
                      std::to_string(nodes_.size()) + ")");
  }
}

NodeId ThoughtTree::add_child(NodeId parent, ReasoningState child) {
  check(parent);
  if (child.depth != nodes_[parent].depth + 1 || child.thoughts.size() != child.depth) {
    throw ValidationError("child depth must equal parent depth + 1 and its thought count");
  }
  const NodeId id = nodes_.size();
  child.parent = parent;
  nodes_.push_back(std::move(child));
  children_.emplace_back();
  labels_.emplace_back();
  children_[parent].push_back(id);
  return id;
}

const ReasoningState& ThoughtTree::node(NodeId id) const {
  check(id);
  return nodes_[id];
}

ReasoningState& ThoughtTree::node(NodeId id) {
  check(id);
  return nodes_[id];
}

std::span<const NodeId> ThoughtTree::children(NodeId id) const {
  check(id);
  return children_[id];
}

std::optional<double> ThoughtTree::label(NodeId id) const {
  check(id);
  return labels_[id];
}

void ThoughtTree::set_label(NodeId id, double y) {
  check(id);
  if (!(y >= 0.0 && y <= 1.0)) throw ValidationError("label outside [0, 1]");
  labels_[id] = y;
}

void ThoughtTree::clear_labels() {
  std::fill(labels_.begin(), labels_.end(), std::nullopt);
}

std::size_t ThoughtTree::height() const {
  std::size_t h = 0;
  for (const auto& n : nodes_) h = std::max(h, n.depth);
  return h;
}

std::vector<Thought> path_of(const ThoughtTree& tree, NodeId id) {
  std::vector<Thought> reversed;
  std::optional<NodeId> cur = id;
  while (cur) {
    const ReasoningState& s = tree.node(*cur);
    if (!s.is_root()) reversed.push_back(s.thoughts.back());
    cur = s.parent;
  }
  return {reversed.rbegin(), reversed.rend()};
}

std::string_view to_string(FallbackPoolPolicy policy) {
  switch (policy) {
    case FallbackPoolPolicy::all_candidates: return "all_candidates";
    case FallbackPoolPolicy::above_threshold_only: return "above_threshold_only";
  }
  return "unknown";
}

FallbackPoolPolicy parse_fallback_policy(std::string_view text) {
  if (text == "all_candidates") return FallbackPoolPolicy::all_candidates;
  if (text == "above_threshold_only") return FallbackPoolPolicy::above_threshold_only;
  throw ConfigError("unknown fallback pool policy '" + std::string(text) + "'");
}

void SearchConfig::validate() const {
  if (beam_width < 1) throw ConfigError("beam width must be >= 1");
  if (fanout < 1) throw ConfigError("fanout must be >= 1");
  if (max_depth < 1) throw ConfigError("max depth must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (std::isnan(tau) || tau < 0.0) throw ConfigError("tau must be >= 0");
}

std::size_t count_whitespace_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

}  // namespace dst
