// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dst/core.hpp"
#include "dst/generator.hpp"
#include "dst/verify.hpp"

namespace dst {

/// Embeddings from the root down to `id`, inclusive.
std::vector<std::vector<double>> ancestor_embeddings(const ThoughtTree& tree, NodeId id);

struct CollectOptions {
  std::size_t fanout = 3;
  std::size_t max_depth = 6;
  std::uint64_t seed = 0;
  double temperature = 0.7;
  /// Maximum number of nodes expanded per depth; unset means no cap.
  std::optional<std::size_t> expansion_cap;
};

/// Breadth-first thought tree. Every dequeued non-terminal node below
/// max_depth is expanded into exactly `fanout` children whose features carry
/// their consistency against all ancestors (root included). Propagates
/// GenerationError.
ThoughtTree build_tree(const Problem& problem, Generator& generator, const CollectOptions& options);

/// Labels leaves 0/1 with `verifier` and every internal node with
/// gamma * mean(children), deepest nodes first. Overwrites existing labels.
void propagate_scores(ThoughtTree& tree, const Problem& problem, double gamma,
                      const VerifierChoice& verifier);

struct TrainingExample {
  FeatureVector features;
  double label = 0.0;
  std::string problem_id;
  std::size_t depth = 0;
  NodePath path;
};

/// One example per non-root node in breadth-first order. Leaves are skipped
/// when `include_leaves` is false. Throws std::logic_error on an unlabeled node.
std::vector<TrainingExample> emit_dataset(const ThoughtTree& tree, bool include_leaves = true);

// Tree dumps: {"problem": {...}, "embedding_dim": d, "gamma": g|null,
// "nodes": [{id, parent, path, thought, tokens, terminal, answer, embedding,
// consistency, label}]}.
struct TreeDump {
  Problem problem;
  ThoughtTree tree;
};

void write_tree(std::ostream& out, const Problem& problem, const ThoughtTree& tree);
TreeDump read_tree(std::istream& in, const std::string& source = "<tree>");
void save_tree(const std::string& path, const Problem& problem, const ThoughtTree& tree);
TreeDump load_tree(const std::string& path);

// Datasets: JSON lines {"features": [...], "label": y, "problem_id": str,
// "depth": int, "path": [int]}.
void write_dataset(std::ostream& out, const std::vector<TrainingExample>& examples);
/// Throws DeserializationError naming the offending line.
std::vector<TrainingExample> read_dataset(std::istream& in, const std::string& source = "<dataset>");
std::vector<TrainingExample> load_dataset(const std::string& path);

}  // namespace dst
