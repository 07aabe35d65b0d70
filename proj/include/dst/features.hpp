// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "dst/core.hpp"

namespace dst {

/// Cosine of the angle between `a` and `b`, clamped to [-1, 1].
/// Throws ConfigError on a dimension mismatch and ValidationError on a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Mean cosine similarity between a node embedding and each ancestor embedding
/// (root first). An empty ancestor list scores 1.
double consistency_score(std::span<const double> node_embedding,
                         std::span<const std::vector<double>> ancestor_embeddings);

/// Packs an embedding and consistency into a FeatureVector.
/// Throws ValidationError when consistency is outside [-1, 1].
FeatureVector assemble_features(std::vector<double> embedding, double consistency);

}  // namespace dst
