// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dst/error.hpp"

namespace dst {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("cosine of vectors with dimensions " + std::to_string(a.size()) + " and " +
                      std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double consistency_score(std::span<const double> node_embedding,
                         std::span<const std::vector<double>> ancestor_embeddings) {
  if (ancestor_embeddings.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& ancestor : ancestor_embeddings) {
    sum += cosine_similarity(node_embedding, ancestor);
  }
  return std::clamp(sum / static_cast<double>(ancestor_embeddings.size()), -1.0, 1.0);
}

FeatureVector assemble_features(std::vector<double> embedding, double consistency) {
  if (!(consistency >= -1.0 && consistency <= 1.0)) {
    throw ValidationError("consistency " + std::to_string(consistency) + " outside [-1, 1]");
  }
  return FeatureVector{std::move(embedding), consistency};
}

}  // namespace dst
