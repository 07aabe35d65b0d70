// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/predictor.hpp"

#include <algorithm>

#include "dst/error.hpp"

namespace dst {

double Predictor::score(const FeatureVector& features) const {
  const auto flat = features.flatten();
  return score(std::span<const double>(flat));
}

FeatureProbePredictor::FeatureProbePredictor(std::size_t n_features, std::size_t index)
    : n_features_(n_features), index_(index) {
  if (index >= n_features) throw ConfigError("probe index out of range");
}

double FeatureProbePredictor::score(std::span<const double> features) const {
  if (features.size() != n_features_) {
    throw ValidationError("probe predictor expects " + std::to_string(n_features_) +
                          " features, got " + std::to_string(features.size()));
  }
  return std::clamp(features[index_], 0.0, 1.0);
}

}  // namespace dst
