// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "dst/core.hpp"

namespace dst {

/// State evaluator consulted by the search engines. Implementations must be
/// pure and return scores in [0, 1].
class Predictor {
 public:
  virtual ~Predictor() = default;
  /// Expected flattened feature length, d + 1.
  virtual std::size_t n_features() const = 0;
  virtual double score(std::span<const double> features) const = 0;

  double score(const FeatureVector& features) const;
};

/// Returns one feature component clamped to [0, 1]. Used to replay
/// hand-written scenarios whose scores are placed directly in the embedding.
class FeatureProbePredictor final : public Predictor {
 public:
  FeatureProbePredictor(std::size_t n_features, std::size_t index);

  std::size_t n_features() const override { return n_features_; }
  double score(std::span<const double> features) const override;
  using Predictor::score;

 private:
  std::size_t n_features_;
  std::size_t index_;
};

}  // namespace dst
