// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dst/collect.hpp"
#include "dst/predictor.hpp"

namespace dst {

struct TreeNode {
  /// -1 marks a leaf.
  int split_feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double leaf_value = 0.0;

  bool is_leaf() const noexcept { return split_feature < 0; }
};

/// Binary regression tree; samples with x[f] <= threshold go left.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double evaluate(std::span<const double> x) const;
  std::size_t leaf_count() const;
};

struct TrainParams {
  double learning_rate = 0.05;
  std::size_t n_rounds = 500;
  std::size_t max_leaves = 31;
  std::size_t min_samples_leaf = 20;
  /// Reserved for sampling variants; exact split search is seed-independent.
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  /// train_mse[0] is the error of the base score alone; entry r follows round r.
  std::vector<double> train_mse;
};

/// Squared-error gradient boosting over exact, leaf-wise grown regression trees.
class GbdtModel final : public Predictor {
 public:
  GbdtModel() = default;

  /// Throws ValidationError on an empty dataset, ragged features or labels
  /// outside [0, 1].
  static GbdtModel train(std::span<const TrainingExample> dataset, const TrainParams& params,
                         TrainReport* report = nullptr);

  /// base_score + sum(learning_rate * tree(x)), without clamping.
  double predict_raw(std::span<const double> features) const;
  /// predict_raw, clamped to [0, 1] when clamp_output is set.
  double predict(std::span<const double> features) const;
  double predict(const FeatureVector& features) const;

  std::size_t n_features() const override { return n_features_; }
  double score(std::span<const double> features) const override { return predict(features); }
  using Predictor::score;

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  double learning_rate() const noexcept { return learning_rate_; }
  double base_score() const noexcept { return base_score_; }
  bool clamp_output() const noexcept { return clamp_output_; }
  void set_clamp_output(bool clamp) noexcept { clamp_output_ = clamp; }

  /// JSON: {version, n_features, learning_rate, base_score, clamp_output, trees}.
  std::string to_json() const;
  /// Throws DeserializationError with `source` on malformed input and
  /// ValidationError when `expected_features` disagrees with the file.
  static GbdtModel from_json(std::string_view text, const std::string& source = "<model>",
                             std::optional<std::size_t> expected_features = std::nullopt);
  void save(const std::string& path) const;
  static GbdtModel load(const std::string& path,
                        std::optional<std::size_t> expected_features = std::nullopt);

  static constexpr int kFormatVersion = 1;

 private:
  std::vector<RegressionTree> trees_;
  double learning_rate_ = 0.05;
  double base_score_ = 0.0;
  std::size_t n_features_ = 0;
  bool clamp_output_ = true;
};

}  // namespace dst
