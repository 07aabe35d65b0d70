// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dst/error.hpp"

namespace dst {

namespace {

using nlohmann::json;
using Index = std::uint32_t;

// Splits whose variance reduction does not exceed this are inadmissible.
constexpr double kMinGain = 1e-12;

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

/// A leaf under construction: its samples sorted along every feature.
struct GrowingLeaf {
  std::uint32_t node = 0;
  std::vector<std::vector<Index>> sorted;
  double residual_sum = 0.0;
  Split best;

  std::size_t size() const { return sorted.front().size(); }
};

class TreeGrower {
 public:
  TreeGrower(const std::vector<double>& x, std::size_t n_features, const TrainParams& params)
      : x_(x), n_features_(n_features), params_(params) {}

  RegressionTree grow(const std::vector<std::vector<Index>>& presorted,
                      const std::vector<double>& residual) {
    residual_ = &residual;
    RegressionTree tree;
    tree.nodes.emplace_back();

    std::vector<GrowingLeaf> leaves;
    leaves.push_back(make_leaf(0, presorted));

    while (leaves.size() < params_.max_leaves) {
      // Highest gain wins; ties keep the earliest created leaf.
      std::size_t pick = leaves.size();
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].best.feature < 0) continue;
        if (pick == leaves.size() || leaves[i].best.gain > leaves[pick].best.gain) pick = i;
      }
      if (pick == leaves.size()) break;

      GrowingLeaf parent = std::move(leaves[pick]);
      leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));

      const int f = parent.best.feature;
      const double thr = parent.best.threshold;
      std::vector<std::vector<Index>> left(n_features_), right(n_features_);
      for (std::size_t g = 0; g < n_features_; ++g) {
        left[g].reserve(parent.size());
        right[g].reserve(parent.size());
        for (Index i : parent.sorted[g]) {
          (value(i, static_cast<std::size_t>(f)) <= thr ? left[g] : right[g]).push_back(i);
        }
      }

      const auto left_node = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      const auto right_node = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& split = tree.nodes[parent.node];
      split.split_feature = f;
      split.threshold = thr;
      split.left = left_node;
      split.right = right_node;

      leaves.push_back(make_leaf(left_node, std::move(left)));
      leaves.push_back(make_leaf(right_node, std::move(right)));
    }

    for (const auto& leaf : leaves) {
      tree.nodes[leaf.node].leaf_value = leaf.residual_sum / static_cast<double>(leaf.size());
    }
    return tree;
  }

 private:
  double value(Index i, std::size_t f) const { return x_[static_cast<std::size_t>(i) * n_features_ + f]; }

  GrowingLeaf make_leaf(std::uint32_t node, std::vector<std::vector<Index>> sorted) {
    GrowingLeaf leaf;
    leaf.node = node;
    leaf.sorted = std::move(sorted);
    // Summing in sample order keeps the leaf value independent of the split
    // history.
    std::vector<Index> members = leaf.sorted.front();
    std::sort(members.begin(), members.end());
    for (Index i : members) leaf.residual_sum += (*residual_)[i];
    leaf.best = find_split(leaf);
    return leaf;
  }

  Split find_split(const GrowingLeaf& leaf) const {
    Split best;
    const std::size_t n = leaf.size();
    const std::size_t min_leaf = params_.min_samples_leaf;
    if (n < 2 * min_leaf || n < 2) return best;
    const double total = leaf.residual_sum;
    const double parent_score = total * total / static_cast<double>(n);

    for (std::size_t f = 0; f < n_features_; ++f) {
      const auto& order = leaf.sorted[f];
      double left_sum = 0.0;
      for (std::size_t j = 0; j + 1 < n; ++j) {
        left_sum += (*residual_)[order[j]];
        const std::size_t n_left = j + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf) continue;
        if (n_right < min_leaf) break;
        const double a = value(order[j], f);
        const double b = value(order[j + 1], f);
        if (!(a < b)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(n_right) - parent_score;
        if (gain > kMinGain && gain > best.gain) {
          double thr = a + (b - a) / 2.0;
          if (!(thr < b)) thr = a;
          best = Split{gain, static_cast<int>(f), thr};
        }
      }
    }
    return best;
  }

  const std::vector<double>& x_;
  std::size_t n_features_;
  const TrainParams& params_;
  const std::vector<double>* residual_ = nullptr;
};

double train_mse(const std::vector<double>& pred, const std::vector<double>& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - pred[i];
    sum += d * d;
  }
  return sum / static_cast<double>(y.size());
}

}  // namespace

double RegressionTree::evaluate(std::span<const double> x) const {
  std::uint32_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = x[static_cast<std::size_t>(n.split_feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[i].leaf_value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

void TrainParams::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw ConfigError("learning_rate must lie in (0, 1]");
  if (n_rounds < 1) throw ConfigError("n_rounds must be >= 1");
  if (max_leaves < 2) throw ConfigError("max_leaves must be >= 2");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
}

GbdtModel GbdtModel::train(std::span<const TrainingExample> dataset, const TrainParams& params,
                           TrainReport* report) {
  params.validate();
  if (dataset.empty()) throw ValidationError("cannot train on an empty dataset");
  const std::size_t n = dataset.size();
  const std::size_t n_features = dataset.front().features.flat_size();

  std::vector<double> x;
  x.reserve(n * n_features);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ex = dataset[i];
    if (ex.features.flat_size() != n_features) {
      throw ValidationError("example " + std::to_string(i) + " has " +
                            std::to_string(ex.features.flat_size()) + " features, expected " +
                            std::to_string(n_features));
    }
    if (!(ex.label >= 0.0 && ex.label <= 1.0)) {
      throw ValidationError("example " + std::to_string(i) + " has label outside [0, 1]");
    }
    const auto flat = ex.features.flatten();
    x.insert(x.end(), flat.begin(), flat.end());
    y[i] = ex.label;
  }

  GbdtModel model;
  model.n_features_ = n_features;
  model.learning_rate_ = params.learning_rate;
  // Running mean: exact when all labels coincide.
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += (y[i] - mean) / static_cast<double>(i + 1);
  model.base_score_ = mean;

  std::vector<std::vector<Index>> presorted(n_features, std::vector<Index>(n));
  for (std::size_t f = 0; f < n_features; ++f) {
    auto& order = presorted[f];
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return x[a * n_features + f] < x[b * n_features + f];
    });
  }

  std::vector<double> pred(n, model.base_score_);
  std::vector<double> residual(n);
  if (report) {
    report->train_mse.clear();
    report->train_mse.push_back(train_mse(pred, y));
  }

  TreeGrower grower(x, n_features, params);
  model.trees_.reserve(params.n_rounds);
  for (std::size_t round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
    RegressionTree tree = grower.grow(presorted, residual);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += params.learning_rate *
                 tree.evaluate(std::span<const double>(x.data() + i * n_features, n_features));
    }
    model.trees_.push_back(std::move(tree));
    if (report) report->train_mse.push_back(train_mse(pred, y));
  }
  return model;
}

double GbdtModel::predict_raw(std::span<const double> features) const {
  if (features.size() != n_features_) {
    throw ValidationError("model expects " + std::to_string(n_features_) + " features, got " +
                          std::to_string(features.size()));
  }
  double out = base_score_;
  for (const auto& tree : trees_) out += learning_rate_ * tree.evaluate(features);
  return out;
}

double GbdtModel::predict(std::span<const double> features) const {
  const double raw = predict_raw(features);
  return clamp_output_ ? std::clamp(raw, 0.0, 1.0) : raw;
}

double GbdtModel::predict(const FeatureVector& features) const {
  const auto flat = features.flatten();
  return predict(std::span<const double>(flat));
}

std::string GbdtModel::to_json() const {
  json trees = json::array();
  for (const auto& tree : trees_) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        nodes.push_back(json{{"leaf_value", n.leaf_value}});
      } else {
        nodes.push_back(json{{"split_feature", n.split_feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right}});
      }
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  json doc{{"version", kFormatVersion},
           {"n_features", n_features_},
           {"learning_rate", learning_rate_},
           {"base_score", base_score_},
           {"clamp_output", clamp_output_},
           {"trees", std::move(trees)}};
  return doc.dump();
}

GbdtModel GbdtModel::from_json(std::string_view text, const std::string& source,
                               std::optional<std::size_t> expected_features) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DeserializationError(source, e.what());
  }
  GbdtModel model;
  try {
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw DeserializationError(source, "unsupported model version " + doc.at("version").dump());
    }
    model.n_features_ = doc.at("n_features").get<std::size_t>();
    model.learning_rate_ = doc.at("learning_rate").get<double>();
    model.base_score_ = doc.at("base_score").get<double>();
    model.clamp_output_ = doc.at("clamp_output").get<bool>();
    if (model.n_features_ < 1) throw DeserializationError(source, "n_features must be >= 1");
    if (!(model.learning_rate_ > 0.0 && model.learning_rate_ <= 1.0))
      throw DeserializationError(source, "learning_rate outside (0, 1]");
    const auto& trees = doc.at("trees");
    for (std::size_t t = 0; t < trees.size(); ++t) {
      const std::string where = source + ": trees[" + std::to_string(t) + "]";
      const auto& nodes = trees[t].at("nodes");
      if (nodes.empty()) throw DeserializationError(where, "tree has no nodes");
      RegressionTree tree;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& jn = nodes[k];
        TreeNode n;
        if (jn.contains("leaf_value")) {
          n.leaf_value = jn.at("leaf_value").get<double>();
          if (!std::isfinite(n.leaf_value)) throw DeserializationError(where, "non-finite leaf");
        } else {
          n.split_feature = jn.at("split_feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<std::uint32_t>();
          n.right = jn.at("right").get<std::uint32_t>();
          if (n.split_feature < 0 || static_cast<std::size_t>(n.split_feature) >= model.n_features_)
            throw DeserializationError(where, "split feature out of range");
          if (n.left <= k || n.right <= k || n.left >= nodes.size() || n.right >= nodes.size())
            throw DeserializationError(where, "child index out of range");
        }
        tree.nodes.push_back(n);
      }
      model.trees_.push_back(std::move(tree));
    }
  } catch (const json::exception& e) {
    throw DeserializationError(source, e.what());
  }
  if (expected_features && *expected_features != model.n_features_) {
    throw ValidationError("model has " + std::to_string(model.n_features_) +
                          " features but the run uses " + std::to_string(*expected_features));
  }
  return model;
}

void GbdtModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DeserializationError(path, "cannot write model");
  out << to_json() << '\n';
}

GbdtModel GbdtModel::load(const std::string& path, std::optional<std::size_t> expected_features) {
  std::ifstream in(path);
  if (!in) throw DeserializationError(path, "cannot open model");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str(), path, expected_features);
}

}  // namespace dst
