// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathlets/rng.hpp"

namespace pathlets {

namespace {

constexpr int kModelVersion = 1;

nlohmann::json header(const char* type) {
  return {{"format", "pathlets-classifier"}, {"version", kModelVersion}, {"type", type}};
}

void check_training_set(const Matrix& x, std::span<const std::uint8_t> y) {
  if (x.rows() != y.size()) throw UsageError("feature rows must match label count");
  if (x.rows() == 0) throw DataError("empty training set");
  const auto pos = std::count_if(y.begin(), y.end(), [](auto v) { return v != 0; });
  if (pos == 0 || static_cast<std::size_t>(pos) == y.size()) {
    throw DataError("training labels hold a single class; fall back to a constant classifier");
  }
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const std::uint8_t> y, const ForestConfig& cfg,
              std::size_t mtry, std::uint64_t seed)
      : x_(x), y_(y), cfg_(cfg), mtry_(mtry), rng_(seed) {}

  RandomForest::Tree build(std::vector<std::uint32_t> samples) {
    tree_.clear();
    grow(samples, 0);
    return std::move(tree_);
  }

 private:
  std::uint32_t grow(std::vector<std::uint32_t>& samples, std::size_t depth) {
    const auto id = static_cast<std::uint32_t>(tree_.size());
    tree_.emplace_back();
    const std::size_t n = samples.size();
    std::size_t pos = 0;
    for (auto s : samples) pos += y_[s] != 0;
    tree_[id].value = n ? static_cast<double>(pos) / static_cast<double>(n) : 0.0;
    if (depth >= cfg_.max_depth || pos == 0 || pos == n || n < 2 * cfg_.min_samples_leaf) {
      return id;
    }

    const double parent = impurity(pos, n) * static_cast<double>(n);
    double best = parent - 1e-12;
    std::int32_t best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, std::uint8_t>> column(n);
    for (auto f : sample_without_replacement(x_.cols(), mtry_, rng_)) {
      for (std::size_t i = 0; i < n; ++i) column[i] = {x_(samples[i], f), y_[samples[i]]};
      std::sort(column.begin(), column.end());
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += column[i].second != 0;
        const std::size_t nl = i + 1;
        if (nl < cfg_.min_samples_leaf) continue;
        if (n - nl < cfg_.min_samples_leaf) break;
        if (!(column[i].first < column[i + 1].first)) continue;
        const double score = impurity(left_pos, nl) * static_cast<double>(nl) +
                             impurity(pos - left_pos, n - nl) * static_cast<double>(n - nl);
        if (score < best) {
          best = score;
          best_feature = static_cast<std::int32_t>(f);
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::uint32_t> left, right;
    for (auto s : samples) {
      (x_(s, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right)
          .push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    auto& node = tree_[id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  static double impurity(std::size_t pos, std::size_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
  }

  const Matrix& x_;
  std::span<const std::uint8_t> y_;
  const ForestConfig& cfg_;
  std::size_t mtry_;
  Rng rng_;
  RandomForest::Tree tree_;
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

nlohmann::json ConstantClassifier::to_json() const {
  auto j = header("constant");
  j["p"] = p_;
  return j;
}

void ForestConfig::validate() const {
  if (n_trees < 1) throw UsageError("forest needs at least one tree");
  if (min_samples_leaf < 1) throw UsageError("min_samples_leaf must be at least 1");
}

RandomForest RandomForest::train(const Matrix& features, std::span<const std::uint8_t> labels,
                                 const ForestConfig& cfg) {
  cfg.validate();
  check_training_set(features, labels);
  RandomForest forest;
  forest.n_features_ = features.cols();
  const std::size_t mtry =
      std::clamp<std::size_t>(cfg.max_features ? cfg.max_features
                                               : static_cast<std::size_t>(std::ceil(
                                                     std::sqrt(static_cast<double>(features.cols())))),
                              1, std::max<std::size_t>(features.cols(), 1));
  forest.trees_.resize(cfg.n_trees);
  const auto n_trees = static_cast<std::ptrdiff_t>(cfg.n_trees);
  const std::size_t n = features.rows();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
    const auto tree_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t));
    Rng boot(derive_seed(tree_seed, "bootstrap"));
    std::vector<std::uint32_t> samples(n);
    if (cfg.bootstrap) {
      for (auto& s : samples) s = static_cast<std::uint32_t>(boot.below(n));
    } else {
      std::iota(samples.begin(), samples.end(), 0u);
    }
    TreeBuilder builder(features, labels, cfg, mtry, derive_seed(tree_seed, "splits"));
    forest.trees_[static_cast<std::size_t>(t)] = builder.build(std::move(samples));
  }
  return forest;
}

double RandomForest::predict_proba(std::span<const double> features) const {
  if (features.size() != n_features_) throw UsageError("feature dimension mismatch");
  if (trees_.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& tree : trees_) {
    std::uint32_t i = 0;
    while (tree[i].feature >= 0) {
      i = features[static_cast<std::size_t>(tree[i].feature)] <= tree[i].threshold
              ? tree[i].left
              : tree[i].right;
    }
    acc += tree[i].value;
  }
  return acc / static_cast<double>(trees_.size());
}

nlohmann::json RandomForest::to_json() const {
  auto j = header("random_forest");
  j["n_features"] = n_features_;
  auto& trees = j["trees"] = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json t;
    for (const auto& node : tree) {
      t["feature"].push_back(node.feature);
      t["threshold"].push_back(node.threshold);
      t["left"].push_back(node.left);
      t["right"].push_back(node.right);
      t["value"].push_back(node.value);
    }
    trees.push_back(std::move(t));
  }
  return j;
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  RandomForest forest;
  forest.n_features_ = j.at("n_features").get<std::size_t>();
  for (const auto& t : j.at("trees")) {
    Tree tree(t.at("feature").size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
      tree[i].feature = t["feature"][i].get<std::int32_t>();
      tree[i].threshold = t["threshold"][i].get<double>();
      tree[i].left = t["left"][i].get<std::uint32_t>();
      tree[i].right = t["right"][i].get<std::uint32_t>();
      tree[i].value = t["value"][i].get<double>();
    }
    forest.trees_.push_back(std::move(tree));
  }
  return forest;
}

LogisticRegression LogisticRegression::train(const Matrix& features,
                                             std::span<const std::uint8_t> labels,
                                             std::size_t iterations, double learning_rate,
                                             double l2) {
  check_training_set(features, labels);
  const std::size_t n = features.rows(), d = features.cols();
  LogisticRegression lr;
  lr.mean_.assign(d, 0.0);
  lr.scale_.assign(d, 1.0);
  for (std::size_t f = 0; f < d; ++f) {
    double m = 0.0, s = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += features(i, f);
    m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) s += (features(i, f) - m) * (features(i, f) - m);
    s = std::sqrt(s / static_cast<double>(n));
    lr.mean_[f] = m;
    lr.scale_[f] = s > 0.0 ? s : 1.0;
  }
  lr.weights_.assign(d, 0.0);
  std::vector<double> grad(d);
  std::vector<double> z(d);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = lr.bias_;
      for (std::size_t f = 0; f < d; ++f) {
        z[f] = (features(i, f) - lr.mean_[f]) / lr.scale_[f];
        s += lr.weights_[f] * z[f];
      }
      const double err = sigmoid(s) - (labels[i] ? 1.0 : 0.0);
      for (std::size_t f = 0; f < d; ++f) grad[f] += err * z[f];
      grad_b += err;
    }
    for (std::size_t f = 0; f < d; ++f) {
      lr.weights_[f] -= learning_rate * (grad[f] / static_cast<double>(n) + l2 * lr.weights_[f]);
    }
    lr.bias_ -= learning_rate * grad_b / static_cast<double>(n);
  }
  return lr;
}

double LogisticRegression::predict_proba(std::span<const double> features) const {
  if (features.size() != weights_.size()) throw UsageError("feature dimension mismatch");
  double s = bias_;
  for (std::size_t f = 0; f < weights_.size(); ++f) {
    s += weights_[f] * (features[f] - mean_[f]) / scale_[f];
  }
  return sigmoid(s);
}

nlohmann::json LogisticRegression::to_json() const {
  auto j = header("logistic_regression");
  j["mean"] = mean_;
  j["scale"] = scale_;
  j["weights"] = weights_;
  j["bias"] = bias_;
  return j;
}

LogisticRegression LogisticRegression::from_json(const nlohmann::json& j) {
  LogisticRegression lr;
  lr.mean_ = j.at("mean").get<std::vector<double>>();
  lr.scale_ = j.at("scale").get<std::vector<double>>();
  lr.weights_ = j.at("weights").get<std::vector<double>>();
  lr.bias_ = j.at("bias").get<double>();
  return lr;
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "pathlets-classifier") {
    throw DataError("not a pathlets classifier file");
  }
  if (j.value("version", 0) != kModelVersion) {
    throw DataError("unsupported classifier version " + std::to_string(j.value("version", 0)));
  }
  const auto type = j.value("type", "");
  if (type == "random_forest") return std::make_unique<RandomForest>(RandomForest::from_json(j));
  if (type == "logistic_regression") {
    return std::make_unique<LogisticRegression>(LogisticRegression::from_json(j));
  }
  if (type == "constant") return std::make_unique<ConstantClassifier>(j.at("p").get<double>());
  throw DataError("unknown classifier type '" + type + "'");
}

}  // namespace pathlets
