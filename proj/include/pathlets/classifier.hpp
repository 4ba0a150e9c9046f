// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Probability classifiers used by the appearance and disappearance models.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathlets/common.hpp"

namespace pathlets {

class Classifier {
 public:
  virtual ~Classifier() = default;
  /// Probability of the positive class.
  virtual double predict_proba(std::span<const double> features) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

/// Versioned model file -> classifier. Throws DataError on unknown formats.
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

class ConstantClassifier final : public Classifier {
 public:
  explicit ConstantClassifier(double p) : p_(p) {}
  double predict_proba(std::span<const double>) const override { return p_; }
  nlohmann::json to_json() const override;

 private:
  double p_;
};

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_samples_leaf = 5;
  std::size_t max_features = 0;  // 0: ceil(sqrt(#features))
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// CART trees on Gini impurity with bootstrap resampling and per-split
/// feature subsampling. The forest probability is the mean over trees of the
/// positive fraction in the reached leaf.
class RandomForest final : public Classifier {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // go left when x[feature] <= threshold
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;         // positive fraction of the node's samples
  };
  using Tree = std::vector<Node>;

  /// Throws DataError when `labels` holds a single class; use a
  /// ConstantClassifier in that case.
  static RandomForest train(const Matrix& features, std::span<const std::uint8_t> labels,
                            const ForestConfig& cfg);

  double predict_proba(std::span<const double> features) const override;
  nlohmann::json to_json() const override;
  static RandomForest from_json(const nlohmann::json& j);

  const std::vector<Tree>& trees() const { return trees_; }
  std::size_t n_features() const { return n_features_; }

 private:
  std::vector<Tree> trees_;
  std::size_t n_features_ = 0;
};

/// Plain L2-regularised logistic regression on standardised features; a
/// debugging stand-in for the forest.
class LogisticRegression final : public Classifier {
 public:
  static LogisticRegression train(const Matrix& features,
                                  std::span<const std::uint8_t> labels,
                                  std::size_t iterations = 500, double learning_rate = 0.1,
                                  double l2 = 1e-4);
  double predict_proba(std::span<const double> features) const override;
  nlohmann::json to_json() const override;
  static LogisticRegression from_json(const nlohmann::json& j);

 private:
  std::vector<double> mean_, scale_, weights_;
  double bias_ = 0.0;
};

}  // namespace pathlets
