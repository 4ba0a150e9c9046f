// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Prediction metrics (ATV, plus-minus and new-classes AUCs), variation
// decomposition and pathlet-level analyses.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathlets/common.hpp"
#include "pathlets/dict_learn.hpp"
#include "pathlets/ingest.hpp"
#include "pathlets/predict.hpp"
#include "pathlets/trajectory.hpp"

namespace pathlets {

/// Average total variation 1/n sum_u 1/2 sum_g |Y - Yhat| over `rows` (all
/// rows when empty). Throws DataError when there is nothing to average.
double atv(const Matrix& Y, const Matrix& Y_hat, std::span<const std::size_t> rows = {});

/// Probability that a random positive outscores a random negative, ties
/// counting one half. nullopt unless both classes are present.
std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// AUC of Yhat - Xprev against the sign of Y - Xprev, over cells that change.
std::optional<double> plus_minus_eval(const Matrix& Y, const Matrix& Y_hat,
                                      const Matrix& X_prev,
                                      std::span<const std::size_t> rows = {});

/// AUC of Yhat against Y > 0 over the appearance candidates.
std::optional<double> new_classes_eval(const Matrix& Y, const Matrix& Y_hat,
                                       const std::vector<CandidatePair>& appearance,
                                       std::span<const std::size_t> rows = {});

/// Window k of X as a |U| x |G| matrix.
Matrix window_matrix(const AllocationTensor& X, std::size_t k);

struct MetricsReport {
  std::string model;
  double atv = 0.0;
  std::optional<double> plus_minus_auc;
  std::optional<double> new_classes_auc;
  std::size_t n_users_evaluated = 0;
  std::size_t excluded_users = 0;
  bool shifted = false;  // AUCs scored one window earlier

  nlohmann::json to_json() const;
};

/// Scores a prediction of the last window of X. Users inactive in the
/// previous or the target window are excluded. With `shift`, the AUCs score
/// window K-3 as the prediction (for Previous, whose own AUC scores all tie).
MetricsReport evaluate_prediction(const std::string& model, const AllocationTensor& X,
                                  const PredictionMatrix& prediction, bool shift = false);

struct VariationRecord {
  std::size_t window = 0;  // transition window -> window + 1
  std::size_t user = 0;
  double tv = 0.0;
  double appearance = 0.0;
  double disappearance = 0.0;
  double persistence = 0.0;
};

struct VariationSummary {
  std::size_t window = 0;  // or decile index
  double tv_low = 0.0, tv_high = 0.0;
  std::size_t n_users = 0;
  double mean_tv = 0.0;
  double appearance = 0.0;
  double disappearance = 0.0;
  double persistence = 0.0;
};

struct VariationReport {
  std::vector<VariationRecord> records;
  std::vector<VariationSummary> per_window;
  std::vector<VariationSummary> per_decile;  // intra-variability buckets of width 0.1
};

/// Splits each user's total variation between consecutive windows into
/// appearance, disappearance and persistence shares. Users with an empty
/// window or no change are skipped.
VariationReport variation_decomposition(const AllocationTensor& X);

/// Pearson correlation of each feature column with the binary labels;
/// constant columns give 0.
std::vector<double> pathlet_correlation(const Matrix& features,
                                        std::span<const std::uint8_t> labels);

struct PathletProfile {
  bool inertial = false;
  double mean_rank = 0.0;
  double diversity = 0.0;  // distinct ranks / length
};

std::vector<PathletProfile> pathlet_profile(const PathletDictionary& dictionary);

struct PairEmbedding {
  CandidatePair pair;
  std::vector<double> coords;
  RankMap rank_map;
};

struct GenreEdge {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  double weight = 0.0;
};

struct GenreGraph {
  std::vector<GenreEdge> edges;  // descending weight

  void write_dot(std::ostream& out, const std::vector<std::string>& genres,
                 const std::string& name) const;
  nlohmann::json to_json(const std::vector<std::string>& genres) const;
};

/// Pathlets used by pairs anchored at `genre`, mapped back to genre ids
/// through each pair's rank map; consecutive genres add coord * max(0, corr).
GenreGraph extended_pathlet_graph(const PathletDictionary& dictionary,
                                  const std::vector<PairEmbedding>& embeddings,
                                  std::span<const double> correlations, std::uint32_t genre);

struct GenreDiversity {
  std::uint32_t genre = 0;
  double popularity = 0.0;
  double diversity = 0.0;  // usage-weighted, positively correlated pathlets only
  double weight = 0.0;
};

/// Diversity of positively correlated pathlets per anchor genre, alongside the
/// genre's corpus popularity.
std::vector<GenreDiversity> diversity_by_genre(const PathletDictionary& dictionary,
                                               const std::vector<PairEmbedding>& embeddings,
                                               std::span<const double> correlations,
                                               const std::vector<double>& popularity);

}  // namespace pathlets
