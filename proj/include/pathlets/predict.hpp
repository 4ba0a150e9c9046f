// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Next-window allocation predictors. Every predictor receives only the
// history windows (the target window is never passed in): the last window of
// `history` is the "previous" one.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "pathlets/classifier.hpp"
#include "pathlets/common.hpp"
#include "pathlets/ingest.hpp"

namespace pathlets {

/// |U| x |G| predicted allocations. Rows sum to 1, except all-zero rows of
/// users the model cannot predict.
struct PredictionMatrix {
  Matrix values;
};

struct PairFeatures {
  CandidatePair pair;
  std::vector<double> features;
};

struct LabeledPair {
  CandidatePair pair;
  std::vector<double> features;
  std::uint8_t label = 0;
};

/// Appearance label: the genre is present in the target window.
/// Disappearance label: it is absent.
std::uint8_t label_for(const CandidatePair& pair, const AllocationTensor& with_target);

/// Features as a dense matrix plus labels, for classifier training.
void to_training_set(const std::vector<LabeledPair>& data, Matrix& features,
                     std::vector<std::uint8_t>& labels);

/// Random forest on the pairs. Throws DataError for single-class data.
std::unique_ptr<Classifier> train_classifier(const std::vector<LabeledPair>& data,
                                             const ForestConfig& cfg);

/// train_classifier, or a constant classifier at the observed positive rate
/// when only one class is present.
std::unique_ptr<Classifier> train_or_constant(const std::vector<LabeledPair>& data,
                                              const ForestConfig& cfg);

/// Mean of X[k][u][g] over history windows where it is positive.
double historical_mean(const AllocationTensor& history, std::size_t u, std::size_t g);

struct PlugPreviousResult {
  PredictionMatrix prediction;
  std::size_t appearance_edits = 0;
  std::size_t disappearance_edits = 0;
  std::size_t popularity_fallbacks = 0;
  std::vector<double> appearance_scores;     // aligned with the input pairs
  std::vector<double> disappearance_scores;
};

/// Previous edited by the two classifiers (probability > 0.5): appearing
/// pairs get their historical mean, disappearing pairs get 0; rows are then
/// L1-normalised, with the popularity distribution for rows left empty.
PlugPreviousResult plug_previous(const AllocationTensor& history,
                                 const Classifier& appearance,
                                 const Classifier& disappearance,
                                 const std::vector<PairFeatures>& appearance_pairs,
                                 const std::vector<PairFeatures>& disappearance_pairs,
                                 const std::vector<double>& popularity);

PredictionMatrix baseline_previous(const AllocationTensor& history);

/// Genre event frequencies pooled over all history windows.
std::vector<double> popularity_distribution(const WindowedHistories& history);
PredictionMatrix baseline_popularity(const WindowedHistories& history);

struct NmfConfig {
  std::size_t rank = 16;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;  // relative objective change counted as converged
};

struct NmfResult {
  Matrix W, H;
  std::vector<double> objective;  // 1/2 ||M - WH||_F^2 after each iteration
  bool converged = false;
};

/// Lee-Seung multiplicative updates for the Frobenius loss.
NmfResult nmf(const Matrix& M, const NmfConfig& cfg);

struct NmfPrediction {
  PredictionMatrix prediction;
  NmfResult factors;
};

/// Factorises the mean history allocation and row-normalises W H; rows that
/// vanish get `popularity`.
NmfPrediction baseline_nmf(const AllocationTensor& history, const NmfConfig& cfg,
                           const std::vector<double>& popularity);

}  // namespace pathlets
