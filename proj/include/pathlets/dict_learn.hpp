// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Box-constrained sparse coding of trajectories over candidate pathlets:
//
//   min_{alpha in [0,1]^{|D0| x |P|}}  1/2 ||P - D0 alpha||_F^2 + lambda ||alpha||_1
//
// solved with Adam on the subgradient D0^T (D0 alpha - P) + lambda, projecting
// onto the box after every step. The dictionary side is fixed to the mined
// candidates; only the code matrix is learned.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "pathlets/common.hpp"
#include "pathlets/pathlet_graph.hpp"

namespace pathlets {

struct LearnConfig {
  double lambda = 0.0025;
  double learning_rate = 0.01;
  std::size_t max_epochs = 500;
  std::size_t patience = 5;
  double stagnation_tol = 1e-4;
  std::size_t top_n = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CodeModel {
  Matrix alpha;  // |D0| x |P|, entries in [0, 1]
  double initial_loss = 0.0;
  std::vector<double> loss_history;  // loss after each epoch
  bool stopped_early = false;

  double final_loss() const {
    return loss_history.empty() ? initial_loss : loss_history.back();
  }
};

struct PathletDictionary {
  std::vector<Pathlet> pathlets;  // descending influence
  std::vector<double> influence;

  std::size_t size() const { return pathlets.size(); }
  bool empty() const { return pathlets.empty(); }
  bool operator==(const PathletDictionary&) const = default;
};

/// Called after every epoch with the projected code and its loss.
using EpochObserver = std::function<void(std::size_t epoch, const Matrix& alpha, double loss)>;

double loss(const BinaryColumns& paths, const BinaryColumns& candidates,
            const Matrix& alpha, double lambda);

/// Gradient of the smooth term: D0^T (D0 alpha - P).
Matrix grad_smooth(const BinaryColumns& paths, const BinaryColumns& candidates,
                   const Matrix& alpha);

/// Throws NumericalError naming the epoch if the loss stops being finite.
CodeModel fit(const BinaryColumns& paths, const BinaryColumns& candidates,
              const LearnConfig& cfg, const EpochObserver& observer = {});

/// Influence of a candidate is its total code mass (row sum of alpha). Ties
/// fall back to higher support, then shorter length.
PathletDictionary select_topn(const Matrix& alpha, const std::vector<Pathlet>& candidates,
                              std::size_t top_n);

struct DictionaryMetrics {
  double cover_ratio = 0.0;
  double code_sparsity = 0.0;
  double mean_pathlets_per_trajectory = 0.0;
  std::size_t n_trajectories = 0;
};

/// Computed from greedy embeddings; trajectories without edges are skipped.
/// Throws DataError when nothing remains to evaluate.
DictionaryMetrics dict_metrics(const PathletDictionary& dictionary,
                               const std::vector<RankSeq>& trajectories);

}  // namespace pathlets
