// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/dict_learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathlets/embed.hpp"
#include "pathlets/kernels.hpp"
#include "pathlets/rng.hpp"

namespace pathlets {

namespace {

void check_shapes(const BinaryColumns& paths, const BinaryColumns& candidates,
                  const Matrix& alpha) {
  if (paths.n_rows != candidates.n_rows) {
    throw UsageError("paths and candidates must share the edge index");
  }
  if (alpha.rows() != candidates.n_cols() || alpha.cols() != paths.n_cols()) {
    throw UsageError("alpha must be |candidates| x |paths|");
  }
}

}  // namespace

void LearnConfig::validate() const {
  if (!(lambda >= 0.0)) throw UsageError("lambda must be non-negative");
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (top_n < 1) throw UsageError("top_n must be at least 1");
  if (patience < 1) throw UsageError("patience must be at least 1");
}

double loss(const BinaryColumns& paths, const BinaryColumns& candidates,
            const Matrix& alpha, double lambda) {
  check_shapes(paths, candidates, alpha);
  const auto d0 = kernels::Incidence::from(candidates);
  const auto p = kernels::Incidence::from(paths);
  Matrix r;
  kernels::parallel::residual(d0, p, alpha, r);
  return kernels::parallel::objective(r, alpha, lambda);
}

Matrix grad_smooth(const BinaryColumns& paths, const BinaryColumns& candidates,
                   const Matrix& alpha) {
  check_shapes(paths, candidates, alpha);
  const auto d0 = kernels::Incidence::from(candidates);
  const auto p = kernels::Incidence::from(paths);
  Matrix r, g;
  kernels::parallel::residual(d0, p, alpha, r);
  kernels::parallel::backproject(d0, r, g);
  return g;
}

CodeModel fit(const BinaryColumns& paths, const BinaryColumns& candidates,
              const LearnConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  if (paths.n_cols() == 0 || candidates.n_cols() == 0) {
    throw DataError("cannot fit codes without trajectories and candidates");
  }
  CodeModel model;
  model.alpha = Matrix(candidates.n_cols(), paths.n_cols());
  check_shapes(paths, candidates, model.alpha);

  Rng rng(derive_seed(cfg.seed, "alpha-init"));
  for (auto& a : model.alpha.values()) a = rng.uniform(0.0, 0.1);

  const auto d0 = kernels::Incidence::from(candidates);
  const auto p = kernels::Incidence::from(paths);
  Matrix r;
  kernels::parallel::residual(d0, p, model.alpha, r);
  model.initial_loss = kernels::parallel::objective(r, model.alpha, cfg.lambda);
  if (!std::isfinite(model.initial_loss)) throw NumericalError("non-finite initial loss");

  kernels::AdamState adam;
  double previous = model.initial_loss;
  std::size_t stale = 0;
  model.loss_history.reserve(cfg.max_epochs);
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    kernels::parallel::adam_step(d0, r, cfg.lambda, cfg.learning_rate, adam, model.alpha);
    kernels::parallel::residual(d0, p, model.alpha, r);
    const double current = kernels::parallel::objective(r, model.alpha, cfg.lambda);
    if (!std::isfinite(current)) {
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
    }
    model.loss_history.push_back(current);
    if (observer) observer(epoch, model.alpha, current);

    const double improvement =
        previous > 0.0 ? (previous - current) / previous : 0.0;
    stale = improvement < cfg.stagnation_tol ? stale + 1 : 0;
    previous = current;
    if (stale >= cfg.patience) {
      model.stopped_early = true;
      break;
    }
  }
  return model;
}

PathletDictionary select_topn(const Matrix& alpha, const std::vector<Pathlet>& candidates,
                              std::size_t top_n) {
  if (alpha.rows() != candidates.size()) {
    throw UsageError("alpha rows must match the candidate list");
  }
  std::vector<double> influence(candidates.size(), 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto row = alpha.row(i);
    influence[i] = std::accumulate(row.begin(), row.end(), 0.0);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (influence[a] != influence[b]) return influence[a] > influence[b];
    return support_order(candidates[a], candidates[b]);
  });
  order.resize(std::min(top_n, order.size()));

  PathletDictionary dict;
  for (auto i : order) {
    dict.pathlets.push_back(candidates[i]);
    dict.influence.push_back(influence[i]);
  }
  return dict;
}

DictionaryMetrics dict_metrics(const PathletDictionary& dictionary,
                               const std::vector<RankSeq>& trajectories) {
  if (dictionary.empty()) throw DataError("dictionary is empty");
  const Embedder embedder(dictionary);
  DictionaryMetrics m;
  const double dim = static_cast<double>(dictionary.size());
  for (const auto& t : trajectories) {
    if (t.size() < 2) continue;
    const auto emb = embedder.embed(t);
    const double covered = static_cast<double>(emb.total_edges - emb.uncovered_edges);
    const double nnz = static_cast<double>(emb.nonzero());
    m.cover_ratio += covered / static_cast<double>(emb.total_edges);
    m.code_sparsity += 1.0 - nnz / dim;
    m.mean_pathlets_per_trajectory += nnz;
    ++m.n_trajectories;
  }
  if (m.n_trajectories == 0) throw DataError("no trajectory with edges to evaluate");
  const double n = static_cast<double>(m.n_trajectories);
  m.cover_ratio /= n;
  m.code_sparsity /= n;
  m.mean_pathlets_per_trajectory /= n;
  return m;
}

}  // namespace pathlets
