// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathlets/kernels.hpp"
#include "pathlets/rng.hpp"

namespace pathlets {

namespace {

constexpr double kNmfEps = 1e-12;

void normalize_rows(Matrix& m, const std::vector<double>& fallback,
                    std::size_t* fallbacks = nullptr) {
  for (std::size_t u = 0; u < m.rows(); ++u) {
    auto row = m.row(u);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (total > 1e-12) {
      for (auto& v : row) v /= total;
    } else {
      std::copy(fallback.begin(), fallback.end(), row.begin());
      if (fallbacks) ++*fallbacks;
    }
  }
}

double half_sq_error(const Matrix& m, const Matrix& approx) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double d = m.values()[i] - approx.values()[i];
    acc += d * d;
  }
  return 0.5 * acc;
}

}  // namespace

std::uint8_t label_for(const CandidatePair& pair, const AllocationTensor& with_target) {
  const double y = with_target.at(with_target.K() - 1, pair.user, pair.genre);
  return pair.kind == CandidateKind::kAppearance ? y > 0.0 : y == 0.0;
}

void to_training_set(const std::vector<LabeledPair>& data, Matrix& features,
                     std::vector<std::uint8_t>& labels) {
  const std::size_t d = data.empty() ? 0 : data.front().features.size();
  features = Matrix(data.size(), d);
  labels.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].features.size() != d) throw UsageError("inconsistent feature dimension");
    std::copy(data[i].features.begin(), data[i].features.end(), features.row(i).begin());
    labels[i] = data[i].label;
  }
}

std::unique_ptr<Classifier> train_classifier(const std::vector<LabeledPair>& data,
                                             const ForestConfig& cfg) {
  Matrix x;
  std::vector<std::uint8_t> y;
  to_training_set(data, x, y);
  return std::make_unique<RandomForest>(RandomForest::train(x, y, cfg));
}

std::unique_ptr<Classifier> train_or_constant(const std::vector<LabeledPair>& data,
                                              const ForestConfig& cfg) {
  const auto pos = std::count_if(data.begin(), data.end(),
                                 [](const LabeledPair& p) { return p.label != 0; });
  if (data.empty()) return std::make_unique<ConstantClassifier>(0.0);
  if (pos == 0 || static_cast<std::size_t>(pos) == data.size()) {
    return std::make_unique<ConstantClassifier>(pos == 0 ? 0.0 : 1.0);
  }
  return train_classifier(data, cfg);
}

double historical_mean(const AllocationTensor& history, std::size_t u, std::size_t g) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < history.K(); ++k) {
    const double v = history.at(k, u, g);
    if (v > 0.0) {
      acc += v;
      ++n;
    }
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

PredictionMatrix baseline_previous(const AllocationTensor& history) {
  if (history.K() == 0) throw UsageError("history has no windows");
  PredictionMatrix out{Matrix(history.n_users(), history.n_genres())};
  for (std::size_t u = 0; u < history.n_users(); ++u) {
    const auto row = history.row(history.K() - 1, u);
    std::copy(row.begin(), row.end(), out.values.row(u).begin());
  }
  return out;
}

PlugPreviousResult plug_previous(const AllocationTensor& history,
                                 const Classifier& appearance,
                                 const Classifier& disappearance,
                                 const std::vector<PairFeatures>& appearance_pairs,
                                 const std::vector<PairFeatures>& disappearance_pairs,
                                 const std::vector<double>& popularity) {
  PlugPreviousResult res;
  res.prediction = baseline_previous(history);
  auto& y = res.prediction.values;
  // Rows without any edit keep their Previous values bit for bit.
  std::vector<bool> touched(y.rows(), false);

  res.appearance_scores.reserve(appearance_pairs.size());
  for (const auto& p : appearance_pairs) {
    const double s = appearance.predict_proba(p.features);
    res.appearance_scores.push_back(s);
    if (s > 0.5) {
      y(p.pair.user, p.pair.genre) = historical_mean(history, p.pair.user, p.pair.genre);
      touched[p.pair.user] = true;
      ++res.appearance_edits;
    }
  }
  res.disappearance_scores.reserve(disappearance_pairs.size());
  for (const auto& p : disappearance_pairs) {
    const double s = disappearance.predict_proba(p.features);
    res.disappearance_scores.push_back(s);
    if (s > 0.5) {
      y(p.pair.user, p.pair.genre) = 0.0;
      touched[p.pair.user] = true;
      ++res.disappearance_edits;
    }
  }
  for (std::size_t u = 0; u < y.rows(); ++u) {
    if (!touched[u]) continue;
    auto row = y.row(u);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (total > 1e-12) {
      for (auto& v : row) v /= total;
    } else {
      std::copy(popularity.begin(), popularity.end(), row.begin());
      ++res.popularity_fallbacks;
    }
  }
  return res;
}

std::vector<double> popularity_distribution(const WindowedHistories& history) {
  std::vector<double> freq(history.n_genres(), 0.0);
  double total = 0.0;
  for (std::size_t u = 0; u < history.n_users(); ++u) {
    for (std::size_t k = 0; k < history.K; ++k) {
      for (auto g : history.window(u, k)) freq[g] += 1.0;
      total += static_cast<double>(history.window(u, k).size());
    }
  }
  if (total > 0.0) {
    for (auto& f : freq) f /= total;
  }
  return freq;
}

PredictionMatrix baseline_popularity(const WindowedHistories& history) {
  const auto freq = popularity_distribution(history);
  PredictionMatrix out{Matrix(history.n_users(), history.n_genres())};
  for (std::size_t u = 0; u < history.n_users(); ++u) {
    std::copy(freq.begin(), freq.end(), out.values.row(u).begin());
  }
  return out;
}

NmfResult nmf(const Matrix& M, const NmfConfig& cfg) {
  if (cfg.rank < 1) throw UsageError("NMF rank must be at least 1");
  for (double v : M.values()) {
    if (v < 0.0) throw DataError("NMF input must be non-negative");
  }
  const std::size_t n = M.rows(), d = M.cols(), r = cfg.rank;
  NmfResult res;
  res.W = Matrix(n, r);
  res.H = Matrix(r, d);
  const double mean = M.size() ? std::accumulate(M.values().begin(), M.values().end(), 0.0) /
                                     static_cast<double>(M.size())
                               : 0.0;
  const double scale = std::sqrt(std::max(mean, 1e-12) / static_cast<double>(r));
  Rng rng(derive_seed(cfg.seed, "nmf-init"));
  for (auto& w : res.W.values()) w = scale * rng.uniform();
  for (auto& h : res.H.values()) h = scale * rng.uniform();

  Matrix wtm, wtw, wtwh, mht, hht, whht, wh;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    kernels::parallel::matmul_tn(res.W, M, wtm);
    kernels::parallel::matmul_tn(res.W, res.W, wtw);
    kernels::parallel::matmul(wtw, res.H, wtwh);
    for (std::size_t i = 0; i < res.H.size(); ++i) {
      res.H.values()[i] *= wtm.values()[i] / (wtwh.values()[i] + kNmfEps);
    }
    kernels::parallel::matmul_nt(M, res.H, mht);
    kernels::parallel::matmul_nt(res.H, res.H, hht);
    kernels::parallel::matmul(res.W, hht, whht);
    for (std::size_t i = 0; i < res.W.size(); ++i) {
      res.W.values()[i] *= mht.values()[i] / (whht.values()[i] + kNmfEps);
    }
    kernels::parallel::matmul(res.W, res.H, wh);
    res.objective.push_back(half_sq_error(M, wh));
  }
  if (res.objective.size() >= 2) {
    const double last = res.objective.back();
    const double before = res.objective[res.objective.size() - 2];
    res.converged = last <= 1e-12 || std::abs(before - last) <= cfg.tolerance * before;
  }
  return res;
}

NmfPrediction baseline_nmf(const AllocationTensor& history, const NmfConfig& cfg,
                           const std::vector<double>& popularity) {
  if (history.K() == 0) throw UsageError("history has no windows");
  Matrix mean(history.n_users(), history.n_genres());
  for (std::size_t k = 0; k < history.K(); ++k) {
    for (std::size_t u = 0; u < history.n_users(); ++u) {
      const auto row = history.row(k, u);
      auto out = mean.row(u);
      for (std::size_t g = 0; g < row.size(); ++g) out[g] += row[g];
    }
  }
  for (auto& v : mean.values()) v /= static_cast<double>(history.K());

  NmfPrediction out;
  out.factors = nmf(mean, cfg);
  kernels::parallel::matmul(out.factors.W, out.factors.H, out.prediction.values);
  normalize_rows(out.prediction.values, popularity);
  return out;
}

}  // namespace pathlets
