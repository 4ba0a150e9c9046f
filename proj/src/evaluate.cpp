// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace pathlets {

namespace {

std::vector<std::size_t> all_rows(std::span<const std::size_t> rows, std::size_t n) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

void check_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw UsageError("matrices must have matching shapes");
  }
}

bool row_is_zero(std::span<const double> row) {
  return std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; });
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

double atv(const Matrix& Y, const Matrix& Y_hat, std::span<const std::size_t> rows) {
  check_same_shape(Y, Y_hat);
  const auto users = all_rows(rows, Y.rows());
  if (users.empty()) throw DataError("ATV needs at least one user");
  double acc = 0.0;
  for (auto u : users) {
    double tv = 0.0;
    for (std::size_t g = 0; g < Y.cols(); ++g) tv += std::abs(Y(u, g) - Y_hat(u, g));
    acc += 0.5 * tv;
  }
  return acc / static_cast<double>(users.size());
}

std::optional<double> auc(std::span<const double> scores,
                          std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw UsageError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (auto l : labels) n_pos += l != 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney: tied scores share their average (half-integer) rank.
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u_stat = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u_stat / (np * static_cast<double>(n_neg));
}

std::optional<double> plus_minus_eval(const Matrix& Y, const Matrix& Y_hat,
                                      const Matrix& X_prev, std::span<const std::size_t> rows) {
  check_same_shape(Y, Y_hat);
  check_same_shape(Y, X_prev);
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (auto u : all_rows(rows, Y.rows())) {
    for (std::size_t g = 0; g < Y.cols(); ++g) {
      if (Y(u, g) == X_prev(u, g)) continue;
      scores.push_back(Y_hat(u, g) - X_prev(u, g));
      labels.push_back(Y(u, g) > X_prev(u, g));
    }
  }
  return auc(scores, labels);
}

std::optional<double> new_classes_eval(const Matrix& Y, const Matrix& Y_hat,
                                       const std::vector<CandidatePair>& appearance,
                                       std::span<const std::size_t> rows) {
  check_same_shape(Y, Y_hat);
  std::vector<bool> keep(Y.rows(), rows.empty());
  for (auto u : rows) keep[u] = true;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& p : appearance) {
    if (!keep[p.user]) continue;
    scores.push_back(Y_hat(p.user, p.genre));
    labels.push_back(Y(p.user, p.genre) > 0.0);
  }
  return auc(scores, labels);
}

Matrix window_matrix(const AllocationTensor& X, std::size_t k) {
  Matrix m(X.n_users(), X.n_genres());
  for (std::size_t u = 0; u < X.n_users(); ++u) {
    const auto row = X.row(k, u);
    std::copy(row.begin(), row.end(), m.row(u).begin());
  }
  return m;
}

nlohmann::json MetricsReport::to_json() const {
  return {{"model", model},
          {"atv", atv},
          {"plus_minus_auc", optional_json(plus_minus_auc)},
          {"new_classes_auc", optional_json(new_classes_auc)},
          {"n_users_evaluated", n_users_evaluated},
          {"excluded_users", excluded_users},
          {"shifted", shifted}};
}

MetricsReport evaluate_prediction(const std::string& model, const AllocationTensor& X,
                                  const PredictionMatrix& prediction, bool shift) {
  if (X.K() < 2) throw UsageError("evaluation needs at least two windows");
  if (shift && X.K() < 3) throw UsageError("shifted evaluation needs at least three windows");
  const std::size_t K = X.K();
  const Matrix Y = window_matrix(X, K - 1);
  const Matrix prev = window_matrix(X, K - 2);
  const Matrix& Y_hat = prediction.values;
  check_same_shape(Y, Y_hat);

  MetricsReport rep;
  rep.model = model;
  rep.shifted = shift;
  std::vector<std::size_t> rows;
  for (std::size_t u = 0; u < X.n_users(); ++u) {
    if (row_is_zero(Y.row(u)) || row_is_zero(prev.row(u)) || row_is_zero(Y_hat.row(u))) {
      ++rep.excluded_users;
    } else {
      rows.push_back(u);
    }
  }
  rep.n_users_evaluated = rows.size();
  rep.atv = atv(Y, Y_hat, rows);

  const auto appearance = candidate_sets(X).appearance;
  const Matrix scored = shift ? window_matrix(X, K - 3) : Y_hat;
  rep.plus_minus_auc = plus_minus_eval(Y, scored, prev, rows);
  rep.new_classes_auc = new_classes_eval(Y, scored, appearance, rows);
  return rep;
}

VariationReport variation_decomposition(const AllocationTensor& X) {
  if (X.K() < 2) throw UsageError("variation decomposition needs at least two windows");
  VariationReport rep;
  for (std::size_t k = 0; k + 1 < X.K(); ++k) {
    for (std::size_t u = 0; u < X.n_users(); ++u) {
      if (X.row_empty(k, u) || X.row_empty(k + 1, u)) continue;
      const auto a = X.row(k, u);
      const auto b = X.row(k + 1, u);
      VariationRecord r{k, u};
      for (std::size_t g = 0; g < a.size(); ++g) {
        const double d = 0.5 * std::abs(b[g] - a[g]);
        if (d == 0.0) continue;
        if (a[g] == 0.0) {
          r.appearance += d;
        } else if (b[g] == 0.0) {
          r.disappearance += d;
        } else {
          r.persistence += d;
        }
      }
      r.tv = r.appearance + r.disappearance + r.persistence;
      if (r.tv <= 0.0) continue;
      r.appearance /= r.tv;
      r.disappearance /= r.tv;
      r.persistence /= r.tv;
      rep.records.push_back(r);
    }
  }

  auto summarize = [](std::vector<VariationSummary>& out, std::size_t key,
                      const VariationRecord& r) {
    if (out.size() <= key) out.resize(key + 1);
    auto& s = out[key];
    s.window = key;
    ++s.n_users;
    s.mean_tv += r.tv;
    s.appearance += r.appearance;
    s.disappearance += r.disappearance;
    s.persistence += r.persistence;
  };
  rep.per_window.resize(X.K() - 1);
  rep.per_decile.resize(10);
  for (const auto& r : rep.records) {
    summarize(rep.per_window, r.window, r);
    summarize(rep.per_decile, std::min<std::size_t>(9, static_cast<std::size_t>(r.tv * 10.0)), r);
  }
  for (std::size_t k = 0; k < rep.per_window.size(); ++k) rep.per_window[k].window = k;
  for (std::size_t d = 0; d < rep.per_decile.size(); ++d) {
    rep.per_decile[d].window = d;
    rep.per_decile[d].tv_low = 0.1 * static_cast<double>(d);
    rep.per_decile[d].tv_high = 0.1 * static_cast<double>(d + 1);
  }
  for (auto* group : {&rep.per_window, &rep.per_decile}) {
    for (auto& s : *group) {
      if (s.n_users == 0) continue;
      const double n = static_cast<double>(s.n_users);
      s.mean_tv /= n;
      s.appearance /= n;
      s.disappearance /= n;
      s.persistence /= n;
    }
  }
  return rep;
}

std::vector<double> pathlet_correlation(const Matrix& features,
                                        std::span<const std::uint8_t> labels) {
  if (features.rows() != labels.size()) throw UsageError("feature rows must match labels");
  const std::size_t n = features.rows(), d = features.cols();
  std::vector<double> corr(d, 0.0);
  if (n < 2) return corr;
  double ly = 0.0;
  for (auto l : labels) ly += l ? 1.0 : 0.0;
  const double mean_y = ly / static_cast<double>(n);
  double var_y = 0.0;
  for (auto l : labels) var_y += ((l ? 1.0 : 0.0) - mean_y) * ((l ? 1.0 : 0.0) - mean_y);
  if (var_y <= 0.0) return corr;
  const auto dd = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t fi = 0; fi < dd; ++fi) {
    const auto f = static_cast<std::size_t>(fi);
    double mean_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_x += features(i, f);
    mean_x /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = features(i, f) - mean_x;
      sxx += dx * dx;
      sxy += dx * ((labels[i] ? 1.0 : 0.0) - mean_y);
    }
    corr[f] = sxx > 0.0 ? std::clamp(sxy / std::sqrt(sxx * var_y), -1.0, 1.0) : 0.0;
  }
  return corr;
}

std::vector<PathletProfile> pathlet_profile(const PathletDictionary& dictionary) {
  if (dictionary.empty()) throw DataError("dictionary is empty");
  std::vector<PathletProfile> out;
  out.reserve(dictionary.size());
  for (const auto& p : dictionary.pathlets) {
    PathletProfile prof;
    const auto& r = p.ranks;
    if (r.empty()) {
      out.push_back(prof);
      continue;
    }
    prof.inertial = std::find(r.begin(), r.end(), Rank{0}) != r.end();
    prof.mean_rank = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    prof.diversity = static_cast<double>(std::set<Rank>(r.begin(), r.end()).size()) /
                     static_cast<double>(r.size());
    out.push_back(prof);
  }
  return out;
}

void GenreGraph::write_dot(std::ostream& out, const std::vector<std::string>& genres,
                           const std::string& name) const {
  auto quoted = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') q += '\\';
      q += c;
    }
    return q + "\"";
  };
  out << "digraph " << quoted(name) << " {\n";
  for (const auto& e : edges) {
    out << "  " << quoted(genres.at(e.from)) << " -> " << quoted(genres.at(e.to))
        << " [weight=" << e.weight << ", penwidth=" << e.weight << "];\n";
  }
  out << "}\n";
}

nlohmann::json GenreGraph::to_json(const std::vector<std::string>& genres) const {
  auto arr = nlohmann::json::array();
  for (const auto& e : edges) {
    arr.push_back({{"from", genres.at(e.from)}, {"to", genres.at(e.to)}, {"weight", e.weight}});
  }
  return arr;
}

GenreGraph extended_pathlet_graph(const PathletDictionary& dictionary,
                                  const std::vector<PairEmbedding>& embeddings,
                                  std::span<const double> correlations, std::uint32_t genre) {
  if (correlations.size() != dictionary.size()) {
    throw UsageError("one correlation per dictionary pathlet expected");
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> weights;
  for (const auto& pe : embeddings) {
    if (pe.pair.genre != genre) continue;
    if (pe.coords.size() != dictionary.size()) throw UsageError("embedding dimension mismatch");
    for (std::size_t i = 0; i < dictionary.size(); ++i) {
      const double w = pe.coords[i] * std::max(0.0, correlations[i]);
      if (w <= 0.0) continue;
      const auto& ranks = dictionary.pathlets[i].ranks;
      for (std::size_t j = 0; j + 1 < ranks.size(); ++j) {
        if (ranks[j] >= pe.rank_map.size() || ranks[j + 1] >= pe.rank_map.size()) continue;
        weights[{pe.rank_map.genre_of(ranks[j]), pe.rank_map.genre_of(ranks[j + 1])}] += w;
      }
    }
  }
  GenreGraph g;
  for (const auto& [edge, w] : weights) g.edges.push_back({edge.first, edge.second, w});
  std::stable_sort(g.edges.begin(), g.edges.end(),
                   [](const GenreEdge& a, const GenreEdge& b) { return a.weight > b.weight; });
  return g;
}

std::vector<GenreDiversity> diversity_by_genre(const PathletDictionary& dictionary,
                                               const std::vector<PairEmbedding>& embeddings,
                                               std::span<const double> correlations,
                                               const std::vector<double>& popularity) {
  const auto profiles = pathlet_profile(dictionary);
  std::map<std::uint32_t, GenreDiversity> by_genre;
  for (const auto& pe : embeddings) {
    auto& gd = by_genre[pe.pair.genre];
    gd.genre = pe.pair.genre;
    gd.popularity = pe.pair.genre < popularity.size() ? popularity[pe.pair.genre] : 0.0;
    for (std::size_t i = 0; i < dictionary.size(); ++i) {
      if (correlations[i] <= 0.0 || pe.coords[i] <= 0.0) continue;
      gd.diversity += pe.coords[i] * profiles[i].diversity;
      gd.weight += pe.coords[i];
    }
  }
  std::vector<GenreDiversity> out;
  for (auto& [g, gd] : by_genre) {
    if (gd.weight > 0.0) gd.diversity /= gd.weight;
    out.push_back(gd);
  }
  std::stable_sort(out.begin(), out.end(), [](const GenreDiversity& a, const GenreDiversity& b) {
    return a.popularity > b.popularity;
  });
  return out;
}

}  // namespace pathlets
