// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include <numeric>
#include <set>

#include <doctest.h>

#include "pathlets/dict_learn.hpp"
#include "pathlets/pipeline.hpp"
#include "pathlets/predict.hpp"
#include "support.hpp"

using namespace pathlets;
using pathlets::testing::make_histories;

namespace {

// Window 0 splits between genres 0 and 2; window 1 is 80/20 over 0 and 1.
AllocationTensor example_history() {
  return allocation(make_histories({"a", "b", "c"}, {{{2, 0}, {0, 0, 0, 0, 1}}}));
}

}  // namespace

TEST_CASE("previous copies the last window") {
  const auto X = example_history();
  const auto p = baseline_previous(X);
  CHECK(p.values(0, 0) == doctest::Approx(0.8));
  CHECK(p.values(0, 1) == doctest::Approx(0.2));
  CHECK(p.values(0, 2) == 0.0);
}

TEST_CASE("plug-previous restores the historical mean and renormalizes") {
  const auto X = example_history();
  CHECK(historical_mean(X, 0, 2) == 0.5);
  const std::vector<PairFeatures> app{{{0, 2, CandidateKind::kAppearance}, {}}};
  const auto res = plug_previous(X, ConstantClassifier(1.0), ConstantClassifier(0.0), app, {},
                                 {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(res.appearance_edits == 1);
  CHECK(res.prediction.values(0, 0) == doctest::Approx(0.8 / 1.5));
  CHECK(res.prediction.values(0, 1) == doctest::Approx(0.2 / 1.5));
  CHECK(res.prediction.values(0, 2) == doctest::Approx(0.5 / 1.5));
}

TEST_CASE("plug-previous falls back to popularity when a row empties") {
  const auto X = example_history();
  const std::vector<PairFeatures> dis{{{0, 0, CandidateKind::kDisappearance}, {}},
                                      {{0, 1, CandidateKind::kDisappearance}, {}}};
  const std::vector<double> pop{0.2, 0.3, 0.5};
  const auto res = plug_previous(X, ConstantClassifier(0.0), ConstantClassifier(0.9), {}, dis, pop);
  CHECK(res.popularity_fallbacks == 1);
  CHECK(res.prediction.values(0, 2) == 0.5);
  CHECK(res.disappearance_scores == std::vector<double>{0.9, 0.9});
}

namespace {

WindowedHistories listening(std::uint64_t seed) {
  ListeningSpec spec;
  spec.n_users = 80;
  spec.n_genres = 12;
  spec.seed = seed;
  return slice_windows(generate_listening(spec), spec.windows());
}

std::vector<PairFeatures> unfeatured(const std::vector<CandidatePair>& pairs) {
  std::vector<PairFeatures> out;
  for (const auto& p : pairs) out.push_back({p, {}});
  return out;
}

}  // namespace

TEST_CASE("never-firing classifiers reproduce previous exactly") {
  const auto h = listening(1);
  const auto X = allocation(h);
  const auto history = X.truncated(X.K() - 1);
  const auto sets = candidate_sets(X);
  const auto res = plug_previous(history, ConstantClassifier(0.0), ConstantClassifier(0.0),
                                 unfeatured(sets.appearance), unfeatured(sets.disappearance),
                                 popularity_distribution(h));
  CHECK(res.prediction.values == baseline_previous(history).values);
  CHECK(res.appearance_edits + res.disappearance_edits == 0);
}

TEST_CASE("plug-previous edits only candidate pairs and keeps rows stochastic") {
  for (std::uint64_t seed : {2, 3, 4}) {
    const auto h = listening(seed);
    const auto X = allocation(h);
    const auto history = X.truncated(X.K() - 1);
    const auto sets = candidate_sets(X);
    const auto prev = baseline_previous(history).values;
    const auto res = plug_previous(history, ConstantClassifier(1.0), ConstantClassifier(0.0),
                                   unfeatured(sets.appearance), {}, popularity_distribution(h));
    std::set<std::pair<std::uint32_t, std::uint32_t>> plus;
    for (const auto& p : sets.appearance) plus.insert({p.user, p.genre});
    const auto& y = res.prediction.values;
    for (std::size_t u = 0; u < y.rows(); ++u) {
      const auto row = y.row(u);
      const double total = std::accumulate(row.begin(), row.end(), 0.0);
      if (total > 0.0) CHECK(total == doctest::Approx(1.0));
      for (std::size_t g = 0; g < y.cols(); ++g) {
        const bool candidate = plus.count({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(g)});
        if (!candidate && !history.row_empty(history.K() - 1, u)) {
          CHECK((y(u, g) == 0.0) == (prev(u, g) == 0.0));
        }
        if (candidate) CHECK(y(u, g) > 0.0);
      }
    }
  }
}

TEST_CASE("popularity baseline") {
  const auto h = make_histories({"a", "b"}, {{{0, 0}, {0, 1}}, {{}, {0}}});
  const auto pop = popularity_distribution(h);
  CHECK(pop == std::vector<double>{0.8, 0.2});
  const auto p = baseline_popularity(h);
  CHECK(p.values(1, 0) == 0.8);
}

TEST_CASE("nmf reduces its objective and recovers a low-rank matrix") {
  Rng rng(5);
  Matrix W(20, 2), H(2, 8);
  for (auto& v : W.values()) v = rng.uniform();
  for (auto& v : H.values()) v = rng.uniform();
  Matrix M(20, 8);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 8; ++j) M(i, j) = W(i, 0) * H(0, j) + W(i, 1) * H(1, j);
  NmfConfig cfg;
  cfg.rank = 2;
  cfg.iterations = 2000;
  const auto r = nmf(M, cfg);
  for (std::size_t i = 1; i < r.objective.size(); ++i) {
    CHECK(r.objective[i] <= r.objective[i - 1] * (1 + 1e-9) + 1e-15);
  }
  CHECK(r.objective.back() < 1e-4);
  for (double v : r.W.values()) CHECK(v >= 0.0);
  CHECK(nmf(M, cfg).W == r.W);
  M(0, 0) = -1;
  CHECK_THROWS_AS(nmf(M, cfg), DataError);
}

TEST_CASE("rank-one nmf is exact on a rank-one matrix") {
  Matrix M(6, 4);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) M(i, j) = (1.0 + i) * (0.5 + j);
  NmfConfig cfg;
  cfg.rank = 1;
  cfg.iterations = 500;
  const auto r = nmf(M, cfg);
  CHECK(r.objective.back() < 1e-12);
  CHECK(r.converged);
}

TEST_CASE("nmf prediction rows are distributions") {
  const auto h = listening(6);
  const auto X = allocation(h).truncated(h.K - 1);
  NmfConfig cfg;
  cfg.iterations = 50;
  const auto p = baseline_nmf(X, cfg, popularity_distribution(h)).prediction.values;
  for (std::size_t u = 0; u < p.rows(); ++u) {
    const auto row = p.row(u);
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("pair features never read the target window") {
  const auto h = listening(7);
  auto blanked = h;
  for (auto& s : blanked.sequences) s.back().clear();
  PathletDictionary dict;
  for (RankSeq r : {RankSeq{0, 0}, RankSeq{0, 1}, RankSeq{1, 0}, RankSeq{1, 2, 0}}) {
    dict.pathlets.push_back({r, 1});
    dict.influence.push_back(1.0);
  }
  const auto a = pair_features(h, dict, 5, 11);
  const auto b = pair_features(blanked, dict, 5, 11);
  CHECK(a.pairs == b.pairs);
  CHECK(a.features == b.features);
  CHECK(!a.pairs.empty());
}

TEST_CASE("labels follow the candidate kind") {
  const auto X = example_history();
  CHECK(label_for({0, 1, CandidateKind::kAppearance}, X) == 1);
  CHECK(label_for({0, 2, CandidateKind::kAppearance}, X) == 0);
  CHECK(label_for({0, 2, CandidateKind::kDisappearance}, X) == 1);
  CHECK(label_for({0, 0, CandidateKind::kDisappearance}, X) == 0);
}
