// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <doctest.h>

#include "pathlets/dict_learn.hpp"
#include "support.hpp"

using namespace pathlets;

namespace {

// m edges, one trajectory and one candidate that covers it.
BinaryColumns one_column(std::uint32_t m) {
  BinaryColumns b;
  b.n_rows = m;
  b.columns.emplace_back();
  for (std::uint32_t e = 0; e < m; ++e) b.columns[0].push_back(e);
  return b;
}

BinaryColumns random_columns(Rng& rng, std::size_t rows, std::size_t cols) {
  BinaryColumns b;
  b.n_rows = rows;
  b.columns.resize(cols);
  for (auto& c : b.columns) {
    for (std::uint32_t e = 0; e < rows; ++e) {
      if (rng.uniform() < 0.4) c.push_back(e);
    }
  }
  return b;
}

}  // namespace

TEST_CASE("loss examples") {
  const auto col = one_column(2);
  CHECK(loss(col, col, Matrix(1, 1, 1.0), 0.0) == 0.0);
  CHECK(loss(col, col, Matrix(1, 1, 0.0), 0.0) == 1.0);  // half of ||P||^2 = 2
  // (1 - a)^2 + 0.5 a at a = 0.75
  CHECK(loss(col, col, Matrix(1, 1, 0.75), 0.5) == doctest::Approx(0.0625 + 0.375));
  CHECK_THROWS_AS(loss(col, col, Matrix(2, 1), 0.0), UsageError);
}

TEST_CASE("fit reaches the one-dimensional optimum") {
  const auto col = one_column(2);
  LearnConfig cfg;
  cfg.lambda = 0.0;
  cfg.max_epochs = 3000;
  cfg.patience = 3000;
  auto m = fit(col, col, cfg);
  CHECK(std::abs(m.alpha(0, 0) - 1.0) < 1e-3);
  CHECK(m.final_loss() < 1e-5);

  cfg.lambda = 0.5;
  m = fit(col, col, cfg);
  CHECK(std::abs(m.alpha(0, 0) - 0.75) < 0.01);

  cfg.lambda = 20.0;
  m = fit(col, col, cfg);
  CHECK(m.alpha(0, 0) == 0.0);
}

TEST_CASE("smooth gradient") {
  const auto col = one_column(3);
  // At the lambda = 0 optimum the gradient vanishes.
  CHECK(std::abs(grad_smooth(col, col, Matrix(1, 1, 1.0))(0, 0)) < 1e-6);
  // At zero it is -D0^T P.
  Rng rng(3);
  const auto P = random_columns(rng, 6, 4), D = random_columns(rng, 6, 5);
  const auto g = grad_smooth(P, D, Matrix(5, 4));
  const auto Pd = P.to_dense(), Dd = D.to_dense();
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (std::size_t e = 0; e < 6; ++e) s += Dd(e, i) * Pd(e, j);
      CHECK(g(i, j) == -s);
    }
  }
}

TEST_CASE("smooth gradient matches central differences") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto P = random_columns(rng, 10, 10), D = random_columns(rng, 10, 10);
    Matrix alpha(10, 10);
    for (auto& a : alpha.values()) a = rng.uniform();
    const auto g = grad_smooth(P, D, alpha);
    const double h = 1e-5;
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      Matrix up = alpha, down = alpha;
      up.values()[i] += h;
      down.values()[i] -= h;
      const double fd = (loss(P, D, up, 0.0) - loss(P, D, down, 0.0)) / (2 * h);
      err += (fd - g.values()[i]) * (fd - g.values()[i]);
      norm += g.values()[i] * g.values()[i];
    }
    CHECK(std::sqrt(err) / std::max(std::sqrt(norm), 1e-12) < 1e-5);
  }
}

TEST_CASE("fit invariants on a random instance") {
  Rng rng(21);
  const auto P = random_columns(rng, 15, 30), D = random_columns(rng, 15, 20);
  LearnConfig cfg;
  cfg.lambda = 0.05;
  cfg.max_epochs = 80;
  bool in_box = true;
  std::size_t epochs = 0;
  const auto m = fit(P, D, cfg, [&](std::size_t, const Matrix& a, double) {
    ++epochs;
    for (double v : a.values()) in_box &= v >= 0.0 && v <= 1.0;
  });
  CHECK(in_box);
  CHECK(epochs == m.loss_history.size());
  CHECK(m.final_loss() <= m.initial_loss);
  const auto again = fit(P, D, cfg);
  CHECK(again.alpha == m.alpha);
  CHECK(again.loss_history == m.loss_history);
}

TEST_CASE("learning config validation") {
  LearnConfig cfg;
  cfg.lambda = -1;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.top_n = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("top-n selection") {
  Matrix alpha(3, 1);
  alpha(0, 0) = 0.9;
  alpha(1, 0) = 0.1;
  alpha(2, 0) = 0.5;
  const std::vector<Pathlet> c{{{0, 1}, 1}, {{1, 2}, 1}, {{2, 3}, 1}};
  auto d = select_topn(alpha, c, 2);
  REQUIRE(d.size() == 2);
  CHECK(d.pathlets[0] == c[0]);
  CHECK(d.pathlets[1] == c[2]);
  CHECK(d.influence == std::vector<double>{0.9, 0.5});

  d = select_topn(alpha, c, 10);
  CHECK(d.size() == 3);

  const std::vector<Pathlet> ties{{{0, 1, 2}, 4}, {{5, 5}, 4}, {{0, 1}, 9}};
  d = select_topn(Matrix(3, 2), ties, 3);
  CHECK(d.pathlets[0] == ties[2]);
  CHECK(d.pathlets[1] == ties[1]);
  CHECK(d.pathlets[2] == ties[0]);
}

TEST_CASE("dictionary metrics") {
  const std::vector<RankSeq> corpus{{0, 1, 2}, {3, 4}};
  PathletDictionary verbatim{{{{0, 1, 2}, 1}, {{3, 4}, 1}}, {1.0, 1.0}};
  auto m = dict_metrics(verbatim, corpus);
  CHECK(m.cover_ratio == 1.0);
  CHECK(m.mean_pathlets_per_trajectory == 1.0);
  CHECK(m.code_sparsity == 0.5);

  PathletDictionary unrelated{{{{7, 8}, 1}}, {1.0}};
  CHECK(dict_metrics(unrelated, corpus).cover_ratio == 0.0);

  PathletDictionary partial{{{{0, 1}, 1}}, {1.0}};
  CHECK(dict_metrics(partial, {{0, 1, 2}}).cover_ratio == 0.5);

  CHECK_THROWS_AS(dict_metrics(partial, {{0}}), DataError);
}

TEST_CASE("self dictionary reconstructs the corpus") {
  Rng rng(31);
  const auto corpus = pathlets::testing::random_corpus(rng, 30, 8, 6, 2);
  const auto g = induce_graph(corpus);
  std::vector<Pathlet> self;
  for (const auto& t : corpus) self.push_back({t, 1});
  const auto enc = encode(corpus, self, g);
  LearnConfig cfg;
  cfg.lambda = 0.0;
  cfg.max_epochs = 2000;
  cfg.patience = 2000;
  const auto m = fit(enc.paths, enc.candidates, cfg);
  CHECK(m.final_loss() < 1e-4 * static_cast<double>(enc.paths.nnz()));
}
