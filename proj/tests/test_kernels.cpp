// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "pathlets/kernels.hpp"
#include "support.hpp"

using namespace pathlets;

namespace {

struct Instance {
  BinaryColumns paths, candidates;
  Matrix alpha;
};

Instance random_instance(Rng& rng, std::size_t edges, std::size_t n_paths, std::size_t n_cands) {
  Instance in;
  auto fill = [&](BinaryColumns& m, std::size_t cols) {
    m.n_rows = edges;
    m.columns.resize(cols);
    for (auto& c : m.columns) {
      for (std::uint32_t e = 0; e < edges; ++e) {
        if (rng.uniform() < 0.3) c.push_back(e);
      }
    }
  };
  fill(in.paths, n_paths);
  fill(in.candidates, n_cands);
  in.alpha = Matrix(n_cands, n_paths);
  for (auto& a : in.alpha.values()) a = rng.uniform();
  return in;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = rng.uniform();
  return m;
}

}  // namespace

TEST_CASE("incidence layouts agree") {
  Rng rng(1);
  const auto in = random_instance(rng, 9, 4, 6);
  const auto inc = kernels::Incidence::from(in.candidates);
  std::size_t nnz = 0;
  for (std::size_t c = 0; c < inc.n_cols; ++c) {
    for (auto r : inc.rows_of(c)) {
      const auto cols = inc.cols_of(r);
      CHECK(std::find(cols.begin(), cols.end(), c) != cols.end());
      ++nnz;
    }
  }
  CHECK(nnz == in.candidates.nnz());
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  Rng rng(99);
  for (int threads : {1, 2, 4}) {
    kernels::set_threads(threads);
    const auto in = random_instance(rng, 30, 25, 40);
    const auto d0 = kernels::Incidence::from(in.candidates);
    const auto p = kernels::Incidence::from(in.paths);
    Matrix rs, rp, gs, gp;
    kernels::serial::residual(d0, p, in.alpha, rs);
    kernels::parallel::residual(d0, p, in.alpha, rp);
    CHECK(rs == rp);
    kernels::serial::backproject(d0, rs, gs);
    kernels::parallel::backproject(d0, rp, gp);
    CHECK(gs == gp);
    CHECK(kernels::serial::objective(rs, in.alpha, 0.3) ==
          kernels::parallel::objective(rp, in.alpha, 0.3));

    kernels::AdamState as, ap;
    Matrix aa = in.alpha, ab = in.alpha;
    for (int step = 0; step < 5; ++step) {
      kernels::serial::residual(d0, p, aa, rs);
      kernels::parallel::residual(d0, p, ab, rp);
      kernels::serial::adam_step(d0, rs, 0.1, 0.01, as, aa);
      kernels::parallel::adam_step(d0, rp, 0.1, 0.01, ap, ab);
    }
    CHECK(aa == ab);

    const auto corpus = pathlets::testing::random_corpus(rng, 200, 15, 6);
    CHECK(kernels::serial::count_subsequences(corpus, 6) ==
          kernels::parallel::count_subsequences(corpus, 6));

    const auto a = random_matrix(rng, 17, 9), b = random_matrix(rng, 9, 13);
    Matrix cs, cp;
    kernels::serial::matmul(a, b, cs);
    kernels::parallel::matmul(a, b, cp);
    CHECK(cs == cp);
    const auto at = random_matrix(rng, 9, 17);
    kernels::serial::matmul_tn(at, b, cs);
    kernels::parallel::matmul_tn(at, b, cp);
    CHECK(cs == cp);
    const auto bt = random_matrix(rng, 13, 9);
    kernels::serial::matmul_nt(a, bt, cs);
    kernels::parallel::matmul_nt(a, bt, cp);
    CHECK(cs == cp);
  }
  kernels::set_threads(1);
}

TEST_CASE("matmul matches the textbook triple loop") {
  Rng rng(4);
  const auto a = random_matrix(rng, 5, 3), b = random_matrix(rng, 3, 4);
  Matrix c;
  kernels::serial::matmul(a, b, c);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      CHECK(c(i, j) == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("adam steps stay inside the unit box") {
  Rng rng(8);
  const auto in = random_instance(rng, 12, 10, 15);
  const auto d0 = kernels::Incidence::from(in.candidates);
  const auto p = kernels::Incidence::from(in.paths);
  kernels::AdamState st;
  Matrix alpha = in.alpha, r;
  for (int step = 0; step < 50; ++step) {
    kernels::serial::residual(d0, p, alpha, r);
    kernels::serial::adam_step(d0, r, 0.05, 0.2, st, alpha);
    for (double a : alpha.values()) CHECK((a >= 0.0 && a <= 1.0));
  }
}
