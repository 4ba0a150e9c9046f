// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "pathlets/rng.hpp"

namespace pathlets::kernels {

Incidence Incidence::from(const BinaryColumns& m) {
  Incidence inc;
  inc.n_rows = m.n_rows;
  inc.n_cols = m.n_cols();
  inc.col_ptr.assign(inc.n_cols + 1, 0);
  for (std::size_t j = 0; j < inc.n_cols; ++j) {
    inc.col_ptr[j + 1] = inc.col_ptr[j] + static_cast<std::uint32_t>(m.columns[j].size());
  }
  inc.col_rows.reserve(inc.col_ptr.back());
  std::vector<std::uint32_t> row_count(inc.n_rows, 0);
  for (const auto& col : m.columns) {
    for (auto r : col) {
      if (r >= inc.n_rows) throw UsageError("incidence row out of range");
      inc.col_rows.push_back(r);
      ++row_count[r];
    }
  }
  inc.row_ptr.assign(inc.n_rows + 1, 0);
  for (std::size_t r = 0; r < inc.n_rows; ++r) inc.row_ptr[r + 1] = inc.row_ptr[r] + row_count[r];
  inc.row_cols.resize(inc.row_ptr.back());
  std::vector<std::uint32_t> fill(inc.row_ptr.begin(), inc.row_ptr.end() - 1);
  for (std::size_t j = 0; j < inc.n_cols; ++j) {
    for (auto r : m.columns[j]) inc.row_cols[fill[r]++] = static_cast<std::uint32_t>(j);
  }
  return inc;
}

std::size_t SeqHash::operator()(const RankSeq& s) const noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL ^ s.size();
  for (auto r : s) h = splitmix64(h ^ r);
  return static_cast<std::size_t>(h);
}

namespace {

void residual_row(const Incidence& d0, const Incidence& p, const Matrix& alpha,
                  Matrix& r, std::size_t e) {
  auto out = r.row(e);
  std::fill(out.begin(), out.end(), 0.0);
  for (auto i : d0.cols_of(e)) {
    const auto a = alpha.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += a[j];
  }
  for (auto j : p.cols_of(e)) out[j] -= 1.0;
}

void backproject_row(const Incidence& d0, const Matrix& r, std::span<double> out,
                     std::size_t i) {
  std::fill(out.begin(), out.end(), 0.0);
  for (auto e : d0.rows_of(i)) {
    const auto re = r.row(e);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += re[j];
  }
}

void adam_row(const Incidence& d0, const Matrix& r, double lambda, double lr,
              AdamState& s, Matrix& alpha, std::size_t i, std::span<double> grad) {
  backproject_row(d0, r, grad, i);
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto a = alpha.row(i);
  auto m = s.m.row(i);
  auto v = s.v.row(i);
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double g = grad[j] + lambda;
    m[j] = s.beta1 * m[j] + (1.0 - s.beta1) * g;
    v[j] = s.beta2 * v[j] + (1.0 - s.beta2) * g * g;
    const double step = lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + s.eps);
    a[j] = std::clamp(a[j] - step, 0.0, 1.0);
  }
}

void prepare_adam(AdamState& s, const Matrix& alpha) {
  if (s.m.rows() != alpha.rows() || s.m.cols() != alpha.cols()) {
    s.m = Matrix(alpha.rows(), alpha.cols());
    s.v = Matrix(alpha.rows(), alpha.cols());
    s.step = 0;
  }
  ++s.step;
}

double row_sq(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double row_sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

void add_subsequences(const RankSeq& t, std::size_t max_nodes, SubsequenceCounts& out) {
  for (std::size_t s = 0; s + 1 < t.size(); ++s) {
    const std::size_t longest = std::min(max_nodes, t.size() - s);
    for (std::size_t len = 2; len <= longest; ++len) {
      ++out[RankSeq(t.begin() + static_cast<std::ptrdiff_t>(s),
                    t.begin() + static_cast<std::ptrdiff_t>(s + len))];
    }
  }
}

void check_mul(std::size_t inner_a, std::size_t inner_b) {
  if (inner_a != inner_b) throw UsageError("matrix product shape mismatch");
}

void mul_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto out = c.row(i);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    const auto bk = b.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aik * bk[j];
  }
}

void mul_tn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto out = c.row(i);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double aki = a(k, i);
    if (aki == 0.0) continue;
    const auto bk = b.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aki * bk[j];
  }
}

void mul_nt_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  const auto ai = a.row(i);
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const auto bj = b.row(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < ai.size(); ++k) acc += ai[k] * bj[k];
    c(i, j) = acc;
  }
}

void ensure(Matrix& m, std::size_t rows, std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols) m = Matrix(rows, cols);
}

}  // namespace

namespace serial {

void residual(const Incidence& d0, const Incidence& p, const Matrix& alpha, Matrix& r) {
  ensure(r, d0.n_rows, alpha.cols());
  for (std::size_t e = 0; e < d0.n_rows; ++e) residual_row(d0, p, alpha, r, e);
}

void backproject(const Incidence& d0, const Matrix& r, Matrix& g) {
  ensure(g, d0.n_cols, r.cols());
  for (std::size_t i = 0; i < d0.n_cols; ++i) backproject_row(d0, r, g.row(i), i);
}

double objective(const Matrix& r, const Matrix& alpha, double lambda) {
  double fit = 0.0;
  for (std::size_t e = 0; e < r.rows(); ++e) fit += row_sq(r.row(e));
  double mass = 0.0;
  for (std::size_t i = 0; i < alpha.rows(); ++i) mass += row_sum(alpha.row(i));
  return 0.5 * fit + lambda * mass;
}

void adam_step(const Incidence& d0, const Matrix& r, double lambda, double lr,
               AdamState& state, Matrix& alpha) {
  prepare_adam(state, alpha);
  std::vector<double> grad(alpha.cols());
  for (std::size_t i = 0; i < alpha.rows(); ++i) {
    adam_row(d0, r, lambda, lr, state, alpha, i, grad);
  }
}

SubsequenceCounts count_subsequences(const std::vector<RankSeq>& trajectories,
                                     std::size_t max_nodes) {
  SubsequenceCounts counts;
  for (const auto& t : trajectories) add_subsequences(t, max_nodes, counts);
  return counts;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mul(a.cols(), b.rows());
  ensure(c, a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) mul_row(a, b, c, i);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mul(a.rows(), b.rows());
  ensure(c, a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) mul_tn_row(a, b, c, i);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mul(a.cols(), b.cols());
  ensure(c, a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) mul_nt_row(a, b, c, i);
}

}  // namespace serial

namespace parallel {

void residual(const Incidence& d0, const Incidence& p, const Matrix& alpha, Matrix& r) {
  ensure(r, d0.n_rows, alpha.cols());
  const auto n = static_cast<std::ptrdiff_t>(d0.n_rows);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t e = 0; e < n; ++e) {
    residual_row(d0, p, alpha, r, static_cast<std::size_t>(e));
  }
}

void backproject(const Incidence& d0, const Matrix& r, Matrix& g) {
  ensure(g, d0.n_cols, r.cols());
  const auto n = static_cast<std::ptrdiff_t>(d0.n_cols);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    backproject_row(d0, r, g.row(static_cast<std::size_t>(i)), static_cast<std::size_t>(i));
  }
}

double objective(const Matrix& r, const Matrix& alpha, double lambda) {
  // Per-row partials summed serially reproduce the serial reduction order.
  std::vector<double> fit(r.rows()), mass(alpha.rows());
  const auto nr = static_cast<std::ptrdiff_t>(r.rows());
  const auto na = static_cast<std::ptrdiff_t>(alpha.rows());
#pragma omp parallel
  {
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t e = 0; e < nr; ++e) {
      fit[static_cast<std::size_t>(e)] = row_sq(r.row(static_cast<std::size_t>(e)));
    }
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < na; ++i) {
      mass[static_cast<std::size_t>(i)] = row_sum(alpha.row(static_cast<std::size_t>(i)));
    }
  }
  double f = 0.0, m = 0.0;
  for (double x : fit) f += x;
  for (double x : mass) m += x;
  return 0.5 * f + lambda * m;
}

void adam_step(const Incidence& d0, const Matrix& r, double lambda, double lr,
               AdamState& state, Matrix& alpha) {
  prepare_adam(state, alpha);
  const auto n = static_cast<std::ptrdiff_t>(alpha.rows());
#pragma omp parallel
  {
    std::vector<double> grad(alpha.cols());
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      adam_row(d0, r, lambda, lr, state, alpha, static_cast<std::size_t>(i), grad);
    }
  }
}

SubsequenceCounts count_subsequences(const std::vector<RankSeq>& trajectories,
                                     std::size_t max_nodes) {
  SubsequenceCounts counts;
  const auto n = static_cast<std::ptrdiff_t>(trajectories.size());
#pragma omp parallel
  {
    SubsequenceCounts local;
#pragma omp for schedule(dynamic, 64) nowait
    for (std::ptrdiff_t t = 0; t < n; ++t) {
      add_subsequences(trajectories[static_cast<std::size_t>(t)], max_nodes, local);
    }
#pragma omp critical(pathlets_count_merge)
    {
      if (counts.empty()) {
        counts.swap(local);
      } else {
        for (auto& [seq, c] : local) counts[seq] += c;
      }
    }
  }
  return counts;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mul(a.cols(), b.rows());
  ensure(c, a.rows(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) mul_row(a, b, c, static_cast<std::size_t>(i));
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mul(a.rows(), b.rows());
  ensure(c, a.cols(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) mul_tn_row(a, b, c, static_cast<std::size_t>(i));
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mul(a.cols(), b.cols());
  ensure(c, a.rows(), b.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) mul_nt_row(a, b, c, static_cast<std::size_t>(i));
}

}  // namespace parallel

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace pathlets::kernels
