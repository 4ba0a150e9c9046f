// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Hot loops of the solver, the miner and the NMF baseline. Each kernel has a
// serial reference and an OpenMP version; both evaluate every output entry
// with the same operation order, so they agree bit for bit at any thread
// count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "pathlets/common.hpp"
#include "pathlets/pathlet_graph.hpp"

namespace pathlets::kernels {

/// Binary incidence in both compressed layouts.
struct Incidence {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::uint32_t> col_ptr, col_rows;  // CSC
  std::vector<std::uint32_t> row_ptr, row_cols;  // CSR

  static Incidence from(const BinaryColumns& m);
  std::span<const std::uint32_t> rows_of(std::size_t col) const {
    return {col_rows.data() + col_ptr[col], col_ptr[col + 1] - col_ptr[col]};
  }
  std::span<const std::uint32_t> cols_of(std::size_t row) const {
    return {row_cols.data() + row_ptr[row], row_ptr[row + 1] - row_ptr[row]};
  }
};

struct AdamState {
  Matrix m, v;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct SeqHash {
  std::size_t operator()(const RankSeq& s) const noexcept;
};
using SubsequenceCounts = std::unordered_map<RankSeq, std::size_t, SeqHash>;

namespace serial {

/// R = D0 * alpha - P   (|E| x |P|)
void residual(const Incidence& d0, const Incidence& p, const Matrix& alpha, Matrix& r);
/// G = D0^T * R         (|D0| x |P|)
void backproject(const Incidence& d0, const Matrix& r, Matrix& g);
/// 0.5 * ||R||_F^2 + lambda * sum(alpha)
double objective(const Matrix& r, const Matrix& alpha, double lambda);
/// One Adam step on D0^T R + lambda, clipped to [0, 1].
void adam_step(const Incidence& d0, const Matrix& r, double lambda, double lr,
               AdamState& state, Matrix& alpha);
SubsequenceCounts count_subsequences(const std::vector<RankSeq>& trajectories,
                                     std::size_t max_nodes);
void matmul(const Matrix& a, const Matrix& b, Matrix& c);     // C = A B
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);  // C = A^T B
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);  // C = A B^T

}  // namespace serial

namespace parallel {

void residual(const Incidence& d0, const Incidence& p, const Matrix& alpha, Matrix& r);
void backproject(const Incidence& d0, const Matrix& r, Matrix& g);
double objective(const Matrix& r, const Matrix& alpha, double lambda);
void adam_step(const Incidence& d0, const Matrix& r, double lambda, double lr,
               AdamState& state, Matrix& alpha);
SubsequenceCounts count_subsequences(const std::vector<RankSeq>& trajectories,
                                     std::size_t max_nodes);
void matmul(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);

}  // namespace parallel

/// Caps OpenMP worker threads; 0 keeps the runtime default.
void set_threads(int n);
int max_threads();

}  // namespace pathlets::kernels
