// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against their OpenMP counterparts. The argument is
// the thread count handed to the parallel variant.

#include <benchmark/benchmark.h>

#include "pathlets/kernels.hpp"
#include "pathlets/pathlet_graph.hpp"
#include "pathlets/rng.hpp"

using namespace pathlets;

namespace {

struct Problem {
  std::vector<RankSeq> corpus;
  kernels::Incidence d0, p;
  Matrix alpha, r;
};

const Problem& problem() {
  static const Problem prob = [] {
    Problem out;
    Rng rng(1);
    out.corpus.resize(5000);
    for (auto& t : out.corpus) {
      t.resize(10 + rng.below(7));
      for (auto& x : t) x = static_cast<Rank>(rng.below(12));
    }
    const auto g = induce_graph(out.corpus);
    const auto cands = mine_candidates(out.corpus, {10, 4000});
    const auto enc = encode(out.corpus, cands, g);
    out.d0 = kernels::Incidence::from(enc.candidates);
    out.p = kernels::Incidence::from(enc.paths);
    out.alpha = Matrix(cands.size(), out.corpus.size());
    for (auto& a : out.alpha.values()) a = 0.1 * rng.uniform();
    kernels::serial::residual(out.d0, out.p, out.alpha, out.r);
    return out;
  }();
  return prob;
}

Matrix random_matrix(std::size_t rows, std::size_t cols) {
  Rng rng(rows * 31 + cols);
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = rng.uniform();
  return m;
}

void threads_from(benchmark::State& state) {
  kernels::set_threads(static_cast<int>(state.range(0)));
}

void BM_ResidualSerial(benchmark::State& state) {
  const auto& pr = problem();
  Matrix r;
  for (auto _ : state) {
    kernels::serial::residual(pr.d0, pr.p, pr.alpha, r);
    benchmark::DoNotOptimize(r.values().data());
  }
}

void BM_ResidualParallel(benchmark::State& state) {
  threads_from(state);
  const auto& pr = problem();
  Matrix r;
  for (auto _ : state) {
    kernels::parallel::residual(pr.d0, pr.p, pr.alpha, r);
    benchmark::DoNotOptimize(r.values().data());
  }
}

void BM_AdamSerial(benchmark::State& state) {
  const auto& pr = problem();
  kernels::AdamState st;
  Matrix alpha = pr.alpha;
  for (auto _ : state) kernels::serial::adam_step(pr.d0, pr.r, 0.0025, 0.01, st, alpha);
}

void BM_AdamParallel(benchmark::State& state) {
  threads_from(state);
  const auto& pr = problem();
  kernels::AdamState st;
  Matrix alpha = pr.alpha;
  for (auto _ : state) kernels::parallel::adam_step(pr.d0, pr.r, 0.0025, 0.01, st, alpha);
}

void BM_CountSerial(benchmark::State& state) {
  const auto& pr = problem();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::count_subsequences(pr.corpus, 10));
}

void BM_CountParallel(benchmark::State& state) {
  threads_from(state);
  const auto& pr = problem();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::count_subsequences(pr.corpus, 10));
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto a = random_matrix(400, 16), b = random_matrix(16, 300);
  Matrix c;
  for (auto _ : state) kernels::serial::matmul(a, b, c);
}

void BM_MatmulParallel(benchmark::State& state) {
  threads_from(state);
  const auto a = random_matrix(400, 16), b = random_matrix(16, 300);
  Matrix c;
  for (auto _ : state) kernels::parallel::matmul(a, b, c);
}

}  // namespace

BENCHMARK(BM_ResidualSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResidualParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdamSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdamParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
