// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>
#include <vector>

#include <doctest.h>

#include "pathlets/rng.hpp"

using namespace pathlets;

TEST_CASE("rng streams are reproducible and seed dependent") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs |= x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("uniform and below stay in range") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(13) < 13);
  }
}

TEST_CASE("discrete follows its weights") {
  Rng rng(3);
  const std::vector<double> w{0.0, 3.0, 1.0};
  std::size_t counts[3] = {0, 0, 0};
  for (int i = 0; i < 40000; ++i) ++counts[rng.discrete(w)];
  CHECK(counts[0] == 0);
  CHECK(static_cast<double>(counts[1]) / 40000.0 == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("discrete with no mass returns the sentinel") {
  Rng rng(1);
  const std::vector<double> w{0.0, 0.0};
  CHECK(rng.discrete(w) == 2);
}

TEST_CASE("sample without replacement draws distinct indices in range") {
  Rng rng(11);
  for (std::size_t n : {5u, 100u, 100000u}) {
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::min<std::size_t>(n, 7), n / 2}) {
      const auto s = sample_without_replacement(n, k, rng);
      CHECK(s.size() == k);
      const std::set<std::size_t> uniq(s.begin(), s.end());
      CHECK(uniq.size() == k);
      for (auto v : s) CHECK(v < n);
    }
  }
}

TEST_CASE("derived seeds separate names and indices") {
  CHECK(derive_seed(0, "a") != derive_seed(0, "b"));
  CHECK(derive_seed(0, "a", "b") != derive_seed(0, "ab"));
  CHECK(derive_seed(0, "a") != derive_seed(1, "a"));
  CHECK(derive_seed(5, std::uint64_t{1}) != derive_seed(5, std::uint64_t{2}));
  CHECK(derive_seed(9, "user", "genre") == derive_seed(9, "user", "genre"));
}
