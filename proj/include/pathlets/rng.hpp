// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace pathlets {

// std::mt19937_64 output is fixed by the standard; the std:: distributions
// are not, so every draw below is built from raw 64-bit words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Index drawn with probability weights[i] / sum(weights). Returns
  /// weights.size() when the total weight is not positive.
  std::size_t discrete(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a over the bytes of `s`.
std::uint64_t fnv1a(std::string_view s);

/// Stream seed for a named sub-computation, e.g. (master, user, genre).
std::uint64_t derive_seed(std::uint64_t master, std::string_view a,
                          std::string_view b = {});
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// First `k` entries of a uniformly random permutation of 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    Rng& rng);

}  // namespace pathlets
