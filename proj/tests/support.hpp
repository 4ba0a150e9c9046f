// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Fixtures and brute-force oracles shared by the test binaries.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pathlets/common.hpp"
#include "pathlets/ingest.hpp"
#include "pathlets/pipeline.hpp"
#include "pathlets/rng.hpp"

namespace pathlets::testing {

/// Users named u0, u1, ...; seqs[u][k] lists genre indices.
inline WindowedHistories make_histories(
    std::vector<std::string> genres,
    std::vector<std::vector<std::vector<std::uint32_t>>> seqs) {
  WindowedHistories h;
  h.genres = std::move(genres);
  h.K = seqs.empty() ? 0 : seqs.front().size();
  for (std::size_t u = 0; u < seqs.size(); ++u) h.users.push_back("u" + std::to_string(u));
  h.sequences = std::move(seqs);
  return h;
}

inline std::vector<RankSeq> random_corpus(Rng& rng, std::size_t n, std::size_t max_len,
                                          std::size_t alphabet, std::size_t min_len = 1) {
  std::vector<RankSeq> out(n);
  for (auto& t : out) {
    t.resize(min_len + rng.below(max_len - min_len + 1));
    for (auto& r : t) r = static_cast<Rank>(rng.below(alphabet));
  }
  return out;
}

/// Occurrences of every contiguous subsequence of 2..max_nodes nodes.
inline std::map<RankSeq, std::size_t> brute_force_counts(const std::vector<RankSeq>& corpus,
                                                         std::size_t max_nodes) {
  std::map<RankSeq, std::size_t> counts;
  for (const auto& t : corpus) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t len = 2; len <= max_nodes && i + len <= t.size(); ++len) {
        ++counts[RankSeq(t.begin() + static_cast<std::ptrdiff_t>(i),
                         t.begin() + static_cast<std::ptrdiff_t>(i + len))];
      }
    }
  }
  return counts;
}

/// Fraction of (positive, negative) pairs ordered correctly, ties one half.
inline double brute_force_auc(std::span<const double> scores,
                              std::span<const std::uint8_t> labels) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        good += 1.0;
      } else if (scores[i] == scores[j]) {
        good += 0.5;
      }
    }
  }
  return good / pairs;
}

/// A fresh, empty directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pathlets-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Small, fast configuration over a synthetic listening log written into `dir`.
inline RunConfig small_event_config(const std::filesystem::path& dir, std::uint64_t seed = 0) {
  ListeningSpec spec;
  spec.n_users = 240;
  spec.n_genres = 20;
  spec.K = 6;
  spec.seed = seed;
  write_events_csv(dir / "events.csv", generate_listening(spec));
  RunConfig c;
  c.dataset = dir / "events.csv";
  c.K = spec.K;
  c.t_start = spec.windows().t_start;
  c.t_end = spec.windows().t_end;
  c.n_per_pair = 12;
  c.total = 300;
  c.heldout = 60;
  c.seed = seed;
  c.mining.top_m = 600;
  c.learn.max_epochs = 40;
  c.learn.top_n = 40;
  c.forest.n_trees = 20;
  c.nmf.iterations = 60;
  c.sweep_lambdas = {0.001, 0.01};
  c.output_dir = dir / "out";
  return c;
}

}  // namespace pathlets::testing
