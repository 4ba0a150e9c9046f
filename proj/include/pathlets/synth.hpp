// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic rank-trajectory corpora with planted pathlets, for recovery and
// end-to-end checks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pathlets/common.hpp"
#include "pathlets/dict_learn.hpp"
#include "pathlets/ingest.hpp"

namespace pathlets {

struct PlantedSpec {
  std::size_t n_pathlets = 20;
  std::size_t min_length = 3;  // nodes
  std::size_t max_length = 5;
  std::size_t alphabet = 12;   // ranks 0..alphabet-1
  std::size_t n_trajectories = 500;
  std::size_t trajectory_length = 15;
  double noise = 0.1;
  std::uint64_t seed = 0;

  /// Throws UsageError for infeasible or inconsistent settings.
  void validate() const;
};

struct PlantedCorpus {
  std::vector<RankSeq> trajectories;
  std::vector<RankSeq> planted;               // distinct pathlets
  std::vector<std::size_t> planting_counts;   // placements per planted pathlet
};

/// Concatenates uniformly drawn planted pathlets (redrawing among those that
/// still fit) until no pathlet fits the remaining length, then replaces each
/// position by a uniform rank with probability `noise`.
PlantedCorpus generate_planted(const PlantedSpec& spec);

/// Fraction of planted pathlets found, verbatim or inside a longer learned
/// pathlet, among the first |planted| dictionary entries.
double recovery_score(const PathletDictionary& learned, const std::vector<RankSeq>& planted);

// Listening histories with churn: each user holds a small set of active genres
// that loses members, gains popularity-weighted newcomers and re-adopts genres
// it dropped earlier.
struct ListeningSpec {
  std::size_t n_users = 200;
  std::size_t n_genres = 30;
  std::size_t K = 6;
  std::size_t min_events = 5;  // per active window
  std::size_t max_events = 30;
  double inactive = 0.1;  // chance a user skips a window
  double drop = 0.2;      // per active genre and window
  double adopt = 0.35;    // chance of gaining a genre per window
  double readopt = 0.5;   // share of adoptions that return to a dropped genre
  double repeat = 0.5;    // chance the next event repeats the current genre
  std::int64_t t0 = 1600000000;
  std::int64_t window_seconds = 2592000;
  std::uint64_t seed = 0;

  void validate() const;
  /// The window grid the generator used, for slicing its output.
  WindowConfig windows() const;
};

HistoryMap generate_listening(const ListeningSpec& spec);

/// Canonical CSV with a `user,ts,genre` header.
void write_events_csv(const std::filesystem::path& path, const HistoryMap& histories);

}  // namespace pathlets
