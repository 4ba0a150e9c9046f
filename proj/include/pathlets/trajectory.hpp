// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Genre trajectories sampled per candidate pair and their rank encoding.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pathlets/common.hpp"
#include "pathlets/ingest.hpp"
#include "pathlets/rng.hpp"

namespace pathlets {

/// One sampled genre per trajectory window; nullopt where the window is empty.
struct GenreTrajectory {
  CandidatePair anchor;
  std::vector<std::optional<std::uint32_t>> genres;
};

/// Rank 0 is the anchor genre; ranks 1.. follow the user's listen counts,
/// descending, ties by genre id.
struct RankMap {
  std::vector<std::uint32_t> genre_of_rank;

  std::optional<Rank> rank_of(std::uint32_t genre) const;
  std::uint32_t genre_of(Rank r) const { return genre_of_rank.at(r); }
  std::size_t size() const { return genre_of_rank.size(); }
  bool operator==(const RankMap&) const = default;
};

struct RankTrajectory {
  RankSeq ranks;
  CandidatePair anchor;
  RankMap rank_map;

  bool operator==(const RankTrajectory&) const = default;
};

/// Rank map over windows [0, n_windows) of `histories`.
RankMap build_rank_map(const WindowedHistories& histories, const CandidatePair& pair,
                       std::size_t n_windows);

/// Replaces genres by ranks and drops missing positions. Consecutive repeats
/// are kept. Throws DataError if a genre is outside the map.
RankTrajectory rank_transform(const GenreTrajectory& traj, const RankMap& map);

/// Genre ids of a rank trajectory, through its own rank map.
std::vector<std::uint32_t> invert(const RankTrajectory& traj);

/// Samples trajectories over the first K-1 windows of a (possibly truncated)
/// history; window K-1 is the target and is never read.
class TrajectorySampler {
 public:
  TrajectorySampler(const WindowedHistories& histories, const AllocationTensor& X);

  std::size_t length() const { return n_windows_; }

  GenreTrajectory sample(const CandidatePair& pair, Rng& rng) const;

  /// True when at least one trajectory window of the user has events.
  bool has_support(const CandidatePair& pair) const;

  RankMap rank_map(const CandidatePair& pair) const {
    return build_rank_map(histories_, pair, n_windows_);
  }

  /// `n` ranked draws from the pair's own stream, seeded from
  /// (master_seed, user id, genre id).
  std::vector<RankTrajectory> sample_ranked(const CandidatePair& pair, std::size_t n,
                                            std::uint64_t master_seed) const;

  std::uint64_t pair_seed(const CandidatePair& pair, std::uint64_t master_seed) const;

  const WindowedHistories& histories() const { return histories_; }

 private:
  void check(const CandidatePair& pair) const;

  const WindowedHistories& histories_;
  const AllocationTensor& X_;
  std::size_t n_windows_;
};

/// Single draw seeded directly by `seed`.
GenreTrajectory sample_trajectory(const TrajectorySampler& sampler,
                                  const CandidatePair& pair, std::uint64_t seed);

struct TrajectorySet {
  std::vector<RankTrajectory> selected;
  std::vector<RankTrajectory> heldout;  // disjoint from `selected`
};

/// Samples `n_per_pair` trajectories for every pair, discards empty ones and
/// draws `total` of them uniformly without replacement (all if fewer), plus up
/// to `heldout` further ones from the remainder. Output keeps pair order.
TrajectorySet build_trajectory_set(const TrajectorySampler& sampler,
                                   const std::vector<CandidatePair>& candidates,
                                   std::size_t n_per_pair, std::size_t total,
                                   std::uint64_t seed, std::size_t heldout = 0);

}  // namespace pathlets
