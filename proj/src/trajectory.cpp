// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/trajectory.hpp"

#include <algorithm>
#include <numeric>

namespace pathlets {

std::optional<Rank> RankMap::rank_of(std::uint32_t genre) const {
  const auto it = std::find(genre_of_rank.begin(), genre_of_rank.end(), genre);
  if (it == genre_of_rank.end()) return std::nullopt;
  return static_cast<Rank>(it - genre_of_rank.begin());
}

RankMap build_rank_map(const WindowedHistories& histories, const CandidatePair& pair,
                       std::size_t n_windows) {
  std::vector<std::size_t> counts(histories.n_genres(), 0);
  for (std::size_t k = 0; k < n_windows; ++k) {
    for (auto g : histories.window(pair.user, k)) ++counts[g];
  }
  std::vector<std::uint32_t> others;
  for (std::uint32_t g = 0; g < counts.size(); ++g) {
    if (g != pair.genre && counts[g] > 0) others.push_back(g);
  }
  const auto& names = histories.genres;
  std::sort(others.begin(), others.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return names[a] < names[b];
  });
  RankMap map;
  map.genre_of_rank.reserve(others.size() + 1);
  map.genre_of_rank.push_back(pair.genre);
  map.genre_of_rank.insert(map.genre_of_rank.end(), others.begin(), others.end());
  return map;
}

RankTrajectory rank_transform(const GenreTrajectory& traj, const RankMap& map) {
  RankTrajectory out;
  out.anchor = traj.anchor;
  out.rank_map = map;
  out.ranks.reserve(traj.genres.size());
  for (const auto& g : traj.genres) {
    if (!g) continue;
    const auto r = map.rank_of(*g);
    if (!r) throw DataError("genre outside the rank map");
    out.ranks.push_back(*r);
  }
  return out;
}

std::vector<std::uint32_t> invert(const RankTrajectory& traj) {
  std::vector<std::uint32_t> out;
  out.reserve(traj.ranks.size());
  for (auto r : traj.ranks) out.push_back(traj.rank_map.genre_of(r));
  return out;
}

TrajectorySampler::TrajectorySampler(const WindowedHistories& histories,
                                     const AllocationTensor& X)
    : histories_(histories), X_(X), n_windows_(histories.K > 0 ? histories.K - 1 : 0) {
  if (X.K() != histories.K || X.n_users() != histories.n_users() ||
      X.n_genres() != histories.n_genres()) {
    throw UsageError("sampler needs the allocation tensor of the same histories");
  }
}

void TrajectorySampler::check(const CandidatePair& pair) const {
  if (pair.user >= histories_.n_users()) throw DataError("unknown user in pair");
  if (pair.genre >= histories_.n_genres()) throw DataError("unknown genre in pair");
}

bool TrajectorySampler::has_support(const CandidatePair& pair) const {
  check(pair);
  for (std::size_t k = 0; k < n_windows_; ++k) {
    if (!histories_.window(pair.user, k).empty()) return true;
  }
  return false;
}

GenreTrajectory TrajectorySampler::sample(const CandidatePair& pair, Rng& rng) const {
  check(pair);
  GenreTrajectory out;
  out.anchor = pair;
  out.genres.resize(n_windows_);
  std::vector<double> weights(histories_.n_genres());
  for (std::size_t k = 0; k < n_windows_; ++k) {
    const auto seq = histories_.window(pair.user, k);
    if (seq.empty()) continue;
    const auto eta = colistening(seq, pair.genre, histories_.n_genres());
    const bool has_eta = std::any_of(eta.begin(), eta.end(), [](auto c) { return c > 0; });
    if (has_eta) {
      std::transform(eta.begin(), eta.end(), weights.begin(),
                     [](std::uint32_t c) { return static_cast<double>(c); });
    } else {
      const auto row = X_.row(k, pair.user);
      std::copy(row.begin(), row.end(), weights.begin());
    }
    const auto g = rng.discrete(weights);
    if (g < weights.size()) out.genres[k] = static_cast<std::uint32_t>(g);
  }
  return out;
}

std::uint64_t TrajectorySampler::pair_seed(const CandidatePair& pair,
                                           std::uint64_t master_seed) const {
  check(pair);
  return derive_seed(master_seed, histories_.users[pair.user],
                     histories_.genres[pair.genre]);
}

std::vector<RankTrajectory> TrajectorySampler::sample_ranked(
    const CandidatePair& pair, std::size_t n, std::uint64_t master_seed) const {
  Rng rng(pair_seed(pair, master_seed));
  const RankMap map = rank_map(pair);
  std::vector<RankTrajectory> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rank_transform(sample(pair, rng), map));
  return out;
}

GenreTrajectory sample_trajectory(const TrajectorySampler& sampler,
                                  const CandidatePair& pair, std::uint64_t seed) {
  Rng rng(seed);
  return sampler.sample(pair, rng);
}

TrajectorySet build_trajectory_set(const TrajectorySampler& sampler,
                                   const std::vector<CandidatePair>& candidates,
                                   std::size_t n_per_pair, std::size_t total,
                                   std::uint64_t seed, std::size_t heldout) {
  if (total == 0) throw UsageError("trajectory set size must be positive");
  if (candidates.empty()) throw DataError("no candidate pairs to sample from");
  if (n_per_pair == 0) throw UsageError("n_per_pair must be positive");

  // Emptiness depends only on the pair, so the pool size is known up front and
  // only the drawn trajectories need to be kept.
  std::vector<std::size_t> usable;
  for (std::size_t p = 0; p < candidates.size(); ++p) {
    if (sampler.has_support(candidates[p])) usable.push_back(p);
  }
  const std::size_t pool = usable.size() * n_per_pair;
  Rng select(derive_seed(seed, "trajectory-selection"));
  const auto drawn = sample_without_replacement(pool, total + heldout, select);

  // role[i] = 1 for selected, 2 for held out, keyed by pool index.
  std::vector<std::vector<std::pair<std::size_t, int>>> wanted(usable.size());
  for (std::size_t i = 0; i < drawn.size(); ++i) {
    wanted[drawn[i] / n_per_pair].emplace_back(drawn[i] % n_per_pair, i < total ? 1 : 2);
  }
  for (auto& w : wanted) std::sort(w.begin(), w.end());

  std::vector<std::vector<RankTrajectory>> per_pair(usable.size());
  const auto n_usable = static_cast<std::ptrdiff_t>(usable.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t q = 0; q < n_usable; ++q) {
    const auto& w = wanted[static_cast<std::size_t>(q)];
    if (w.empty()) continue;
    const auto& pair = candidates[usable[static_cast<std::size_t>(q)]];
    auto all = sampler.sample_ranked(pair, w.back().first + 1, seed);
    auto& out = per_pair[static_cast<std::size_t>(q)];
    for (const auto& [j, role] : w) out.push_back(std::move(all[j]));
  }

  TrajectorySet set;
  for (std::size_t q = 0; q < usable.size(); ++q) {
    for (std::size_t i = 0; i < wanted[q].size(); ++i) {
      auto& dst = wanted[q][i].second == 1 ? set.selected : set.heldout;
      dst.push_back(std::move(per_pair[q][i]));
    }
  }
  return set;
}

}  // namespace pathlets
