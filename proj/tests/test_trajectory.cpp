// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include <doctest.h>

#include "pathlets/trajectory.hpp"
#include "support.hpp"

using namespace pathlets;
using pathlets::testing::make_histories;

TEST_CASE("a single co-listened genre is always drawn") {
  // genres: anchor 0, rock 1. rock surrounds the anchor in window 0.
  const auto h = make_histories({"anchor", "rock"}, {{{1, 0, 1, 1}, {}, {}}});
  const auto X = allocation(h);
  const TrajectorySampler s(h, X);
  const CandidatePair pair{0, 0, CandidateKind::kAppearance};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = sample_trajectory(s, pair, seed);
    REQUIRE(t.genres.size() == 2);
    CHECK(t.genres[0] == std::optional<std::uint32_t>(1));
    CHECK(!t.genres[1]);  // empty window
  }
}

TEST_CASE("without co-listening the allocation row is drawn") {
  const auto h = make_histories({"jazz", "rock"}, {{{0}, {}, {}}});
  const auto X = allocation(h);
  const TrajectorySampler s(h, X);
  const auto t = sample_trajectory(s, {0, 1, CandidateKind::kAppearance}, 5);
  CHECK(t.genres[0] == std::optional<std::uint32_t>(0));
}

TEST_CASE("two equally co-listened genres split evenly") {
  // genres: anchor 0, metal 1, rock 2; eta = {rock: 1, metal: 1}
  const auto h = make_histories({"anchor", "metal", "rock"}, {{{2, 0, 1}, {}}});
  const auto X = allocation(h);
  const TrajectorySampler s(h, X);
  std::size_t rock = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    rock += sample_trajectory(s, {0, 0, CandidateKind::kAppearance}, seed).genres[0] ==
            std::optional<std::uint32_t>(2);
  }
  CHECK(std::abs(static_cast<double>(rock) / 10000.0 - 0.5) <= 0.02);
}

TEST_CASE("ranks follow the user's genre volume with the anchor at zero") {
  // genres: hard rock 0, metal 1, rock 2. metal is the user's top genre.
  const auto h = make_histories({"hard rock", "metal", "rock"},
                                {{{1, 1, 1, 2, 2, 0}, {1, 2}, {}}});
  const CandidatePair pair{0, 0, CandidateKind::kDisappearance};
  const auto map = build_rank_map(h, pair, 2);
  GenreTrajectory g{pair, {1u, 2u, 0u}};
  const auto r = rank_transform(g, map);
  CHECK(r.ranks == RankSeq{1, 2, 0});
  CHECK(invert(r) == std::vector<std::uint32_t>{1, 2, 0});
}

TEST_CASE("rank ties break by genre name") {
  const auto h = make_histories({"b", "a", "anchor"}, {{{0, 1}, {}}});
  const auto map = build_rank_map(h, {0, 2, CandidateKind::kAppearance}, 1);
  CHECK(map.genre_of_rank == std::vector<std::uint32_t>{2, 1, 0});
}

TEST_CASE("degenerate trajectories") {
  const auto h = make_histories({"x", "y"}, {{{0}, {}}});
  const CandidatePair pair{0, 0, CandidateKind::kAppearance};
  const auto map = build_rank_map(h, pair, 1);
  CHECK(rank_transform(GenreTrajectory{pair, {0u, 0u, 0u}}, map).ranks == RankSeq{0, 0, 0});
  CHECK(rank_transform(GenreTrajectory{pair, {std::nullopt, std::nullopt}}, map).ranks.empty());
  CHECK_THROWS_AS(rank_transform(GenreTrajectory{pair, {1u}}, map), DataError);
}

TEST_CASE("one pair yields all requested trajectories") {
  const auto h = make_histories({"a", "b"}, {{{0, 1}, {1, 0}, {1}}});
  const auto X = allocation(h);
  const TrajectorySampler s(h, X);
  const CandidatePair pair{0, 0, CandidateKind::kDisappearance};
  const auto set = build_trajectory_set(s, {pair}, 3, 3, 0);
  REQUIRE(set.selected.size() == 3);
  for (const auto& t : set.selected) CHECK(t.anchor == pair);
}

TEST_CASE("trajectory sets are reproducible and disjoint from held-out draws") {
  ListeningSpec spec;
  spec.n_users = 60;
  spec.K = 6;
  const auto h = slice_windows(generate_listening(spec), spec.windows());
  const auto X = allocation(h);
  const auto cs = candidate_sets(X);
  auto pairs = cs.appearance;
  pairs.insert(pairs.end(), cs.disappearance.begin(), cs.disappearance.end());
  const TrajectorySampler s(h, X);
  const auto a = build_trajectory_set(s, pairs, 10, 200, 9, 50);
  const auto b = build_trajectory_set(s, pairs, 10, 200, 9, 50);
  CHECK(a.selected == b.selected);
  CHECK(a.heldout == b.heldout);
  CHECK(a.selected.size() == 200);
  CHECK(a.heldout.size() == 50);
  const auto c = build_trajectory_set(s, pairs, 10, 200, 10, 50);
  CHECK(!(a.selected == c.selected));

  for (const auto& t : a.selected) {
    // Anchor is rank 0 and no other genre is.
    CHECK(t.rank_map.genre_of(0) == t.anchor.genre);
    CHECK(std::count(t.rank_map.genre_of_rank.begin(), t.rank_map.genre_of_rank.end(),
                     t.anchor.genre) == 1);
    // Mapping back to genres and ranking again is the identity.
    GenreTrajectory g{t.anchor, {}};
    for (auto genre : invert(t)) g.genres.emplace_back(genre);
    CHECK(rank_transform(g, t.rank_map) == t);
  }
}

TEST_CASE("trajectory set argument checks") {
  const auto h = make_histories({"a"}, {{{0}, {0}, {0}}});
  const auto X = allocation(h);
  const TrajectorySampler s(h, X);
  CHECK_THROWS_AS(build_trajectory_set(s, {}, 1, 1, 0), DataError);
  CHECK_THROWS_AS(build_trajectory_set(s, {{0, 0, CandidateKind::kDisappearance}}, 1, 0, 0), UsageError);
}
