// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include <doctest.h>

#include "pathlets/embed.hpp"
#include "support.hpp"

using namespace pathlets;

namespace {

PathletDictionary dict_of(std::vector<RankSeq> seqs) {
  PathletDictionary d;
  for (auto& s : seqs) {
    d.pathlets.push_back({std::move(s), 1});
    d.influence.push_back(1.0);
  }
  return d;
}

}  // namespace

TEST_CASE("greedy matching takes the longest pathlet first") {
  const auto d = dict_of({{1, 2, 0}, {0, 1}});
  const auto e = embed_trajectory({0, 1, 2, 0}, d);
  CHECK(e.coords == std::vector<std::uint32_t>{1, 1});
  CHECK(e.uncovered_edges == 0);
  CHECK(e.total_edges == 3);
  REQUIRE(e.matched_spans.size() == 2);
  CHECK(e.matched_spans[0] == MatchedSpan{0, 1, 1});
  CHECK(e.matched_spans[1] == MatchedSpan{1, 3, 0});
}

TEST_CASE("no match and exact match") {
  const auto d = dict_of({{5, 6}, {0, 1, 2}});
  auto e = embed_trajectory({0, 2, 1}, d);
  CHECK(e.nonzero() == 0);
  CHECK(e.uncovered_edges == 2);
  e = embed_trajectory({0, 1, 2}, d);
  CHECK(e.coords == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("a longer pathlet suppresses its prefix") {
  const auto d = dict_of({{0, 1, 2}, {0, 1}});
  const auto e = embed_trajectory({0, 1, 2}, d);
  CHECK(e.nonzero() == 1);
  CHECK(e.coords[0] == 1);
}

TEST_CASE("ties go to the earliest start, then the lower index") {
  auto e = embed_trajectory({3, 4, 5}, dict_of({{4, 5}, {3, 4}}));
  CHECK(e.matched_spans.front() == MatchedSpan{0, 1, 1});
  CHECK(e.uncovered_edges == 0);
  e = embed_trajectory({3, 4}, dict_of({{3, 4}, {3, 4}}));
  CHECK(e.coords == std::vector<std::uint32_t>{1, 0});
}

TEST_CASE("repeated matches count usage") {
  const auto e = embed_trajectory({0, 1, 0, 1, 0}, dict_of({{0, 1}}));
  CHECK(e.coords[0] == 2);
  CHECK(e.uncovered_edges == 2);
}

TEST_CASE("pair embeddings average") {
  TrajectoryEmbedding a, b;
  a.coords = {1, 0};
  b.coords = {0, 1};
  CHECK(embed_pair({a}) == std::vector<double>{1.0, 0.0});
  CHECK(embed_pair({a, b}) == std::vector<double>{0.5, 0.5});
  CHECK(embed_pair({b, b, b}) == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(embed_pair({}), DataError);
}

TEST_CASE("random embeddings conserve edges and never overlap") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const auto dict = dict_of(pathlets::testing::random_corpus(rng, 1 + rng.below(12), 5, 4, 2));
    const Embedder embedder(dict);
    for (const auto& t : pathlets::testing::random_corpus(rng, 20, 14, 4)) {
      const auto e = embedder.embed(t);
      std::size_t covered = 0;
      for (std::size_t i = 0; i < e.matched_spans.size(); ++i) {
        const auto& s = e.matched_spans[i];
        covered += s.n_edges();
        const auto& p = dict.pathlets[s.pathlet].ranks;
        CHECK(std::equal(p.begin(), p.end(), t.begin() + static_cast<std::ptrdiff_t>(s.start)));
        if (i) CHECK(e.matched_spans[i - 1].end <= s.start);
      }
      CHECK(covered + e.uncovered_edges == e.total_edges);
      CHECK(embedder.embed(t) == e);
    }
  }
}

TEST_CASE("every corpus edge in the dictionary gives full cover") {
  Rng rng(9);
  const auto corpus = pathlets::testing::random_corpus(rng, 50, 12, 5, 2);
  std::set<RankSeq> edges;
  for (const auto& t : corpus) {
    for (std::size_t i = 0; i + 1 < t.size(); ++i) edges.insert({t[i], t[i + 1]});
  }
  const auto d = dict_of({edges.begin(), edges.end()});
  CHECK(dict_metrics(d, corpus).cover_ratio == 1.0);
}
