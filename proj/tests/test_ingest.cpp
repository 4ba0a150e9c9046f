// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>
#include <numeric>

#include <doctest.h>

#include "pathlets/ingest.hpp"
#include "pathlets/rng.hpp"
#include "support.hpp"

using namespace pathlets;
using pathlets::testing::make_histories;
using pathlets::testing::scratch_dir;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto path = scratch_dir("ingest") / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("csv line maps onto an event") {
  const auto path = write_file("one.csv", "user,ts,genre,track\nu1,1641000000,rock,tr9\n");
  const auto r = load_events(path, EventFormat::kCsv);
  REQUIRE(r.histories.size() == 1);
  const auto& ev = r.histories.at("u1").front();
  CHECK(ev == ListeningEvent{"u1", 1641000000, "rock", std::string("tr9")});
}

TEST_CASE("events come back in time order") {
  const auto path = write_file("order.csv", "user,ts,genre\nu1,20,jazz\nu1,10,rock\n");
  const auto& evs = load_events(path, EventFormat::kCsv).histories.at("u1");
  REQUIRE(evs.size() == 2);
  CHECK(evs[0].genre == "rock");
  CHECK(evs[1].genre == "jazz");
}

TEST_CASE("empty file gives no users") {
  const auto path = write_file("empty.csv", "");
  const auto r = load_events(path, EventFormat::kCsv);
  CHECK(r.histories.empty());
  CHECK(r.n_events == 0);
}

TEST_CASE("jsonl records, custom fields and iso timestamps") {
  const auto path = write_file(
      "ev.jsonl",
      "{\"listener\":\"a\",\"when\":\"2022-01-01T00:00:10Z\",\"style\":\"pop\"}\n"
      "{\"listener\":\"a\",\"when\":\"2022-01-01T00:00:05Z\",\"style\":\"rock\"}\n");
  EventSchema schema;
  schema.user_field = "listener";
  schema.ts_field = "when";
  schema.genre_field = "style";
  schema.iso8601_ts = true;
  const auto& evs = load_events(path, EventFormat::kJsonl, std::nullopt, schema).histories.at("a");
  REQUIRE(evs.size() == 2);
  CHECK(evs[0].genre == "rock");
  CHECK(evs[0].ts == 1640995205);
}

TEST_CASE("malformed rows report file and line") {
  const auto path = write_file("bad.csv", "user,ts,genre\nu1,10,rock\nu1,notatime,jazz\n");
  try {
    load_events(path, EventFormat::kCsv);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }
}

TEST_CASE("window config rejects an empty interval") {
  CHECK_THROWS_AS((WindowConfig{10, 10, 3}.validate()), UsageError);
  CHECK_THROWS_AS((WindowConfig{0, 10, 1}.validate()), UsageError);
}

TEST_CASE("windows are left closed with a closed final endpoint") {
  const WindowConfig w{0, 100, 4};
  CHECK(w.window_of(25) == 1);
  CHECK(w.window_of(24) == 0);
  CHECK(w.window_of(0) == 0);
  CHECK(w.window_of(100) == 3);
}

TEST_CASE("events outside the interval are dropped on load and rejected on slicing") {
  const auto path = write_file("range.csv", "user,ts,genre\nu1,5,rock\nu1,500,rock\n");
  const auto r = load_events(path, EventFormat::kCsv, WindowConfig{0, 100, 2});
  CHECK(r.skipped_out_of_range == 1);
  const auto all = load_events(path, EventFormat::kCsv);
  CHECK_THROWS_AS(slice_windows(all.histories, WindowConfig{0, 100, 2}), DataError);
}

TEST_CASE("allocation rows are genre shares") {
  // genres: jazz 0, metal 1, rock 2
  const auto h = make_histories({"jazz", "metal", "rock"}, {{{2, 2, 0}, {}, {1}}});
  const auto X = allocation(h);
  CHECK(X.at(0, 0, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(X.at(0, 0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(X.row_empty(1, 0));
  CHECK(X.at(2, 0, 1) == 1.0);
}

TEST_CASE("co-listening counts both neighbours") {
  const std::uint32_t rock = 0, jazz = 1;
  const std::vector<std::uint32_t> a{rock, jazz, rock};
  auto c = colistening(a, jazz, 2);
  CHECK(c[rock] == 2);
  CHECK(c[jazz] == 0);

  const std::vector<std::uint32_t> lone{jazz};
  c = colistening(lone, jazz, 2);
  CHECK(c[rock] == 0);
  CHECK(c[jazz] == 0);

  // Adjacent pairs of [rock, rock, jazz] touching a rock: (0,1) seen from both
  // ends gives rock twice, (1,2) gives jazz once.
  const std::vector<std::uint32_t> b{rock, rock, jazz};
  c = colistening(b, rock, 2);
  CHECK(c[rock] == 2);
  CHECK(c[jazz] == 1);
}

TEST_CASE("candidate sets follow the previous window") {
  AllocationTensor X(3, {"u"}, {"a", "b", "c"});
  X.at(0, 0, 0) = 0.2;  // heard, then gone in the previous window
  X.at(0, 0, 2) = 0.8;
  X.at(1, 0, 1) = 0.4;
  X.at(1, 0, 2) = 0.6;
  const auto s = candidate_sets(X);
  REQUIRE(s.appearance.size() == 1);
  CHECK(s.appearance[0] == CandidatePair{0, 0, CandidateKind::kAppearance});
  REQUIRE(s.disappearance.size() == 2);
  CHECK(s.disappearance[0].genre == 1);
  CHECK(s.disappearance[1].genre == 2);
}

TEST_CASE("never heard genres are in neither candidate set") {
  AllocationTensor X(3, {"u"}, {"a", "b"});
  X.at(0, 0, 0) = 1.0;
  X.at(1, 0, 0) = 1.0;
  const auto s = candidate_sets(X);
  CHECK(s.appearance.empty());
  CHECK(s.disappearance.size() == 1);
}

TEST_CASE("random histories satisfy the tensor and candidate invariants") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n_genres = 2 + rng.below(6), K = 3 + rng.below(4), n_users = 1 + rng.below(8);
    HistoryMap hm;
    std::size_t total = 0;
    for (std::size_t u = 0; u < n_users; ++u) {
      const auto user = "u" + std::to_string(u);
      const auto n = rng.below(30);
      for (std::size_t i = 0; i < n; ++i) {
        hm[user].push_back({user, static_cast<std::int64_t>(rng.below(1000)),
                            "g" + std::to_string(rng.below(n_genres)), std::nullopt});
      }
      total += n;
      std::sort(hm[user].begin(), hm[user].end(),
                [](const auto& a, const auto& b) { return a.ts < b.ts; });
    }
    if (total == 0) continue;
    const auto h = slice_windows(hm, WindowConfig{0, 999, K});
    std::size_t sliced = 0;
    for (const auto& per_user : h.sequences) {
      for (const auto& w : per_user) sliced += w.size();
    }
    CHECK(sliced == total);

    const auto X = allocation(h);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t u = 0; u < h.n_users(); ++u) {
        const auto row = X.row(k, u);
        const double s = std::accumulate(row.begin(), row.end(), 0.0);
        CHECK((X.row_empty(k, u) || std::abs(s - 1.0) < 1e-9));
        for (double v : row) CHECK((v >= 0.0 && v <= 1.0));
        const auto seq = h.window(u, k);
        for (std::uint32_t g = 0; g < h.n_genres(); ++g) {
          const auto c = colistening(seq, g, h.n_genres());
          std::size_t expected = 0;
          for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
            expected += (seq[j] == g) + (seq[j + 1] == g);
          }
          CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == expected);
        }
      }
    }
    const auto s = candidate_sets(X);
    for (const auto& a : s.appearance) {
      for (const auto& d : s.disappearance) {
        CHECK(!(a.user == d.user && a.genre == d.genre));
      }
    }
  }
}
