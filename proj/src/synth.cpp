// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "pathlets/rng.hpp"

namespace pathlets {

void PlantedSpec::validate() const {
  if (n_pathlets == 0) throw UsageError("need at least one planted pathlet");
  if (min_length < 2 || max_length < min_length) {
    throw UsageError("planted lengths must satisfy 2 <= min <= max");
  }
  if (alphabet == 0) throw UsageError("alphabet must contain rank 0");
  if (trajectory_length < min_length) {
    throw UsageError("trajectory length shorter than the shortest pathlet");
  }
  if (!(noise >= 0.0 && noise < 1.0 + 1e-12)) throw UsageError("noise must lie in [0, 1]");
  // Enough distinct sequences must exist to draw n_pathlets of them.
  double distinct = 0.0;
  for (std::size_t len = min_length; len <= max_length && distinct < 1e18; ++len) {
    distinct += std::pow(static_cast<double>(alphabet), static_cast<double>(len));
  }
  if (distinct < static_cast<double>(n_pathlets)) {
    throw UsageError("alphabet too small for that many distinct pathlets");
  }
}

PlantedCorpus generate_planted(const PlantedSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "planted"));
  PlantedCorpus out;
  std::set<RankSeq> seen;
  while (out.planted.size() < spec.n_pathlets) {
    const auto len = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
    RankSeq p(len);
    for (auto& r : p) r = static_cast<Rank>(rng.below(spec.alphabet));
    if (seen.insert(p).second) out.planted.push_back(std::move(p));
  }
  out.planting_counts.assign(out.planted.size(), 0);

  std::vector<std::size_t> fitting;
  for (std::size_t t = 0; t < spec.n_trajectories; ++t) {
    RankSeq traj;
    for (;;) {
      const std::size_t room = spec.trajectory_length - traj.size();
      fitting.clear();
      for (std::size_t i = 0; i < out.planted.size(); ++i) {
        if (out.planted[i].size() <= room) fitting.push_back(i);
      }
      if (fitting.empty()) break;
      const auto pick = fitting[rng.below(fitting.size())];
      traj.insert(traj.end(), out.planted[pick].begin(), out.planted[pick].end());
      ++out.planting_counts[pick];
    }
    for (auto& r : traj) {
      if (rng.uniform() < spec.noise) r = static_cast<Rank>(rng.below(spec.alphabet));
    }
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

double recovery_score(const PathletDictionary& learned, const std::vector<RankSeq>& planted) {
  if (planted.empty()) throw UsageError("no planted pathlets");
  const std::size_t n = std::min(planted.size(), learned.size());
  std::size_t found = 0;
  for (const auto& p : planted) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& q = learned.pathlets[i].ranks;
      if (std::search(q.begin(), q.end(), p.begin(), p.end()) != q.end()) {
        ++found;
        break;
      }
    }
  }
  return static_cast<double>(found) / static_cast<double>(planted.size());
}

void ListeningSpec::validate() const {
  if (n_users == 0 || n_genres < 2) throw UsageError("need users and at least two genres");
  if (K < 2) throw UsageError("need at least two windows");
  if (min_events == 0 || max_events < min_events) throw UsageError("invalid events per window");
  for (double p : {inactive, drop, adopt, readopt, repeat}) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("probabilities must lie in [0, 1]");
  }
  if (window_seconds <= 0) throw UsageError("window length must be positive");
}

WindowConfig ListeningSpec::windows() const {
  return {t0, t0 + static_cast<std::int64_t>(K) * window_seconds - 1, K};
}

HistoryMap generate_listening(const ListeningSpec& spec) {
  spec.validate();
  std::vector<double> zipf(spec.n_genres);
  for (std::size_t g = 0; g < zipf.size(); ++g) zipf[g] = 1.0 / static_cast<double>(g + 1);
  const int genre_digits = static_cast<int>(std::to_string(spec.n_genres - 1).size());
  const int user_digits = static_cast<int>(std::to_string(spec.n_users - 1).size());
  auto pad = [](std::size_t v, int width) {
    auto s = std::to_string(v);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
  };

  HistoryMap out;
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    Rng rng(derive_seed(spec.seed, u));
    const auto user = "u" + pad(u, user_digits);
    std::vector<double> weight(spec.n_genres, 0.0);  // > 0 marks an active genre
    std::vector<bool> dropped(spec.n_genres, false);
    const std::size_t initial = 2 + rng.below(3);
    for (std::size_t i = 0; i < initial; ++i) {
      auto w = zipf;
      for (std::size_t g = 0; g < w.size(); ++g) {
        if (weight[g] > 0.0) w[g] = 0.0;
      }
      const auto g = rng.discrete(w);
      if (g < spec.n_genres) weight[g] = 0.2 + rng.uniform();
    }
    auto& events = out[user];
    for (std::size_t k = 0; k < spec.K; ++k) {
      if (k > 0) {
        auto active = std::count_if(weight.begin(), weight.end(), [](double w) { return w > 0.0; });
        for (std::size_t g = 0; g < spec.n_genres; ++g) {
          if (weight[g] > 0.0 && active > 1 && rng.uniform() < spec.drop) {
            weight[g] = 0.0;
            dropped[g] = true;
            --active;
          }
        }
        if (rng.uniform() < spec.adopt) {
          std::vector<double> w(spec.n_genres, 0.0);
          const bool back = rng.uniform() < spec.readopt;
          for (std::size_t g = 0; g < spec.n_genres; ++g) {
            if (weight[g] > 0.0) continue;
            w[g] = back ? (dropped[g] ? 1.0 : 0.0) : zipf[g];
          }
          const auto g = rng.discrete(w);
          if (g < spec.n_genres) weight[g] = 0.2 + rng.uniform();
        }
      }
      if (rng.uniform() < spec.inactive) continue;
      const auto n = spec.min_events + rng.below(spec.max_events - spec.min_events + 1);
      std::vector<std::int64_t> ts(n);
      for (auto& t : ts) {
        t = spec.t0 + static_cast<std::int64_t>(k) * spec.window_seconds +
            static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(spec.window_seconds)));
      }
      std::sort(ts.begin(), ts.end());
      std::size_t current = rng.discrete(weight);
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && rng.uniform() >= spec.repeat) current = rng.discrete(weight);
        events.push_back({user, ts[i], "genre_" + pad(current, genre_digits), std::nullopt});
      }
    }
    if (events.empty()) out.erase(user);
  }
  return out;
}

void write_events_csv(const std::filesystem::path& path, const HistoryMap& histories) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "user,ts,genre\n";
  for (const auto& [user, events] : histories) {
    for (const auto& e : events) out << e.user << ',' << e.ts << ',' << e.genre << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace pathlets
