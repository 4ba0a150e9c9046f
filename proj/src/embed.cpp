// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/embed.hpp"

#include <algorithm>

#include "pathlets/rng.hpp"

namespace pathlets {

namespace {

std::uint64_t hash_span(std::span<const Rank> s) {
  std::uint64_t h = 0x243f6a8885a308d3ULL ^ s.size();
  for (auto r : s) h = splitmix64(h ^ r);
  return h;
}

}  // namespace

std::size_t TrajectoryEmbedding::nonzero() const {
  return static_cast<std::size_t>(
      std::count_if(coords.begin(), coords.end(), [](auto c) { return c != 0; }));
}

Embedder::Embedder(const PathletDictionary& dictionary) : n_(dictionary.size()) {
  pathlets_.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto& ranks = dictionary.pathlets[i].ranks;
    pathlets_.push_back(ranks);
    if (ranks.size() < 2) continue;  // edgeless entries never match
    max_len_ = std::max(max_len_, ranks.size());
    by_hash_[hash_span(ranks)].push_back(static_cast<std::uint32_t>(i));
  }
}

bool Embedder::find(std::span<const Rank> seq, std::size_t lo, std::size_t hi,
                    Match& out) const {
  const std::size_t nodes = hi - lo + 1;
  for (std::size_t len = std::min(max_len_, nodes); len >= 2; --len) {
    for (std::size_t s = lo; s + len <= hi + 1; ++s) {
      const auto window = seq.subspan(s, len);
      const auto it = by_hash_.find(hash_span(window));
      if (it == by_hash_.end()) continue;
      for (auto idx : it->second) {  // ascending dictionary order
        const auto& p = pathlets_[idx];
        if (std::equal(p.begin(), p.end(), window.begin(), window.end())) {
          out = {s, len, idx};
          return true;
        }
      }
    }
  }
  return false;
}

void Embedder::segment(std::span<const Rank> seq, std::size_t lo, std::size_t hi,
                       TrajectoryEmbedding& emb) const {
  if (hi <= lo) return;
  Match m{};
  if (!find(seq, lo, hi, m)) {
    emb.uncovered_edges += hi - lo;
    return;
  }
  ++emb.coords[m.pathlet];
  emb.matched_spans.push_back({m.start, m.start + m.length - 1, m.pathlet});
  segment(seq, lo, m.start, emb);
  segment(seq, m.start + m.length - 1, hi, emb);
}

TrajectoryEmbedding Embedder::embed(std::span<const Rank> trajectory) const {
  TrajectoryEmbedding emb;
  emb.coords.assign(n_, 0);
  if (trajectory.size() < 2) return emb;
  emb.total_edges = trajectory.size() - 1;
  segment(trajectory, 0, trajectory.size() - 1, emb);
  std::sort(emb.matched_spans.begin(), emb.matched_spans.end(),
            [](const MatchedSpan& a, const MatchedSpan& b) { return a.start < b.start; });
  return emb;
}

TrajectoryEmbedding embed_trajectory(const RankSeq& trajectory,
                                     const PathletDictionary& dictionary) {
  return Embedder(dictionary).embed(trajectory);
}

std::vector<double> embed_pair(const std::vector<TrajectoryEmbedding>& embeddings) {
  if (embeddings.empty()) throw DataError("pair has no trajectories to embed");
  std::vector<double> mean(embeddings.front().coords.size(), 0.0);
  for (const auto& e : embeddings) {
    if (e.coords.size() != mean.size()) throw UsageError("embedding dimension mismatch");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += e.coords[i];
  }
  const double n = static_cast<double>(embeddings.size());
  for (auto& v : mean) v /= n;
  return mean;
}

}  // namespace pathlets
