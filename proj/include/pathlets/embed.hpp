// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Explicit trajectory embeddings by greedy longest-pathlet matching.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "pathlets/dict_learn.hpp"

namespace pathlets {

/// Nodes start..end (inclusive) matched by dictionary entry `pathlet`.
struct MatchedSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t pathlet = 0;

  std::size_t n_edges() const { return end - start; }
  bool operator==(const MatchedSpan&) const = default;
};

struct TrajectoryEmbedding {
  std::vector<std::uint32_t> coords;  // usage count per dictionary pathlet
  std::vector<MatchedSpan> matched_spans;  // sorted by start
  std::size_t uncovered_edges = 0;
  std::size_t total_edges = 0;

  std::size_t nonzero() const;
  bool operator==(const TrajectoryEmbedding&) const = default;
};

class Embedder {
 public:
  explicit Embedder(const PathletDictionary& dictionary);

  std::size_t dimension() const { return n_; }

  /// Repeatedly takes the longest dictionary pathlet found in an active
  /// segment (earliest start, then dictionary order, on ties), then recurses
  /// on the left and right remainders, which share the span's end nodes.
  TrajectoryEmbedding embed(std::span<const Rank> trajectory) const;

 private:
  struct Match {
    std::size_t start, length, pathlet;
  };
  bool find(std::span<const Rank> seq, std::size_t lo, std::size_t hi, Match& out) const;
  void segment(std::span<const Rank> seq, std::size_t lo, std::size_t hi,
               TrajectoryEmbedding& emb) const;

  std::vector<RankSeq> pathlets_;
  std::size_t n_;
  std::size_t max_len_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_hash_;
};

TrajectoryEmbedding embed_trajectory(const RankSeq& trajectory,
                                     const PathletDictionary& dictionary);

/// Arithmetic mean of the coordinate vectors. Throws DataError when empty.
std::vector<double> embed_pair(const std::vector<TrajectoryEmbedding>& embeddings);

}  // namespace pathlets
