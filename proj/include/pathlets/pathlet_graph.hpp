// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Trajectory graph induction, candidate pathlet mining and the binary
// edge encodings fed to the sparse-coding solver.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "pathlets/common.hpp"
#include "pathlets/trajectory.hpp"

namespace pathlets {

using Edge = std::pair<Rank, Rank>;

struct TrajectoryGraph {
  std::vector<Rank> nodes;  // ascending
  std::vector<Edge> edges;  // ascending; position = edge id

  std::optional<std::size_t> edge_id(const Edge& e) const;
  bool is_walk(const RankSeq& seq) const;
  void write_edge_list(std::ostream& out) const;
};

struct Pathlet {
  RankSeq ranks;
  std::size_t support = 0;

  std::size_t n_edges() const { return ranks.empty() ? 0 : ranks.size() - 1; }
  bool operator==(const Pathlet&) const = default;
};

/// Binary matrix stored by column: columns[j] holds the sorted row ids whose
/// entry is 1.
struct BinaryColumns {
  std::size_t n_rows = 0;
  std::vector<std::vector<std::uint32_t>> columns;

  std::size_t n_cols() const { return columns.size(); }
  std::size_t nnz() const;
  Matrix to_dense() const;
};

/// paths = edge -> trajectory incidence (|E| x |P|), candidates = edge ->
/// candidate pathlet incidence (|E| x |D0|).
struct EdgeEncoding {
  BinaryColumns paths;
  BinaryColumns candidates;
};

std::vector<RankSeq> rank_sequences(const std::vector<RankTrajectory>& trajectories);

/// Throws DataError when no trajectory has two or more nodes.
TrajectoryGraph induce_graph(const std::vector<RankSeq>& trajectories);

struct MiningConfig {
  std::size_t max_nodes = 10;  // longest pathlet, in nodes
  std::size_t top_m = 10000;
};

/// Most frequent contiguous sub-sequences with 2..max_nodes nodes. Every
/// occurrence counts; ties go to shorter, then lexicographically smaller.
std::vector<Pathlet> mine_candidates(const std::vector<RankSeq>& trajectories,
                                     const MiningConfig& cfg = {});

/// Total order used for ranking mined candidates.
bool support_order(const Pathlet& a, const Pathlet& b);

/// Column of distinct edge ids used by `seq`; nullopt if an edge is absent.
std::optional<std::vector<std::uint32_t>> edge_column(const RankSeq& seq,
                                                      const TrajectoryGraph& graph);

/// Throws DataError if a trajectory or candidate leaves the graph.
EdgeEncoding encode(const std::vector<RankSeq>& trajectories,
                    const std::vector<Pathlet>& candidates, const TrajectoryGraph& graph);

}  // namespace pathlets
