// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/pathlet_graph.hpp"

#include <algorithm>
#include <set>

#include "pathlets/kernels.hpp"

namespace pathlets {

std::optional<std::size_t> TrajectoryGraph::edge_id(const Edge& e) const {
  const auto it = std::lower_bound(edges.begin(), edges.end(), e);
  if (it == edges.end() || *it != e) return std::nullopt;
  return static_cast<std::size_t>(it - edges.begin());
}

bool TrajectoryGraph::is_walk(const RankSeq& seq) const {
  if (seq.empty()) return false;
  if (seq.size() == 1) return std::binary_search(nodes.begin(), nodes.end(), seq[0]);
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if (!edge_id({seq[i], seq[i + 1]})) return false;
  }
  return true;
}

void TrajectoryGraph::write_edge_list(std::ostream& out) const {
  for (const auto& [a, b] : edges) out << a << ' ' << b << '\n';
}

std::size_t BinaryColumns::nnz() const {
  std::size_t n = 0;
  for (const auto& c : columns) n += c.size();
  return n;
}

Matrix BinaryColumns::to_dense() const {
  Matrix m(n_rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (auto r : columns[j]) m(r, j) = 1.0;
  }
  return m;
}

std::vector<RankSeq> rank_sequences(const std::vector<RankTrajectory>& trajectories) {
  std::vector<RankSeq> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) out.push_back(t.ranks);
  return out;
}

TrajectoryGraph induce_graph(const std::vector<RankSeq>& trajectories) {
  std::set<Rank> nodes;
  std::set<Edge> edges;
  for (const auto& t : trajectories) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      nodes.insert(t[i]);
      if (i + 1 < t.size()) edges.insert({t[i], t[i + 1]});
    }
  }
  if (edges.empty()) throw DataError("trajectory graph has no edges");
  return {{nodes.begin(), nodes.end()}, {edges.begin(), edges.end()}};
}

bool support_order(const Pathlet& a, const Pathlet& b) {
  if (a.support != b.support) return a.support > b.support;
  if (a.ranks.size() != b.ranks.size()) return a.ranks.size() < b.ranks.size();
  return a.ranks < b.ranks;
}

std::vector<Pathlet> mine_candidates(const std::vector<RankSeq>& trajectories,
                                     const MiningConfig& cfg) {
  if (cfg.top_m == 0) throw UsageError("top_m must be positive");
  if (cfg.max_nodes < 2) throw UsageError("pathlets need at least two nodes");
  auto counts = kernels::parallel::count_subsequences(trajectories, cfg.max_nodes);
  std::vector<Pathlet> all;
  all.reserve(counts.size());
  for (auto& [seq, c] : counts) all.push_back({seq, c});
  const std::size_t keep = std::min(cfg.top_m, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    support_order);
  all.resize(keep);
  return all;
}

std::optional<std::vector<std::uint32_t>> edge_column(const RankSeq& seq,
                                                      const TrajectoryGraph& graph) {
  std::vector<std::uint32_t> col;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const auto id = graph.edge_id({seq[i], seq[i + 1]});
    if (!id) return std::nullopt;
    col.push_back(static_cast<std::uint32_t>(*id));
  }
  std::sort(col.begin(), col.end());
  col.erase(std::unique(col.begin(), col.end()), col.end());
  return col;
}

EdgeEncoding encode(const std::vector<RankSeq>& trajectories,
                    const std::vector<Pathlet>& candidates, const TrajectoryGraph& graph) {
  EdgeEncoding enc;
  enc.paths.n_rows = graph.edges.size();
  enc.candidates.n_rows = graph.edges.size();
  enc.paths.columns.reserve(trajectories.size());
  for (std::size_t p = 0; p < trajectories.size(); ++p) {
    auto col = edge_column(trajectories[p], graph);
    if (!col) throw DataError("trajectory " + std::to_string(p) + " is not a walk on the graph");
    enc.paths.columns.push_back(std::move(*col));
  }
  enc.candidates.columns.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto col = edge_column(candidates[c].ranks, graph);
    if (!col) throw DataError("candidate " + std::to_string(c) + " uses an edge outside the graph");
    enc.candidates.columns.push_back(std::move(*col));
  }
  return enc;
}

}  // namespace pathlets
