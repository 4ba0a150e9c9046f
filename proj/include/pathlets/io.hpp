// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Artifact serialization: trajectory, candidate and dictionary JSONL, windowed
// histories, numeric CSV tables and file hashing.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pathlets/common.hpp"
#include "pathlets/dict_learn.hpp"
#include "pathlets/ingest.hpp"
#include "pathlets/pathlet_graph.hpp"
#include "pathlets/trajectory.hpp"

namespace pathlets::io {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

// One trajectory per line; anchors and rank maps by name so the file stands on
// its own. Synthetic corpora leave the anchor fields empty.
struct TrajectoryRecord {
  std::string user;
  std::string genre;
  CandidateKind kind = CandidateKind::kAppearance;
  RankSeq ranks;
  std::vector<std::string> rank_map;  // genre name of each rank
  bool operator==(const TrajectoryRecord&) const = default;
};

TrajectoryRecord to_record(const RankTrajectory& traj, const std::vector<std::string>& users,
                           const std::vector<std::string>& genres);
void write_trajectories(const std::filesystem::path& path,
                        const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_trajectories(const std::filesystem::path& path);
std::vector<RankSeq> ranks_of(const std::vector<TrajectoryRecord>& records);

void write_candidates(const std::filesystem::path& path, const std::vector<Pathlet>& candidates);
std::vector<Pathlet> read_candidates(const std::filesystem::path& path);

void write_dictionary(const std::filesystem::path& path, const PathletDictionary& dictionary);
PathletDictionary read_dictionary(const std::filesystem::path& path);

void write_sequences(const std::filesystem::path& path, const std::vector<RankSeq>& seqs);
std::vector<RankSeq> read_sequences(const std::filesystem::path& path);

/// Tab-separated: a K line, a genres line, then `user<TAB>k<TAB>g g g` for
/// every non-empty window.
void write_windows(const std::filesystem::path& path, const WindowedHistories& histories);
WindowedHistories read_windows(const std::filesystem::path& path);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

/// Rows labelled by `row_labels`, one column per entry of `col_labels`.
void write_matrix(const std::filesystem::path& path, const std::string& corner,
                  const std::vector<std::string>& row_labels,
                  const std::vector<std::string>& col_labels, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path, std::vector<std::string>* row_labels = nullptr,
                   std::vector<std::string>* col_labels = nullptr);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::string rank_label(const RankSeq& ranks);  // "0-3-1"
std::string kind_name(CandidateKind kind);
CandidateKind parse_kind(const std::string& name);

}  // namespace pathlets::io
