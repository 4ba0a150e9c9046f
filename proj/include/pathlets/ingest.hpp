// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Event-log ingestion, time windowing, genre allocations and co-listening.
//
// Window indices are 0-based throughout the library: window 0 is the first
// slice of the study interval and window K-1 is the prediction target.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pathlets {

struct ListeningEvent {
  std::string user;
  std::int64_t ts = 0;
  std::string genre;
  std::optional<std::string> track;

  bool operator==(const ListeningEvent&) const = default;
};

/// Events per user id, each list sorted by timestamp (stable on ties).
using HistoryMap = std::map<std::string, std::vector<ListeningEvent>>;

struct WindowConfig {
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  std::size_t K = 2;

  /// Throws UsageError unless t_start < t_end and K >= 2.
  void validate() const;
  bool contains(std::int64_t ts) const { return ts >= t_start && ts <= t_end; }
  /// Window of a timestamp inside [t_start, t_end]; t_end maps to K-1.
  std::size_t window_of(std::int64_t ts) const;
};

enum class EventFormat { kCsv, kJsonl };

/// Column mapping for logs that do not use the canonical user,ts,genre,track
/// header. Timestamps are epoch seconds unless `iso8601_ts` is set.
struct EventSchema {
  std::string user_field = "user";
  std::string ts_field = "ts";
  std::string genre_field = "genre";
  std::string track_field = "track";
  char delimiter = ',';
  bool iso8601_ts = false;
};

struct LoadResult {
  HistoryMap histories;
  std::size_t n_events = 0;
  std::size_t skipped_out_of_range = 0;
};

/// Throws DataError("<path>:<line>: ...") on malformed records.
LoadResult load_events(const std::filesystem::path& path, EventFormat format,
                       const std::optional<WindowConfig>& window = std::nullopt,
                       const EventSchema& schema = {});

/// Parses "2022-01-31T12:00:00Z" style UTC timestamps (fractional seconds
/// and a trailing Z are accepted).
std::optional<std::int64_t> parse_iso8601(const std::string& text);

/// Per-user, per-window genre sequences in listening order.
struct WindowedHistories {
  std::vector<std::string> users;   // sorted ids
  std::vector<std::string> genres;  // vocabulary, index = genre id
  std::size_t K = 0;
  // sequences[u][k] lists genre indices of u's events in window k.
  std::vector<std::vector<std::vector<std::uint32_t>>> sequences;

  std::size_t n_users() const { return users.size(); }
  std::size_t n_genres() const { return genres.size(); }
  std::span<const std::uint32_t> window(std::size_t u, std::size_t k) const {
    return sequences[u][k];
  }
  /// The first `k` windows only.
  WindowedHistories truncated(std::size_t k) const;
};

/// Genre vocabulary: sorted observed genres, or the explicit list when given
/// (an event whose genre is absent from it is a DataError).
WindowedHistories slice_windows(const HistoryMap& histories, const WindowConfig& cfg,
                                const std::optional<std::vector<std::string>>&
                                    vocabulary = std::nullopt);

/// X[k][u][g]: share of u's window-k events that have genre g. Rows of empty
/// windows are all zero.
class AllocationTensor {
 public:
  AllocationTensor() = default;
  AllocationTensor(std::size_t K, std::vector<std::string> users,
                   std::vector<std::string> genres);

  std::size_t K() const { return K_; }
  std::size_t n_users() const { return users_.size(); }
  std::size_t n_genres() const { return genres_.size(); }
  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& genres() const { return genres_; }

  double& at(std::size_t k, std::size_t u, std::size_t g) {
    return values_[(k * n_users() + u) * n_genres() + g];
  }
  double at(std::size_t k, std::size_t u, std::size_t g) const {
    return values_[(k * n_users() + u) * n_genres() + g];
  }
  std::span<double> row(std::size_t k, std::size_t u) {
    return {values_.data() + (k * n_users() + u) * n_genres(), n_genres()};
  }
  std::span<const double> row(std::size_t k, std::size_t u) const {
    return {values_.data() + (k * n_users() + u) * n_genres(), n_genres()};
  }
  bool row_empty(std::size_t k, std::size_t u) const;

  std::optional<std::size_t> user_index(const std::string& id) const;
  std::optional<std::size_t> genre_index(const std::string& id) const;

  AllocationTensor truncated(std::size_t k) const;

 private:
  std::size_t K_ = 0;
  std::vector<std::string> users_;
  std::vector<std::string> genres_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> user_lookup_;
  std::unordered_map<std::string, std::size_t> genre_lookup_;
};

AllocationTensor allocation(const WindowedHistories& histories);

/// Counts of genres heard immediately before or after each event of `genre`
/// in one window's sequence.
std::vector<std::uint32_t> colistening(std::span<const std::uint32_t> window_sequence,
                                       std::uint32_t genre, std::size_t n_genres);

enum class CandidateKind { kAppearance, kDisappearance };

struct CandidatePair {
  std::uint32_t user = 0;
  std::uint32_t genre = 0;
  CandidateKind kind = CandidateKind::kAppearance;

  auto operator<=>(const CandidatePair&) const = default;
};

struct CandidateSets {
  std::vector<CandidatePair> appearance;     // A+
  std::vector<CandidatePair> disappearance;  // A-
};

/// A+ and A- relative to the tensor's last window: the penultimate window
/// K-2 plays the role of "previous". Requires K >= 2.
CandidateSets candidate_sets(const AllocationTensor& X);

}  // namespace pathlets
