// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

#include <boost/tokenizer.hpp>
#include <nlohmann/json.hpp>

#include "pathlets/common.hpp"

namespace pathlets {

namespace {

std::string located(const std::filesystem::path& path, std::size_t line,
                    const std::string& msg) {
  return path.string() + ":" + std::to_string(line) + ": " + msg;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  std::int64_t v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return v;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

std::vector<std::string> split_csv(const std::string& line, char delimiter) {
  using Sep = boost::escaped_list_separator<char>;
  boost::tokenizer<Sep> tok(line, Sep('\\', delimiter, '"'));
  return {tok.begin(), tok.end()};
}

void add_event(LoadResult& out, ListeningEvent ev,
               const std::optional<WindowConfig>& window) {
  if (window && !window->contains(ev.ts)) {
    ++out.skipped_out_of_range;
    return;
  }
  ++out.n_events;
  out.histories[ev.user].push_back(std::move(ev));
}

std::int64_t parse_ts(const std::string& raw, const EventSchema& schema,
                      const std::filesystem::path& path, std::size_t line) {
  const auto v = schema.iso8601_ts ? parse_iso8601(raw) : parse_int(raw);
  if (!v) throw DataError(located(path, line, "bad timestamp '" + raw + "'"));
  return *v;
}

void load_csv(std::istream& in, const std::filesystem::path& path,
              const std::optional<WindowConfig>& window, const EventSchema& schema,
              LoadResult& out) {
  std::string line;
  if (!std::getline(in, line)) return;
  strip_cr(line);
  const auto header = split_csv(line, schema.delimiter);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto user_col = column(schema.user_field);
  const auto ts_col = column(schema.ts_field);
  const auto genre_col = column(schema.genre_field);
  const auto track_col = column(schema.track_field);
  if (!user_col || !ts_col || !genre_col) {
    throw DataError(located(path, 1, "header must name columns '" + schema.user_field +
                                         "', '" + schema.ts_field + "', '" +
                                         schema.genre_field + "'"));
  }
  const std::size_t needed = std::max({*user_col, *ts_col, *genre_col}) + 1;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv(line, schema.delimiter);
    } catch (const boost::escaped_list_error& e) {
      throw DataError(located(path, line_no, e.what()));
    }
    if (fields.size() < needed) {
      throw DataError(located(path, line_no, "expected at least " +
                                                 std::to_string(needed) + " fields"));
    }
    ListeningEvent ev;
    ev.user = fields[*user_col];
    ev.ts = parse_ts(fields[*ts_col], schema, path, line_no);
    ev.genre = fields[*genre_col];
    if (ev.user.empty()) throw DataError(located(path, line_no, "empty user"));
    if (ev.genre.empty()) throw DataError(located(path, line_no, "empty genre"));
    if (track_col && *track_col < fields.size() && !fields[*track_col].empty()) {
      ev.track = fields[*track_col];
    }
    add_event(out, std::move(ev), window);
  }
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return v.dump();
}

void load_jsonl(std::istream& in, const std::filesystem::path& path,
                const std::optional<WindowConfig>& window, const EventSchema& schema,
                LoadResult& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(located(path, line_no, e.what()));
    }
    if (!rec.is_object() || !rec.contains(schema.user_field) ||
        !rec.contains(schema.ts_field) || !rec.contains(schema.genre_field)) {
      throw DataError(located(path, line_no, "record needs user, ts and genre"));
    }
    ListeningEvent ev;
    ev.user = json_scalar(rec[schema.user_field]);
    const auto& ts = rec[schema.ts_field];
    if (ts.is_number_integer()) {
      ev.ts = ts.get<std::int64_t>();
    } else if (ts.is_string()) {
      ev.ts = parse_ts(ts.get<std::string>(), schema, path, line_no);
    } else {
      throw DataError(located(path, line_no, "ts must be an integer"));
    }
    ev.genre = json_scalar(rec[schema.genre_field]);
    if (ev.user.empty()) throw DataError(located(path, line_no, "empty user"));
    if (ev.genre.empty()) throw DataError(located(path, line_no, "empty genre"));
    if (rec.contains(schema.track_field) && !rec[schema.track_field].is_null()) {
      ev.track = json_scalar(rec[schema.track_field]);
    }
    add_event(out, std::move(ev), window);
  }
}

}  // namespace

void WindowConfig::validate() const {
  if (!(t_start < t_end)) throw UsageError("window config needs t_start < t_end");
  if (K < 2) throw UsageError("window config needs K >= 2");
}

std::size_t WindowConfig::window_of(std::int64_t ts) const {
  if (ts >= t_end) return K - 1;
  const __int128 offset = static_cast<__int128>(ts - t_start);
  const __int128 span = static_cast<__int128>(t_end - t_start);
  const auto k = static_cast<std::size_t>(offset * static_cast<__int128>(K) / span);
  return std::min(k, K - 1);
}

std::optional<std::int64_t> parse_iso8601(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double s = 0.0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%lf%n", &y, &mo, &d, &h, &mi, &s,
                  &consumed) < 6) {
    return std::nullopt;
  }
  const std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z")) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s >= 61) {
    return std::nullopt;
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 +
         static_cast<std::int64_t>(s);
}

LoadResult load_events(const std::filesystem::path& path, EventFormat format,
                       const std::optional<WindowConfig>& window,
                       const EventSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open event log " + path.string());
  LoadResult out;
  if (format == EventFormat::kCsv) {
    load_csv(in, path, window, schema, out);
  } else {
    load_jsonl(in, path, window, schema, out);
  }
  for (auto& [user, events] : out.histories) {
    std::stable_sort(events.begin(), events.end(),
                     [](const ListeningEvent& a, const ListeningEvent& b) {
                       return a.ts < b.ts;
                     });
  }
  return out;
}

WindowedHistories WindowedHistories::truncated(std::size_t k) const {
  if (k > K) throw UsageError("cannot truncate to more windows than available");
  WindowedHistories out;
  out.users = users;
  out.genres = genres;
  out.K = k;
  out.sequences.reserve(sequences.size());
  for (const auto& per_user : sequences) {
    out.sequences.emplace_back(per_user.begin(),
                               per_user.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

WindowedHistories slice_windows(const HistoryMap& histories, const WindowConfig& cfg,
                                const std::optional<std::vector<std::string>>& vocabulary) {
  cfg.validate();
  WindowedHistories out;
  out.K = cfg.K;
  if (vocabulary) {
    out.genres = *vocabulary;
  } else {
    std::set<std::string> seen;
    for (const auto& [user, events] : histories) {
      for (const auto& ev : events) seen.insert(ev.genre);
    }
    out.genres.assign(seen.begin(), seen.end());
  }
  std::unordered_map<std::string, std::uint32_t> genre_id;
  for (std::size_t g = 0; g < out.genres.size(); ++g) {
    genre_id.emplace(out.genres[g], static_cast<std::uint32_t>(g));
  }
  for (const auto& [user, events] : histories) {
    out.users.push_back(user);
    auto& per_window = out.sequences.emplace_back(cfg.K);
    for (const auto& ev : events) {
      if (!cfg.contains(ev.ts)) {
        throw DataError("event of user " + user + " at " + std::to_string(ev.ts) +
                        " lies outside the study interval");
      }
      const auto it = genre_id.find(ev.genre);
      if (it == genre_id.end()) {
        throw DataError("genre '" + ev.genre + "' is not in the vocabulary");
      }
      per_window[cfg.window_of(ev.ts)].push_back(it->second);
    }
  }
  return out;
}

AllocationTensor::AllocationTensor(std::size_t K, std::vector<std::string> users,
                                   std::vector<std::string> genres)
    : K_(K), users_(std::move(users)), genres_(std::move(genres)),
      values_(K_ * users_.size() * genres_.size(), 0.0) {
  for (std::size_t u = 0; u < users_.size(); ++u) user_lookup_.emplace(users_[u], u);
  for (std::size_t g = 0; g < genres_.size(); ++g) genre_lookup_.emplace(genres_[g], g);
}

bool AllocationTensor::row_empty(std::size_t k, std::size_t u) const {
  const auto r = row(k, u);
  return std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
}

std::optional<std::size_t> AllocationTensor::user_index(const std::string& id) const {
  const auto it = user_lookup_.find(id);
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> AllocationTensor::genre_index(const std::string& id) const {
  const auto it = genre_lookup_.find(id);
  if (it == genre_lookup_.end()) return std::nullopt;
  return it->second;
}

AllocationTensor AllocationTensor::truncated(std::size_t k) const {
  if (k > K_) throw UsageError("cannot truncate to more windows than available");
  AllocationTensor out(k, users_, genres_);
  std::copy(values_.begin(),
            values_.begin() + static_cast<std::ptrdiff_t>(k * n_users() * n_genres()),
            out.values_.begin());
  return out;
}

AllocationTensor allocation(const WindowedHistories& histories) {
  AllocationTensor X(histories.K, histories.users, histories.genres);
  const auto n_users = static_cast<std::ptrdiff_t>(histories.n_users());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t u = 0; u < n_users; ++u) {
    const auto uu = static_cast<std::size_t>(u);
    for (std::size_t k = 0; k < histories.K; ++k) {
      const auto seq = histories.window(uu, k);
      if (seq.empty()) continue;
      auto row = X.row(k, uu);
      for (auto g : seq) row[g] += 1.0;
      const double n = static_cast<double>(seq.size());
      for (auto& v : row) v /= n;
    }
  }
  return X;
}

std::vector<std::uint32_t> colistening(std::span<const std::uint32_t> seq,
                                       std::uint32_t genre, std::size_t n_genres) {
  std::vector<std::uint32_t> counts(n_genres, 0);
  for (std::size_t j = 0; j < seq.size(); ++j) {
    if (seq[j] != genre) continue;
    if (j > 0) ++counts[seq[j - 1]];
    if (j + 1 < seq.size()) ++counts[seq[j + 1]];
  }
  return counts;
}

CandidateSets candidate_sets(const AllocationTensor& X) {
  if (X.K() < 2) throw UsageError("candidate sets need at least two windows");
  CandidateSets out;
  const std::size_t prev = X.K() - 2;
  for (std::size_t u = 0; u < X.n_users(); ++u) {
    for (std::size_t g = 0; g < X.n_genres(); ++g) {
      const auto uu = static_cast<std::uint32_t>(u);
      const auto gg = static_cast<std::uint32_t>(g);
      if (X.at(prev, u, g) > 0.0) {
        out.disappearance.push_back({uu, gg, CandidateKind::kDisappearance});
        continue;
      }
      for (std::size_t k = 0; k < prev; ++k) {
        if (X.at(k, u, g) > 0.0) {
          out.appearance.push_back({uu, gg, CandidateKind::kAppearance});
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace pathlets
