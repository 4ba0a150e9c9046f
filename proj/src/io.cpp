// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/io.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <boost/tokenizer.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace pathlets::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Writes to a sibling temporary and renames, so readers never see a partial file.
template <typename Fn>
void write_atomic(const fs::path& path, Fn&& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw DataError("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

[[noreturn]] void bad_line(const fs::path& path, std::size_t line, const std::string& msg) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

template <typename Fn>
void for_each_json_line(const fs::path& path, Fn&& fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      bad_line(path, n, e.what());
    }
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + '"';
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_line(path, line, "not a number: '" + s + "'");
  return v;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kData, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericalError("cannot format double");
  return {buf, ptr};
}

std::string kind_name(CandidateKind kind) {
  return kind == CandidateKind::kAppearance ? "appearance" : "disappearance";
}

CandidateKind parse_kind(const std::string& name) {
  if (name == "appearance") return CandidateKind::kAppearance;
  if (name == "disappearance") return CandidateKind::kDisappearance;
  throw DataError("unknown candidate kind '" + name + "'");
}

std::string rank_label(const RankSeq& ranks) {
  std::string out;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(ranks[i]);
  }
  return out;
}

TrajectoryRecord to_record(const RankTrajectory& traj, const std::vector<std::string>& users,
                           const std::vector<std::string>& genres) {
  TrajectoryRecord rec;
  rec.user = users.at(traj.anchor.user);
  rec.genre = genres.at(traj.anchor.genre);
  rec.kind = traj.anchor.kind;
  rec.ranks = traj.ranks;
  rec.rank_map.reserve(traj.rank_map.size());
  for (auto g : traj.rank_map.genre_of_rank) rec.rank_map.push_back(genres.at(g));
  return rec;
}

void write_trajectories(const fs::path& path, const std::vector<TrajectoryRecord>& records) {
  write_atomic(path, [&](std::ostream& out) {
    for (const auto& r : records) {
      json j{{"user", r.user}, {"genre", r.genre}, {"kind", kind_name(r.kind)},
             {"ranks", r.ranks}, {"rank_map", r.rank_map}};
      out << j.dump() << '\n';
    }
  });
}

std::vector<TrajectoryRecord> read_trajectories(const fs::path& path) {
  std::vector<TrajectoryRecord> out;
  for_each_json_line(path, [&](const json& j) {
    TrajectoryRecord r;
    r.user = j.at("user").get<std::string>();
    r.genre = j.at("genre").get<std::string>();
    r.kind = parse_kind(j.at("kind").get<std::string>());
    r.ranks = j.at("ranks").get<RankSeq>();
    r.rank_map = j.value("rank_map", std::vector<std::string>{});
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<RankSeq> ranks_of(const std::vector<TrajectoryRecord>& records) {
  std::vector<RankSeq> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.ranks);
  return out;
}

void write_candidates(const fs::path& path, const std::vector<Pathlet>& candidates) {
  write_atomic(path, [&](std::ostream& out) {
    for (const auto& p : candidates) {
      out << json{{"ranks", p.ranks}, {"support", p.support}}.dump() << '\n';
    }
  });
}

std::vector<Pathlet> read_candidates(const fs::path& path) {
  std::vector<Pathlet> out;
  for_each_json_line(path, [&](const json& j) {
    out.push_back({j.at("ranks").get<RankSeq>(), j.at("support").get<std::size_t>()});
  });
  return out;
}

void write_dictionary(const fs::path& path, const PathletDictionary& dictionary) {
  write_atomic(path, [&](std::ostream& out) {
    for (std::size_t i = 0; i < dictionary.size(); ++i) {
      const auto& p = dictionary.pathlets[i];
      // Influence goes through format_double so the text round-trips exactly.
      out << "{\"ranks\":" << json(p.ranks).dump()
          << ",\"influence\":" << format_double(dictionary.influence[i])
          << ",\"support\":" << p.support << "}\n";
    }
  });
}

PathletDictionary read_dictionary(const fs::path& path) {
  PathletDictionary d;
  for_each_json_line(path, [&](const json& j) {
    d.pathlets.push_back({j.at("ranks").get<RankSeq>(), j.at("support").get<std::size_t>()});
    d.influence.push_back(j.at("influence").get<double>());
  });
  return d;
}

void write_sequences(const fs::path& path, const std::vector<RankSeq>& seqs) {
  write_atomic(path, [&](std::ostream& out) {
    for (const auto& s : seqs) out << json(s).dump() << '\n';
  });
}

std::vector<RankSeq> read_sequences(const fs::path& path) {
  std::vector<RankSeq> out;
  for_each_json_line(path, [&](const json& j) { out.push_back(j.get<RankSeq>()); });
  return out;
}

void write_windows(const fs::path& path, const WindowedHistories& h) {
  for (const auto& g : h.genres) {
    if (g.find_first_of("\t\n") != std::string::npos) {
      throw DataError("genre name contains a tab or newline: " + g);
    }
  }
  write_atomic(path, [&](std::ostream& out) {
    out << "K\t" << h.K << '\n' << "genres";
    for (const auto& g : h.genres) out << '\t' << g;
    out << '\n' << "users";
    for (const auto& u : h.users) out << '\t' << u;
    out << '\n';
    for (std::size_t u = 0; u < h.n_users(); ++u) {
      for (std::size_t k = 0; k < h.K; ++k) {
        const auto seq = h.window(u, k);
        if (seq.empty()) continue;
        out << u << '\t' << k << '\t';
        for (std::size_t i = 0; i < seq.size(); ++i) out << (i ? " " : "") << seq[i];
        out << '\n';
      }
    }
  });
}

WindowedHistories read_windows(const fs::path& path) {
  auto in = open_in(path);
  WindowedHistories h;
  std::string line;
  std::size_t n = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    for (;;) {
      const auto tab = s.find('\t', pos);
      parts.push_back(s.substr(pos, tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    return parts;
  };
  auto header = [&](const char* key) {
    if (!std::getline(in, line)) bad_line(path, n + 1, std::string("missing ") + key + " line");
    ++n;
    auto parts = split(line);
    if (parts.front() != key) bad_line(path, n, std::string("expected ") + key);
    parts.erase(parts.begin());
    return parts;
  };
  const auto k_parts = header("K");
  if (k_parts.size() != 1) bad_line(path, n, "malformed K line");
  h.K = static_cast<std::size_t>(parse_double(k_parts[0], path, n));
  h.genres = header("genres");
  h.users = header("users");
  h.sequences.assign(h.users.size(), std::vector<std::vector<std::uint32_t>>(h.K));
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto parts = split(line);
    if (parts.size() != 3) bad_line(path, n, "expected user, window and genres");
    const auto u = static_cast<std::size_t>(parse_double(parts[0], path, n));
    const auto k = static_cast<std::size_t>(parse_double(parts[1], path, n));
    if (u >= h.users.size() || k >= h.K) bad_line(path, n, "index out of range");
    std::istringstream gs(parts[2]);
    std::uint32_t g = 0;
    while (gs >> g) {
      if (g >= h.genres.size()) bad_line(path, n, "genre index out of range");
      h.sequences[u][k].push_back(g);
    }
  }
  return h;
}

void write_csv(const fs::path& path, const Table& table) {
  write_atomic(path, [&](std::ostream& out) {
    auto emit = [&](const std::vector<std::string>& row) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
      out << '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
  });
}

Table read_csv(const fs::path& path) {
  auto in = open_in(path);
  Table t;
  std::string line;
  std::size_t n = 0;
  const boost::escaped_list_separator<char> sep('\\', ',', '"');
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      boost::tokenizer<boost::escaped_list_separator<char>> tok(line, sep);
      fields.assign(tok.begin(), tok.end());
    } catch (const boost::escaped_list_error& e) {
      bad_line(path, n, e.what());
    }
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size()) bad_line(path, n, "wrong number of fields");
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty()) throw DataError(path.string() + ": empty table");
  return t;
}

void write_matrix(const fs::path& path, const std::string& corner,
                  const std::vector<std::string>& row_labels,
                  const std::vector<std::string>& col_labels, const Matrix& m) {
  if (row_labels.size() != m.rows() || col_labels.size() != m.cols()) {
    throw UsageError("matrix labels do not match its shape");
  }
  Table t;
  t.header.push_back(corner);
  t.header.insert(t.header.end(), col_labels.begin(), col_labels.end());
  t.rows.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<std::string> row{row_labels[r]};
    for (double v : m.row(r)) row.push_back(format_double(v));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

Matrix read_matrix(const fs::path& path, std::vector<std::string>* row_labels,
                   std::vector<std::string>* col_labels) {
  const auto t = read_csv(path);
  Matrix m(t.rows.size(), t.header.size() - 1);
  if (col_labels) col_labels->assign(t.header.begin() + 1, t.header.end());
  if (row_labels) row_labels->clear();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (row_labels) row_labels->push_back(t.rows[r][0]);
    for (std::size_t c = 1; c < t.header.size(); ++c) {
      m(r, c - 1) = parse_double(t.rows[r][c], path, r + 2);
    }
  }
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  write_atomic(path, [&](std::ostream& out) { out << text; });
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace pathlets::io
