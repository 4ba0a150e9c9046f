// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathlets/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pathlets/embed.hpp"
#include "pathlets/evaluate.hpp"
#include "pathlets/io.hpp"
#include "pathlets/rng.hpp"
#include "pathlets/trajectory.hpp"

namespace pathlets {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

template <typename T>
struct is_optional : std::false_type {};
template <typename T>
struct is_optional<std::optional<T>> : std::true_type {};

std::string format_name(EventFormat f) { return f == EventFormat::kCsv ? "csv" : "jsonl"; }
std::string source_name(DataSource s) { return s == DataSource::kEvents ? "events" : "synth"; }

template <typename T>
json encode(const T& v) {
  if constexpr (std::is_same_v<T, fs::path>) {
    return v.string();
  } else if constexpr (std::is_same_v<T, char>) {
    return std::string(1, v);
  } else if constexpr (std::is_same_v<T, EventFormat>) {
    return format_name(v);
  } else if constexpr (std::is_same_v<T, DataSource>) {
    return source_name(v);
  } else if constexpr (is_optional<T>::value) {
    return v ? json(*v) : json(nullptr);
  } else {
    return json(v);
  }
}

template <typename T>
void parse_text(const std::string& key, const std::string& s, T& out) {
  auto fail = [&](const char* what) {
    throw UsageError("config key " + key + ": expected " + what + ", got '" + s + "'");
  };
  if constexpr (std::is_same_v<T, bool>) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
      out = true;
    } else if (s == "false" || s == "0" || s == "no" || s == "off") {
      out = false;
    } else {
      fail("a boolean");
    }
  } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, char>) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("an integer");
    out = v;
  } else if constexpr (std::is_same_v<T, double>) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("a number");
    out = v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    out = s;
  } else if constexpr (std::is_same_v<T, char>) {
    if (s == "tab" || s == "\\t") {
      out = '\t';
    } else if (s.size() == 1) {
      out = s[0];
    } else {
      fail("a single character");
    }
  } else if constexpr (std::is_same_v<T, fs::path>) {
    out = s;
  } else if constexpr (std::is_same_v<T, EventFormat>) {
    if (s == "csv") {
      out = EventFormat::kCsv;
    } else if (s == "jsonl") {
      out = EventFormat::kJsonl;
    } else {
      fail("csv or jsonl");
    }
  } else if constexpr (std::is_same_v<T, DataSource>) {
    if (s == "events") {
      out = DataSource::kEvents;
    } else if (s == "synth") {
      out = DataSource::kSynth;
    } else {
      fail("events or synth");
    }
  } else if constexpr (is_optional<T>::value) {
    if (s.empty() || s == "auto") {
      out.reset();
      return;
    }
    typename T::value_type v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) {
      out = v;
    } else if (auto iso = parse_iso8601(s)) {
      out = *iso;
    } else {
      fail("epoch seconds, an ISO 8601 time or auto");
    }
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    out.clear();
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      double v = 0.0;
      parse_text(key, item, v);
      out.push_back(v);
    }
  } else {
    static_assert(sizeof(T) == 0, "unsupported config field type");
  }
}

template <typename T>
void decode(const std::string& key, const json& j, T& out) {
  try {
    if constexpr (std::is_same_v<T, fs::path> || std::is_same_v<T, char> ||
                  std::is_same_v<T, EventFormat> || std::is_same_v<T, DataSource>) {
      parse_text(key, j.get<std::string>(), out);
    } else if constexpr (is_optional<T>::value) {
      if (j.is_null()) {
        out.reset();
      } else {
        out = j.get<typename T::value_type>();
      }
    } else {
      out = j.get<T>();
    }
  } catch (const json::exception& e) {
    throw UsageError("config key " + key + ": " + e.what());
  }
}

// Every config field, once. The visitor sees (section, key, field).
template <typename C, typename V>
void visit_fields(C& c, V&& v) {
  v("dataset", "source", c.source);
  v("dataset", "path", c.dataset);
  v("dataset", "format", c.format);
  v("dataset", "user_field", c.schema.user_field);
  v("dataset", "ts_field", c.schema.ts_field);
  v("dataset", "genre_field", c.schema.genre_field);
  v("dataset", "track_field", c.schema.track_field);
  v("dataset", "delimiter", c.schema.delimiter);
  v("dataset", "iso8601_ts", c.schema.iso8601_ts);
  v("windows", "K", c.K);
  v("windows", "t_start", c.t_start);
  v("windows", "t_end", c.t_end);
  v("trajectories", "n_per_pair", c.n_per_pair);
  v("trajectories", "total", c.total);
  v("trajectories", "heldout", c.heldout);
  v("trajectories", "seed", c.seed);
  v("mining", "max_nodes", c.mining.max_nodes);
  v("mining", "top_m", c.mining.top_m);
  v("learn", "lambda", c.learn.lambda);
  v("learn", "learning_rate", c.learn.learning_rate);
  v("learn", "max_epochs", c.learn.max_epochs);
  v("learn", "patience", c.learn.patience);
  v("learn", "stagnation_tol", c.learn.stagnation_tol);
  v("learn", "top_n", c.learn.top_n);
  v("learn", "seed", c.learn.seed);
  v("forest", "n_trees", c.forest.n_trees);
  v("forest", "max_depth", c.forest.max_depth);
  v("forest", "min_samples_leaf", c.forest.min_samples_leaf);
  v("forest", "max_features", c.forest.max_features);
  v("forest", "bootstrap", c.forest.bootstrap);
  v("forest", "seed", c.forest.seed);
  v("nmf", "rank", c.nmf.rank);
  v("nmf", "iterations", c.nmf.iterations);
  v("nmf", "seed", c.nmf.seed);
  v("nmf", "tolerance", c.nmf.tolerance);
  v("analyze", "target_genre", c.target_genre);
  v("sweep", "lambdas", c.sweep_lambdas);
  v("synth", "n_pathlets", c.synth.n_pathlets);
  v("synth", "min_length", c.synth.min_length);
  v("synth", "max_length", c.synth.max_length);
  v("synth", "alphabet", c.synth.alphabet);
  v("synth", "n_trajectories", c.synth.n_trajectories);
  v("synth", "trajectory_length", c.synth.trajectory_length);
  v("synth", "noise", c.synth.noise);
  v("synth", "seed", c.synth.seed);
  v("output", "dir", c.output_dir);
}

void resolve_paths(RunConfig& c, const fs::path& base) {
  auto fix = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = (base / p).lexically_normal();
  };
  fix(c.dataset);
  fix(c.output_dir);
}

struct StageInfo {
  std::vector<std::string> sections;
  std::vector<Stage> upstream;
};

bool needs_events(Stage s) {
  switch (s) {
    case Stage::kIngest:
    case Stage::kTrajectories:
    case Stage::kEmbed:
    case Stage::kPredict:
    case Stage::kEvaluate:
    case Stage::kAnalyze:
      return true;
    default:
      return false;
  }
}

std::uint64_t stage_seed(const RunConfig& c, Stage s) {
  switch (s) {
    case Stage::kLearn:
    case Stage::kSweep:
      return c.learn.seed;
    case Stage::kPredict:
      return c.forest.seed;
    case Stage::kSynth:
      return c.synth.seed;
    default:
      return c.seed;
  }
}

std::vector<std::string> pair_row(const CandidatePair& p, const std::vector<std::string>& users,
                                  const std::vector<std::string>& genres) {
  return {users.at(p.user), genres.at(p.genre), io::kind_name(p.kind)};
}

void write_features(const fs::path& path, const FeatureTable& t,
                    const std::vector<std::string>& users, const std::vector<std::string>& genres,
                    const PathletDictionary& dict) {
  io::Table table;
  table.header = {"user", "genre", "kind"};
  const bool labelled = !t.labels.empty();
  if (labelled) table.header.push_back("label");
  for (const auto& p : dict.pathlets) table.header.push_back(io::rank_label(p.ranks));
  for (std::size_t i = 0; i < t.pairs.size(); ++i) {
    auto row = pair_row(t.pairs[i], users, genres);
    if (labelled) row.push_back(std::to_string(t.labels[i]));
    for (double v : t.features.row(i)) row.push_back(io::format_double(v));
    table.rows.push_back(std::move(row));
  }
  io::write_csv(path, table);
}

FeatureTable read_features(const fs::path& path, const AllocationTensor& X,
                           std::size_t dimension) {
  const auto t = io::read_csv(path);
  const bool labelled = t.header.size() > 3 && t.header[3] == "label";
  const std::size_t first = labelled ? 4 : 3;
  if (t.header.size() != first + dimension) {
    throw DataError(path.string() + ": feature count does not match the dictionary");
  }
  FeatureTable out;
  out.features = Matrix(t.rows.size(), dimension);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto u = X.user_index(r[0]);
    const auto g = X.genre_index(r[1]);
    if (!u || !g) throw DataError(path.string() + ": unknown user or genre in row " + std::to_string(i + 2));
    out.pairs.push_back({static_cast<std::uint32_t>(*u), static_cast<std::uint32_t>(*g),
                         io::parse_kind(r[2])});
    if (labelled) out.labels.push_back(r[3] == "1" ? 1 : 0);
    for (std::size_t c = 0; c < dimension; ++c) {
      out.features(i, c) = std::stod(r[first + c]);
    }
  }
  return out;
}

std::vector<LabeledPair> labelled_of_kind(const FeatureTable& t, CandidateKind kind) {
  std::vector<LabeledPair> out;
  for (std::size_t i = 0; i < t.pairs.size(); ++i) {
    if (t.pairs[i].kind != kind) continue;
    const auto row = t.features.row(i);
    out.push_back({t.pairs[i], {row.begin(), row.end()}, t.labels.at(i)});
  }
  return out;
}

std::vector<PairFeatures> features_of_kind(const FeatureTable& t, CandidateKind kind) {
  std::vector<PairFeatures> out;
  for (std::size_t i = 0; i < t.pairs.size(); ++i) {
    if (t.pairs[i].kind != kind) continue;
    const auto row = t.features.row(i);
    out.push_back({t.pairs[i], {row.begin(), row.end()}});
  }
  return out;
}

void write_prediction(const fs::path& path, const AllocationTensor& X, const Matrix& m) {
  io::write_matrix(path, "user", X.users(), X.genres(), m);
}

PredictionMatrix read_prediction(const fs::path& path, const AllocationTensor& X) {
  std::vector<std::string> rows, cols;
  PredictionMatrix p{io::read_matrix(path, &rows, &cols)};
  if (rows != X.users() || cols != X.genres()) {
    throw DataError(path.string() + ": users or genres differ from the ingested windows");
  }
  return p;
}

std::vector<RankSeq> heldout_or_training(const fs::path& heldout,
                                         const std::vector<RankSeq>& training, bool& used_heldout) {
  auto held = io::ranks_of(io::read_trajectories(heldout));
  used_heldout = !held.empty();
  return used_heldout ? held : training;
}

json metrics_json(const DictionaryMetrics& m) {
  return {{"cover_ratio", m.cover_ratio},
          {"code_sparsity", m.code_sparsity},
          {"mean_pathlets_per_trajectory", m.mean_pathlets_per_trajectory},
          {"n_trajectories", m.n_trajectories}};
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

RunConfig RunConfig::load_ini(const fs::path& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(e.what());
  }
  RunConfig c;
  std::set<std::pair<std::string, std::string>> known;
  visit_fields(c, [&](const char* section, const char* key, auto& field) {
    known.emplace(section, key);
    const auto child = pt.get_child_optional(section);
    if (!child) return;
    const auto text = child->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
    if (text) parse_text(std::string(section) + "." + key, *text, field);
  });
  for (const auto& [section, tree] : pt) {
    if (tree.empty() && !tree.data().empty()) {
      throw UsageError("config key '" + section + "' must sit inside a section");
    }
    for (const auto& [key, value] : tree) {
      if (!known.count({section, key})) throw UsageError("unknown config key " + section + "." + key);
    }
  }
  resolve_paths(c, fs::absolute(path).parent_path());
  c.validate();
  return c;
}

RunConfig RunConfig::load_json(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  if (j.contains("config") && j.contains("stage")) j = j.at("config");
  auto c = from_json(j);
  resolve_paths(c, fs::absolute(path).parent_path());
  c.validate();
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("config file not found: " + path.string());
  return path.extension() == ".json" ? load_json(path) : load_ini(path);
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  visit_fields(c, [&](const char* section, const char* key, auto& field) {
    if (j.contains(section) && j.at(section).contains(key)) {
      decode(std::string(section) + "." + key, j.at(section).at(key), field);
    }
  });
  return c;
}

json RunConfig::to_json() const {
  json j = json::object();
  visit_fields(*this, [&](const char* section, const char* key, const auto& field) {
    j[section][key] = encode(field);
  });
  return j;
}

void RunConfig::validate() const {
  if (K < 3) throw UsageError("K must be at least 3: two windows for training plus a target");
  if (t_start && t_end && *t_start >= *t_end) throw UsageError("t_start must precede t_end");
  if (n_per_pair == 0 || total == 0) throw UsageError("trajectory counts must be positive");
  if (mining.max_nodes < 2 || mining.top_m == 0) throw UsageError("invalid mining settings");
  learn.validate();
  forest.validate();
  if (nmf.rank == 0) throw UsageError("NMF rank must be positive");
  if (source == DataSource::kSynth) synth.validate();
  for (double l : sweep_lambdas) {
    if (!(l >= 0.0)) throw UsageError("sweep lambdas must be non-negative");
  }
}

// ---------------------------------------------------------------- features

FeatureTable pair_features(const WindowedHistories& view, const PathletDictionary& dictionary,
                           std::size_t n_per_pair, std::uint64_t seed) {
  if (view.K < 3) throw UsageError("feature view needs at least three windows");
  const auto X = allocation(view);
  const auto cands = candidate_sets(X);
  FeatureTable t;
  t.pairs = cands.appearance;
  t.pairs.insert(t.pairs.end(), cands.disappearance.begin(), cands.disappearance.end());
  t.features = Matrix(t.pairs.size(), dictionary.size());
  const TrajectorySampler sampler(view, X);
  const Embedder embedder(dictionary);

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < t.pairs.size(); ++i) {
    try {
      std::vector<TrajectoryEmbedding> embs;
      embs.reserve(n_per_pair);
      for (const auto& traj : sampler.sample_ranked(t.pairs[i], n_per_pair, seed)) {
        embs.push_back(embedder.embed(traj.ranks));
      }
      const auto mean = embed_pair(embs);
      std::copy(mean.begin(), mean.end(), t.features.row(i).begin());
    } catch (...) {
#pragma omp critical(pathlets_features)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return t;
}

void label_features(FeatureTable& table, const WindowedHistories& view) {
  const auto X = allocation(view);
  table.labels.resize(table.pairs.size());
  for (std::size_t i = 0; i < table.pairs.size(); ++i) {
    table.labels[i] = label_for(table.pairs[i], X);
  }
}

// ---------------------------------------------------------------- stages

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::kIngest: return "ingest";
    case Stage::kTrajectories: return "trajectories";
    case Stage::kMine: return "mine";
    case Stage::kLearn: return "learn";
    case Stage::kEmbed: return "embed";
    case Stage::kPredict: return "predict";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kAnalyze: return "analyze";
    case Stage::kSweep: return "sweep";
    case Stage::kSynth: return "synth";
  }
  return "?";
}

std::optional<Stage> parse_stage(const std::string& name) {
  for (auto s : {Stage::kIngest, Stage::kTrajectories, Stage::kMine, Stage::kLearn,
                 Stage::kEmbed, Stage::kPredict, Stage::kEvaluate, Stage::kAnalyze,
                 Stage::kSweep, Stage::kSynth}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<Stage> pipeline_stages(DataSource source) {
  if (source == DataSource::kSynth) return {Stage::kSynth, Stage::kMine, Stage::kLearn};
  return {Stage::kIngest, Stage::kTrajectories, Stage::kMine,     Stage::kLearn,
          Stage::kEmbed,  Stage::kPredict,      Stage::kEvaluate, Stage::kAnalyze};
}

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

fs::path Pipeline::artifact(const std::string& name) const { return cfg_.output_dir / name; }

fs::path Pipeline::manifest_path(Stage stage) const {
  return artifact(stage_name(stage) + ".manifest.json");
}

Stage Pipeline::trajectory_stage() const {
  return cfg_.source == DataSource::kSynth ? Stage::kSynth : Stage::kTrajectories;
}

namespace {

StageInfo stage_info(Stage s, Stage trajectory_source) {
  switch (s) {
    case Stage::kIngest: return {{"dataset", "windows"}, {}};
    case Stage::kTrajectories: return {{"trajectories"}, {Stage::kIngest}};
    case Stage::kSynth: return {{"synth"}, {}};
    case Stage::kMine: return {{"mining"}, {trajectory_source}};
    case Stage::kLearn: return {{"learn"}, {Stage::kMine}};
    case Stage::kEmbed: return {{}, {Stage::kIngest, Stage::kTrajectories, Stage::kLearn}};
    case Stage::kPredict: return {{"forest", "nmf"}, {Stage::kIngest, Stage::kEmbed}};
    case Stage::kEvaluate: return {{}, {Stage::kIngest, Stage::kPredict}};
    case Stage::kAnalyze: return {{"analyze"}, {Stage::kIngest, Stage::kEmbed}};
    case Stage::kSweep: return {{"learn", "sweep"}, {Stage::kMine}};
  }
  return {};
}

}  // namespace

std::string Pipeline::stage_hash(Stage stage) const {
  const auto info = stage_info(stage, trajectory_stage());
  const auto full = cfg_.to_json();
  json j{{"stage", stage_name(stage)}, {"config", json::object()}, {"upstream", json::array()}};
  for (const auto& s : info.sections) j["config"][s] = full.at(s);
  // The data source decides which stage produced the trajectories.
  if (stage == Stage::kMine) j["config"]["source"] = full.at("dataset").at("source");
  for (auto u : info.upstream) j["upstream"].push_back(stage_hash(u));
  return io::sha256_hex(j.dump());
}

json Pipeline::require(Stage stage) const {
  const auto path = manifest_path(stage);
  const auto name = stage_name(stage);
  if (!fs::exists(path)) {
    throw DataError("missing " + name + " artifacts in " + cfg_.output_dir.string() +
                    "; run the '" + name + "' stage first");
  }
  json m;
  try {
    m = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (m.value("config_hash", std::string{}) != stage_hash(stage)) {
    throw DataError("stale " + name + " artifacts: the configuration changed since they were "
                    "written; rerun '" + name + "'");
  }
  for (const auto& out : m.at("outputs")) {
    const auto file = out.at("file").get<std::string>();
    if (!fs::exists(artifact(file)) || io::sha256_file(artifact(file)) != out.at("sha256")) {
      throw DataError("stale " + name + " artifact " + file +
                      ": contents differ from its manifest; rerun '" + name + "'");
    }
  }
  return m;
}

void Pipeline::write_manifest(Stage stage, const std::vector<Stage>& upstream,
                              const std::vector<std::string>& outputs, const json& extra) const {
  json m;
  m["format_version"] = kManifestVersion;
  m["stage"] = stage_name(stage);
  m["config_hash"] = stage_hash(stage);
  m["seed"] = stage_seed(cfg_, stage);
  m["inputs"] = json::array();
  if (stage == Stage::kIngest) {
    m["inputs"].push_back({{"file", cfg_.dataset.string()}, {"sha256", io::sha256_file(cfg_.dataset)}});
  }
  for (auto u : upstream) {
    const auto um = json::parse(io::read_text(manifest_path(u)));
    for (const auto& out : um.at("outputs")) {
      m["inputs"].push_back({{"stage", stage_name(u)}, {"file", out.at("file")}, {"sha256", out.at("sha256")}});
    }
  }
  m["outputs"] = json::array();
  for (const auto& f : outputs) {
    m["outputs"].push_back({{"file", f}, {"sha256", io::sha256_file(artifact(f))}});
  }
  m["config"] = cfg_.to_json();
  if (!extra.is_null()) m["summary"] = extra;
  io::write_text(manifest_path(stage), m.dump(2) + "\n");
}

void Pipeline::run(Stage stage, const StageOptions& opts) {
  if (needs_events(stage) && cfg_.source != DataSource::kEvents) {
    throw UsageError("stage '" + stage_name(stage) + "' needs an event dataset (dataset.source = events)");
  }
  if (stage == Stage::kSynth && cfg_.source != DataSource::kSynth) {
    throw UsageError("stage 'synth' needs dataset.source = synth");
  }
  fs::create_directories(cfg_.output_dir);
  switch (stage) {
    case Stage::kIngest: ingest(); break;
    case Stage::kTrajectories: trajectories(); break;
    case Stage::kSynth: synth(); break;
    case Stage::kMine: mine(); break;
    case Stage::kLearn: learn(); break;
    case Stage::kEmbed: embed(); break;
    case Stage::kPredict: predict(); break;
    case Stage::kEvaluate: evaluate(opts); break;
    case Stage::kAnalyze: analyze(); break;
    case Stage::kSweep: sweep(); break;
  }
}

void Pipeline::run_all(const StageOptions& opts) {
  for (auto s : pipeline_stages(cfg_.source)) run(s, opts);
}

void Pipeline::ingest() {
  if (cfg_.dataset.empty()) throw UsageError("dataset.path is not set");
  std::optional<WindowConfig> window;
  if (cfg_.t_start && cfg_.t_end) window = WindowConfig{*cfg_.t_start, *cfg_.t_end, cfg_.K};
  auto loaded = load_events(cfg_.dataset, cfg_.format, window, cfg_.schema);
  if (!window) {
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (const auto& [user, events] : loaded.histories) {
      for (const auto& e : events) {
        lo = std::min(lo, e.ts);
        hi = std::max(hi, e.ts);
      }
    }
    if (loaded.n_events == 0) throw DataError(cfg_.dataset.string() + ": no events");
    window = WindowConfig{cfg_.t_start.value_or(lo), cfg_.t_end.value_or(hi), cfg_.K};
    if (window->t_start >= window->t_end) throw DataError("events span a single instant");
    // Drop events outside a partially specified span.
    for (auto& [user, events] : loaded.histories) {
      std::erase_if(events, [&](const ListeningEvent& e) { return !window->contains(e.ts); });
    }
    std::erase_if(loaded.histories, [](const auto& kv) { return kv.second.empty(); });
  }
  const auto h = slice_windows(loaded.histories, *window);
  io::write_windows(artifact("windows.tsv"), h);
  std::size_t events = 0;
  for (const auto& per_user : h.sequences) {
    for (const auto& w : per_user) events += w.size();
  }
  const json summary{{"n_events", events},
                     {"skipped_out_of_range", loaded.skipped_out_of_range},
                     {"n_users", h.n_users()},
                     {"n_genres", h.n_genres()},
                     {"K", h.K},
                     {"t_start", window->t_start},
                     {"t_end", window->t_end}};
  io::write_text(artifact("ingest.json"), summary.dump(2) + "\n");
  write_manifest(Stage::kIngest, {}, {"windows.tsv", "ingest.json"}, summary);
}

void Pipeline::trajectories() {
  require(Stage::kIngest);
  const auto h = io::read_windows(artifact("windows.tsv"));
  if (h.K < 3) throw DataError("need at least three windows");
  // Training view: the last window is held back for evaluation.
  const auto train = h.truncated(h.K - 1);
  const auto X = allocation(train);
  const auto cands = candidate_sets(X);
  auto pairs = cands.appearance;
  pairs.insert(pairs.end(), cands.disappearance.begin(), cands.disappearance.end());
  const TrajectorySampler sampler(train, X);
  const auto set = build_trajectory_set(sampler, pairs, cfg_.n_per_pair, cfg_.total, cfg_.seed,
                                        cfg_.heldout);
  auto records = [&](const std::vector<RankTrajectory>& ts) {
    std::vector<io::TrajectoryRecord> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(io::to_record(t, train.users, train.genres));
    return out;
  };
  io::write_trajectories(artifact("trajectories.jsonl"), records(set.selected));
  io::write_trajectories(artifact("heldout.jsonl"), records(set.heldout));
  write_manifest(Stage::kTrajectories, {Stage::kIngest}, {"trajectories.jsonl", "heldout.jsonl"},
                 {{"n_appearance_pairs", cands.appearance.size()},
                  {"n_disappearance_pairs", cands.disappearance.size()},
                  {"n_selected", set.selected.size()},
                  {"n_heldout", set.heldout.size()}});
}

void Pipeline::synth() {
  const auto corpus = generate_planted(cfg_.synth);
  std::vector<io::TrajectoryRecord> records;
  records.reserve(corpus.trajectories.size());
  for (const auto& t : corpus.trajectories) {
    io::TrajectoryRecord r;
    r.ranks = t;
    records.push_back(std::move(r));
  }
  io::write_trajectories(artifact("trajectories.jsonl"), records);
  io::write_trajectories(artifact("heldout.jsonl"), {});
  io::write_sequences(artifact("planted.jsonl"), corpus.planted);
  write_manifest(Stage::kSynth, {}, {"trajectories.jsonl", "heldout.jsonl", "planted.jsonl"},
                 {{"n_trajectories", corpus.trajectories.size()},
                  {"n_planted", corpus.planted.size()},
                  {"planting_counts", corpus.planting_counts}});
}

void Pipeline::mine() {
  const auto src = trajectory_stage();
  require(src);
  const auto trajs = io::ranks_of(io::read_trajectories(artifact("trajectories.jsonl")));
  const auto graph = induce_graph(trajs);
  const auto cands = mine_candidates(trajs, cfg_.mining);
  io::write_candidates(artifact("candidates.jsonl"), cands);
  {
    std::ostringstream edges;
    graph.write_edge_list(edges);
    io::write_text(artifact("graph_edges.tsv"), edges.str());
  }
  write_manifest(Stage::kMine, {src}, {"candidates.jsonl", "graph_edges.tsv"},
                 {{"n_trajectories", trajs.size()},
                  {"n_nodes", graph.nodes.size()},
                  {"n_edges", graph.edges.size()},
                  {"n_candidates", cands.size()}});
}

void Pipeline::learn() {
  require(Stage::kMine);
  const auto trajs = io::ranks_of(io::read_trajectories(artifact("trajectories.jsonl")));
  const auto cands = io::read_candidates(artifact("candidates.jsonl"));
  const auto graph = induce_graph(trajs);
  const auto enc = encode(trajs, cands, graph);
  const auto model = fit(enc.paths, enc.candidates, cfg_.learn);
  const auto dict = select_topn(model.alpha, cands, cfg_.learn.top_n);
  io::write_dictionary(artifact("dictionary.jsonl"), dict);

  io::Table loss{{"epoch", "loss"}, {{"0", io::format_double(model.initial_loss)}}};
  for (std::size_t e = 0; e < model.loss_history.size(); ++e) {
    loss.rows.push_back({std::to_string(e + 1), io::format_double(model.loss_history[e])});
  }
  io::write_csv(artifact("loss_history.csv"), loss);

  bool used_heldout = false;
  const auto eval = heldout_or_training(artifact("heldout.jsonl"), trajs, used_heldout);
  json summary{{"initial_loss", model.initial_loss},
               {"final_loss", model.final_loss()},
               {"epochs", model.loss_history.size()},
               {"stopped_early", model.stopped_early},
               {"dictionary_size", dict.size()},
               {"metrics_on", used_heldout ? "heldout" : "training"},
               {"metrics", metrics_json(dict_metrics(dict, eval))}};
  std::vector<std::string> outputs{"dictionary.jsonl", "loss_history.csv", "learn.json"};
  if (cfg_.source == DataSource::kSynth) {
    const auto planted = io::read_sequences(artifact("planted.jsonl"));
    summary["recovery_score"] = recovery_score(dict, planted);
    io::write_text(artifact("recovery.json"),
                   json{{"recovery_score", summary["recovery_score"]},
                        {"n_planted", planted.size()},
                        {"dictionary_size", dict.size()}}
                           .dump(2) +
                       "\n");
    outputs.push_back("recovery.json");
  }
  io::write_text(artifact("learn.json"), summary.dump(2) + "\n");
  write_manifest(Stage::kLearn, {Stage::kMine}, outputs, summary);
}

void Pipeline::embed() {
  require(Stage::kIngest);
  require(Stage::kTrajectories);
  require(Stage::kLearn);
  const auto h = io::read_windows(artifact("windows.tsv"));
  const auto dict = io::read_dictionary(artifact("dictionary.jsonl"));
  const auto train_view = h.truncated(h.K - 1);
  auto train = pair_features(train_view, dict, cfg_.n_per_pair, derive_seed(cfg_.seed, "embed-train"));
  label_features(train, train_view);
  const auto eval = pair_features(h, dict, cfg_.n_per_pair, derive_seed(cfg_.seed, "embed-eval"));
  write_features(artifact("embed_train.csv"), train, h.users, h.genres, dict);
  write_features(artifact("embed_eval.csv"), eval, h.users, h.genres, dict);
  write_manifest(Stage::kEmbed, {Stage::kIngest, Stage::kTrajectories, Stage::kLearn},
                 {"embed_train.csv", "embed_eval.csv"},
                 {{"n_train_pairs", train.pairs.size()}, {"n_eval_pairs", eval.pairs.size()}});
}

void Pipeline::predict() {
  require(Stage::kIngest);
  require(Stage::kEmbed);
  const auto h = io::read_windows(artifact("windows.tsv"));
  const auto dict = io::read_dictionary(artifact("dictionary.jsonl"));
  const auto full = allocation(h);
  const auto train = read_features(artifact("embed_train.csv"), full, dict.size());
  const auto eval = read_features(artifact("embed_eval.csv"), full, dict.size());
  if (train.labels.empty() && !train.pairs.empty()) throw DataError("training features carry no labels");

  auto forest_cfg = [&](const char* which) {
    auto c = cfg_.forest;
    c.seed = derive_seed(cfg_.forest.seed, which);
    return c;
  };
  const auto app_clf = train_or_constant(labelled_of_kind(train, CandidateKind::kAppearance),
                                         forest_cfg("appearance"));
  const auto dis_clf = train_or_constant(labelled_of_kind(train, CandidateKind::kDisappearance),
                                         forest_cfg("disappearance"));

  const auto history_view = h.truncated(h.K - 1);
  const auto history = allocation(history_view);
  const auto popularity = popularity_distribution(history_view);
  const auto plug = plug_previous(history, *app_clf, *dis_clf,
                                  features_of_kind(eval, CandidateKind::kAppearance),
                                  features_of_kind(eval, CandidateKind::kDisappearance), popularity);
  const auto nmf_pred = baseline_nmf(history, cfg_.nmf, popularity);

  write_prediction(artifact("pred_previous.csv"), full, baseline_previous(history).values);
  write_prediction(artifact("pred_popularity.csv"), full, baseline_popularity(history_view).values);
  write_prediction(artifact("pred_nmf.csv"), full, nmf_pred.prediction.values);
  write_prediction(artifact("pred_plug_previous.csv"), full, plug.prediction.values);
  io::write_text(artifact("classifier_appearance.json"), app_clf->to_json().dump() + "\n");
  io::write_text(artifact("classifier_disappearance.json"), dis_clf->to_json().dump() + "\n");
  const json summary{{"appearance_edits", plug.appearance_edits},
                     {"disappearance_edits", plug.disappearance_edits},
                     {"popularity_fallbacks", plug.popularity_fallbacks},
                     {"nmf_objective", nmf_pred.factors.objective.empty()
                                           ? 0.0
                                           : nmf_pred.factors.objective.back()},
                     {"nmf_converged", nmf_pred.factors.converged}};
  io::write_text(artifact("predict.json"), summary.dump(2) + "\n");
  write_manifest(Stage::kPredict, {Stage::kIngest, Stage::kEmbed},
                 {"pred_previous.csv", "pred_popularity.csv", "pred_nmf.csv",
                  "pred_plug_previous.csv", "classifier_appearance.json",
                  "classifier_disappearance.json", "predict.json"},
                 summary);
}

void Pipeline::evaluate(const StageOptions& opts) {
  require(Stage::kIngest);
  require(Stage::kPredict);
  const auto h = io::read_windows(artifact("windows.tsv"));
  const auto X = allocation(h);
  std::vector<MetricsReport> reports;
  reports.push_back(evaluate_prediction("Popularity", X, read_prediction(artifact("pred_popularity.csv"), X)));
  reports.push_back(evaluate_prediction("NMF", X, read_prediction(artifact("pred_nmf.csv"), X)));
  reports.push_back(evaluate_prediction("Previous", X, read_prediction(artifact("pred_previous.csv"), X), true));
  reports.push_back(evaluate_prediction("Plug-Previous", X, read_prediction(artifact("pred_plug_previous.csv"), X)));
  if (opts.oracle) {
    reports.push_back(evaluate_prediction("Oracle", X, {window_matrix(X, X.K() - 1)}));
  }
  json models = json::array();
  io::Table table{{"model", "atv", "plus_minus_auc", "new_classes_auc", "n_users_evaluated", "shifted"}, {}};
  auto opt = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string("NA"); };
  for (const auto& r : reports) {
    models.push_back(r.to_json());
    table.rows.push_back({r.model, io::format_double(r.atv), opt(r.plus_minus_auc),
                          opt(r.new_classes_auc), std::to_string(r.n_users_evaluated),
                          r.shifted ? "1" : "0"});
  }
  io::write_text(artifact("metrics.json"), json{{"models", models}}.dump(2) + "\n");
  io::write_csv(artifact("metrics.csv"), table);
  write_manifest(Stage::kEvaluate, {Stage::kIngest, Stage::kPredict}, {"metrics.json", "metrics.csv"},
                 {{"oracle", opts.oracle}});
}

void Pipeline::analyze() {
  require(Stage::kIngest);
  require(Stage::kEmbed);
  const auto h = io::read_windows(artifact("windows.tsv"));
  const auto dict = io::read_dictionary(artifact("dictionary.jsonl"));
  const auto X = allocation(h);

  const auto var = variation_decomposition(X);
  auto summary_table = [](const char* key, const std::vector<VariationSummary>& rows) {
    io::Table t{{key, "tv_low", "tv_high", "n_users", "mean_tv", "appearance", "disappearance", "persistence"}, {}};
    for (const auto& s : rows) {
      t.rows.push_back({std::to_string(s.window), io::format_double(s.tv_low),
                        io::format_double(s.tv_high), std::to_string(s.n_users),
                        io::format_double(s.mean_tv), io::format_double(s.appearance),
                        io::format_double(s.disappearance), io::format_double(s.persistence)});
    }
    return t;
  };
  io::write_csv(artifact("decomposition_windows.csv"), summary_table("window", var.per_window));
  io::write_csv(artifact("decomposition_deciles.csv"), summary_table("decile", var.per_decile));

  const auto train = read_features(artifact("embed_train.csv"), X, dict.size());
  std::vector<double> corr[2];
  std::vector<PairEmbedding> embeddings;
  const auto train_view = h.truncated(h.K - 1);
  const auto Xtrain = allocation(train_view);
  const TrajectorySampler sampler(train_view, Xtrain);
  for (int kind = 0; kind < 2; ++kind) {
    const auto k = kind == 0 ? CandidateKind::kAppearance : CandidateKind::kDisappearance;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < train.pairs.size(); ++i) {
      if (train.pairs[i].kind == k) rows.push_back(i);
    }
    Matrix f(rows.size(), dict.size());
    std::vector<std::uint8_t> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = train.features.row(rows[i]);
      std::copy(src.begin(), src.end(), f.row(i).begin());
      labels[i] = train.labels.at(rows[i]);
      if (k == CandidateKind::kAppearance) {
        embeddings.push_back({train.pairs[rows[i]], {src.begin(), src.end()},
                              sampler.rank_map(train.pairs[rows[i]])});
      }
    }
    corr[kind] = rows.empty() ? std::vector<double>(dict.size(), 0.0) : pathlet_correlation(f, labels);
  }

  const auto profile = pathlet_profile(dict);
  io::Table ct{{"pathlet", "influence", "appearance_corr", "disappearance_corr", "inertial",
                "mean_rank", "diversity"},
               {}};
  for (std::size_t i = 0; i < dict.size(); ++i) {
    ct.rows.push_back({io::rank_label(dict.pathlets[i].ranks), io::format_double(dict.influence[i]),
                       io::format_double(corr[0][i]), io::format_double(corr[1][i]),
                       profile[i].inertial ? "1" : "0", io::format_double(profile[i].mean_rank),
                       io::format_double(profile[i].diversity)});
  }
  io::write_csv(artifact("correlation.csv"), ct);

  const auto popularity = popularity_distribution(train_view);
  std::uint32_t target = 0;
  if (cfg_.target_genre.empty()) {
    target = static_cast<std::uint32_t>(
        std::max_element(popularity.begin(), popularity.end()) - popularity.begin());
  } else {
    const auto g = X.genre_index(cfg_.target_genre);
    if (!g) throw UsageError("analyze.target_genre '" + cfg_.target_genre + "' is not in the data");
    target = static_cast<std::uint32_t>(*g);
  }
  const auto graph = extended_pathlet_graph(dict, embeddings, corr[0], target);
  {
    std::ostringstream dot;
    graph.write_dot(dot, h.genres, "extended_" + std::to_string(target));
    io::write_text(artifact("extended_graph.dot"), dot.str());
  }
  io::write_text(artifact("extended_graph.json"),
                 json{{"genre", h.genres[target]}, {"graph", graph.to_json(h.genres)}}.dump(2) + "\n");

  const auto diversity = diversity_by_genre(dict, embeddings, corr[0], popularity);
  io::Table dt{{"genre", "popularity", "diversity", "weight"}, {}};
  for (const auto& d : diversity) {
    dt.rows.push_back({h.genres.at(d.genre), io::format_double(d.popularity),
                       io::format_double(d.diversity), io::format_double(d.weight)});
  }
  io::write_csv(artifact("diversity.csv"), dt);

  write_manifest(Stage::kAnalyze, {Stage::kIngest, Stage::kEmbed},
                 {"decomposition_windows.csv", "decomposition_deciles.csv", "correlation.csv",
                  "extended_graph.dot", "extended_graph.json", "diversity.csv"},
                 {{"target_genre", h.genres[target]}, {"n_variation_records", var.records.size()}});
}

void Pipeline::sweep() {
  require(Stage::kMine);
  if (cfg_.sweep_lambdas.empty()) throw UsageError("sweep.lambdas is empty");
  const auto trajs = io::ranks_of(io::read_trajectories(artifact("trajectories.jsonl")));
  const auto cands = io::read_candidates(artifact("candidates.jsonl"));
  const auto graph = induce_graph(trajs);
  const auto enc = encode(trajs, cands, graph);
  bool used_heldout = false;
  const auto eval = heldout_or_training(artifact("heldout.jsonl"), trajs, used_heldout);
  io::Table t{{"lambda", "cover_ratio", "code_sparsity", "mean_pathlets_per_trajectory",
               "final_loss", "epochs"},
              {}};
  for (double lambda : cfg_.sweep_lambdas) {
    auto lc = cfg_.learn;
    lc.lambda = lambda;
    const auto model = fit(enc.paths, enc.candidates, lc);
    const auto dict = select_topn(model.alpha, cands, lc.top_n);
    const auto m = dict_metrics(dict, eval);
    t.rows.push_back({io::format_double(lambda), io::format_double(m.cover_ratio),
                      io::format_double(m.code_sparsity),
                      io::format_double(m.mean_pathlets_per_trajectory),
                      io::format_double(model.final_loss()), std::to_string(model.loss_history.size())});
  }
  io::write_csv(artifact("sweep.csv"), t);
  write_manifest(Stage::kSweep, {Stage::kMine}, {"sweep.csv"},
                 {{"metrics_on", used_heldout ? "heldout" : "training"}});
}

}  // namespace pathlets
