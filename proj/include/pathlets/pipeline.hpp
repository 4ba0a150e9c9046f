// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Stage-based file pipeline. Each stage reads the artifacts of the stages it
// depends on, checks their manifests, and writes its own artifacts plus a
// manifest carrying the config snapshot and file hashes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathlets/classifier.hpp"
#include "pathlets/dict_learn.hpp"
#include "pathlets/ingest.hpp"
#include "pathlets/pathlet_graph.hpp"
#include "pathlets/predict.hpp"
#include "pathlets/synth.hpp"

namespace pathlets {

enum class DataSource { kEvents, kSynth };

struct RunConfig {
  DataSource source = DataSource::kEvents;
  std::filesystem::path dataset;
  EventFormat format = EventFormat::kCsv;
  EventSchema schema;

  std::size_t K = 17;
  std::optional<std::int64_t> t_start;  // unset: first event
  std::optional<std::int64_t> t_end;    // unset: last event

  std::size_t n_per_pair = 1000;
  std::size_t total = 5000;
  std::size_t heldout = 1000;
  std::uint64_t seed = 0;

  MiningConfig mining;
  LearnConfig learn;
  ForestConfig forest;
  NmfConfig nmf;

  std::string target_genre;  // empty: most popular genre
  std::vector<double> sweep_lambdas{0.0001, 0.0005, 0.001, 0.0025, 0.005, 0.01, 0.05, 0.1};

  PlantedSpec synth;

  std::filesystem::path output_dir = "out";

  /// INI file with sections dataset, windows, trajectories, mining, learn,
  /// forest, nmf, analyze, sweep, synth and output. Relative paths resolve
  /// against the file's directory. Unknown keys are usage errors.
  static RunConfig load_ini(const std::filesystem::path& path);
  /// Accepts either a bare config object or a stage manifest.
  static RunConfig load_json(const std::filesystem::path& path);
  static RunConfig load(const std::filesystem::path& path);

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  void validate() const;
};

/// Mean greedy embedding of each candidate pair's sampled trajectories, for
/// the candidate sets of `view`'s last window. Reads windows 0..K-2 only.
struct FeatureTable {
  std::vector<CandidatePair> pairs;  // A+ then A-
  std::vector<std::uint8_t> labels;  // empty unless labelled
  Matrix features;                   // pairs x dictionary size
};

FeatureTable pair_features(const WindowedHistories& view, const PathletDictionary& dictionary,
                           std::size_t n_per_pair, std::uint64_t seed);

/// Attaches labels read from the last window of `view`.
void label_features(FeatureTable& table, const WindowedHistories& view);

enum class Stage {
  kIngest,
  kTrajectories,
  kMine,
  kLearn,
  kEmbed,
  kPredict,
  kEvaluate,
  kAnalyze,
  kSweep,
  kSynth,
};

std::string stage_name(Stage stage);
std::optional<Stage> parse_stage(const std::string& name);

/// Stages the full pipeline runs, in order, for the configured source.
std::vector<Stage> pipeline_stages(DataSource source);

struct StageOptions {
  bool oracle = false;  // evaluate also scores Yhat = Y
};

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg);

  void run(Stage stage, const StageOptions& opts = {});
  void run_all(const StageOptions& opts = {});

  const RunConfig& config() const { return cfg_; }
  std::filesystem::path artifact(const std::string& name) const;
  std::filesystem::path manifest_path(Stage stage) const;

  /// Hash of the configuration a stage's outputs depend on, chained through
  /// its upstream stages.
  std::string stage_hash(Stage stage) const;

 private:
  void ingest();
  void trajectories();
  void synth();
  void mine();
  void learn();
  void embed();
  void predict();
  void evaluate(const StageOptions& opts);
  void analyze();
  void sweep();

  Stage trajectory_stage() const;
  nlohmann::json require(Stage stage) const;
  void write_manifest(Stage stage, const std::vector<Stage>& upstream,
                      const std::vector<std::string>& outputs,
                      const nlohmann::json& extra = {}) const;

  RunConfig cfg_;
};

}  // namespace pathlets
