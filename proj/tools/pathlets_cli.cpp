// Copyright 2026 The Pathlets Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver for the pathlet pipeline.
//
//   pathlets <stage> --config run.ini [--threads N]
//   pathlets run --config run.ini           all stages for the configured source
//   pathlets synth --events out.csv [...]   write a synthetic listening log

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pathlets/kernels.hpp"
#include "pathlets/pipeline.hpp"
#include "pathlets/synth.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

int run(int argc, char** argv) {
  CLI::App app{"Pathlet dictionary learning for genre-allocation prediction", "pathlets"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);

  std::string config;
  bool oracle = false;
  const std::vector<std::string> names{"ingest",   "trajectories", "mine",    "learn",
                                       "embed",    "predict",      "evaluate", "analyze",
                                       "sweep",    "synth",        "run"};
  std::string events;
  pathlets::ListeningSpec listening;
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, name == "run" ? "Run every stage in order"
                                                       : "Run the " + name + " stage");
    sub->add_option("-c,--config", config, "Run configuration (INI, or a stage manifest)");
    if (name == "evaluate" || name == "run") {
      sub->add_flag("--oracle", oracle, "Also score the true allocations as a prediction");
    }
    if (name == "synth") {
      sub->add_option("--events", events, "Write a synthetic listening log here instead");
      sub->add_option("--users", listening.n_users, "Users in the synthetic log");
      sub->add_option("--genres", listening.n_genres, "Genres in the synthetic log");
      sub->add_option("--windows", listening.K, "Windows spanned by the synthetic log");
      sub->add_option("--seed", listening.seed, "Seed of the synthetic log");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  pathlets::kernels::set_threads(threads);

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "synth" && !events.empty()) {
    const auto histories = pathlets::generate_listening(listening);
    pathlets::write_events_csv(events, histories);
    const auto w = listening.windows();
    std::cout << "wrote " << histories.size() << " users to " << events << " (t_start " << w.t_start
              << ", t_end " << w.t_end << ", K " << w.K << ")\n";
    return 0;
  }
  if (config.empty()) {
    std::cerr << "pathlets " << name << ": --config is required\n";
    return kExitUsage;
  }
  pathlets::Pipeline pipeline(pathlets::RunConfig::load(config));
  pathlets::StageOptions opts;
  opts.oracle = oracle;
  if (name == "run") {
    for (auto stage : pathlets::pipeline_stages(pipeline.config().source)) {
      std::cerr << "[" << pathlets::stage_name(stage) << "]\n";
      pipeline.run(stage, opts);
    }
  } else {
    pipeline.run(*pathlets::parse_stage(name), opts);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const pathlets::Error& e) {
    std::cerr << "pathlets: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "pathlets: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "pathlets: " << e.what() << '\n';
    return kExitData;
  }
}
