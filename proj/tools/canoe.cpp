// Copyright 2026 The canoe-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "canoe/errors.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailedPoints = 1;
constexpr int kExitConfig = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace canoe::cli;

  CLI::App app{"Hybrid classical/quantum subspace experiments"};
  app.set_version_flag("--version", std::string(CANOE_VERSION));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed_base = 0;
  int workers = 0;
  int limit_qubits = 16;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config, "Experiment configuration (JSON)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (default: config 'out' or the current directory)");
    sub->add_option("--seed-base", seed_base, "Offset added to every configured seed");
    sub->add_option("--workers", workers, "Parallel sweep workers (default: hardware threads)")->check(CLI::NonNegativeNumber);
    sub->add_option("--limit-qubits", limit_qubits, "Largest system accepted")->check(CLI::Range(1, 30));
  };
  auto* exact = app.add_subcommand("exact", "Exact-overlap sweep over N_c and N_q");
  auto* sample = app.add_subcommand("sample", "Shot-sampled overlap sweep");
  auto* bench = app.add_subcommand("solver-bench", "Compare solver modes under sampled and synthetic noise");
  auto* analyze = app.add_subcommand("analyze", "Complexity, unresolved weight and extrapolation tables");
  auto* self = app.add_subcommand("self-test", "Built-in consistency checks");
  for (auto* sub : {exact, sample, bench, analyze}) add_common(sub, true);
  add_common(self, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  RunOptions opts;
  opts.command = chosen->get_name();
  opts.seed_base = seed_base;
  opts.workers = workers > 0 ? workers : default_workers();
  opts.limit_qubits = limit_qubits;
  opts.argv.assign(argv, argv + argc);

  try {
    if (chosen == self) {
      opts.out = out.empty() ? std::filesystem::path(".") : std::filesystem::path(out);
      std::filesystem::create_directories(opts.out);
      return cmd_self_test(opts, std::cout);
    }
    const ExperimentConfig cfg = load_config(config);
    opts.out = !out.empty() ? std::filesystem::path(out) : cfg.out ? *cfg.out : std::filesystem::path(".");
    std::filesystem::create_directories(opts.out);
    int status = kExitOk;
    if (chosen == exact) status = cmd_exact(cfg, opts);
    else if (chosen == sample) status = cmd_sample(cfg, opts);
    else if (chosen == bench) status = cmd_solver_bench(cfg, opts);
    else status = cmd_analyze(cfg, opts);
    return status == 0 ? kExitOk : kExitFailedPoints;
  } catch (const canoe::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const canoe::SizeLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const canoe::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const canoe::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailedPoints;
  }
}
