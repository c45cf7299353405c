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


#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "canoe/errors.hpp"
#include "canoe/gensolver.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"
#include "cli/toys.hpp"
#include "oracles.hpp"

using namespace canoe;
using namespace canoe::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("canoe_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig config(const std::string& json, const fs::path& dir = fs::temp_directory_path()) {
  return parse_config(json, dir);
}

RunOptions options(const fs::path& out, const std::string& command) {
  RunOptions o;
  o.command = command;
  o.out = out;
  o.workers = 2;
  return o;
}

std::string config_error(const std::string& json) {
  try {
    config(json);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(CANOE_BINARY) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kToy4 = R"({
  "systems": [{"name": "xy4", "hamiltonian": "builtin:xy4"}],
  "n_c": [1, 2, 3, 4, 5, 6],
  "n_q": [0, 1, 2, 3],
  "modes": ["deflation"],
  "tau_rank": [1e-6]
})";

}  // namespace

TEST(Config, DefaultsAndLists) {
  const auto cfg = config(R"({"systems": [{"name": "a", "hamiltonian": "builtin:z1"}], "shots": ["exact", 100], "n_seeds": 3})");
  EXPECT_EQ(cfg.n_c, std::vector<int>{1});
  EXPECT_EQ(cfg.n_q, std::vector<int>{0});
  EXPECT_EQ(cfg.shots, (std::vector<std::uint64_t>{0, 100}));
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(cfg.modes.front(), SolverMode::deflation);
  EXPECT_EQ(cfg.rank_tols.front(), 1e-6);
  EXPECT_NE(cfg.hash, 0u);
}

TEST(Config, ErrorsNameTheOffendingKey) {
  EXPECT_NE(config_error(R"({"n_c": [1]})").find("systems"), std::string::npos);
  EXPECT_NE(config_error(R"({"systems": [{"name": "a", "hamiltonian": "builtin:z1"}], "n_c": [1, "x"]})").find("n_c[1]"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"systems": [{"name": "a", "hamiltonian": "builtin:z1"}], "bogus": 1})").find("bogus"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"systems": [{"name": "a", "hamiltonian": "builtin:z1"}], "solver": {"tol": "x"}})").find("solver.tol"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"systems": [{"name": "a", "hamiltonian": "missing.txt"}]})").find("systems[0].hamiltonian"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"systems": [{"name": "a", "hamiltonian": "builtin:z1"}], "n_q": []})").find("n_q"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"systems": [{"name": "a", "hamiltonian": "builtin:z1"}], "modes": ["fast"]})").find("modes[0]"),
            std::string::npos);
  EXPECT_NE(config_error("{ not json").find("malformed"), std::string::npos);
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
  const fs::path dir = fresh_dir("relpath");
  std::ofstream(dir / "h.txt") << "1 0 ZZ\n";
  std::ofstream(dir / "c.json") << R"({"systems": [{"name": "a", "hamiltonian": "h.txt"}], "out": "results"})";
  const auto cfg = load_config(dir / "c.json");
  EXPECT_EQ(fs::path(cfg.systems[0].hamiltonian), dir / "h.txt");
  EXPECT_EQ(*cfg.out, dir / "results");
}

TEST(Config, HashTracksContent) {
  const auto a = config(R"({"systems": [{"name": "a", "hamiltonian": "builtin:z1"}]})");
  const auto b = config(R"({"systems": [{"name": "b", "hamiltonian": "builtin:z1"}]})");
  EXPECT_NE(a.hash, b.hash);
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
}

TEST(Toys, SpectraMatchKroneckerOracle) {
  for (const auto& toy : toy_systems()) {
    const auto h = parse_hamiltonian(toy.text);
    const oracle::Mat d = to_dense(h);
    Eigen::SelfAdjointEigenSolver<oracle::Mat> eig(d);
    for (std::size_t i = 0; i < toy.spectrum.size(); ++i)
      EXPECT_NEAR(eig.eigenvalues()(static_cast<Eigen::Index>(i)), toy.spectrum[i], 1e-12) << toy.name;
  }
  EXPECT_THROW(toy_system("nope"), ConfigError);
}

TEST(Output, DoublesRoundTripLosslessly) {
  for (double x : {0.1, -2.9781241429166747, 1e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Output, PoolPreservesTaskOrder) {
  std::vector<int> seen;
  run_pool(
      50, 4, [](std::size_t i) { return std::vector<Row>{{static_cast<std::int64_t>(i)}}; },
      [&](std::vector<Row>&& rows) { seen.push_back(static_cast<int>(std::get<std::int64_t>(rows[0][0]))); });
  ASSERT_EQ(seen.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(seen[static_cast<std::size_t>(i)], i);
}

TEST(Output, PoolRethrowsWorkerErrors) {
  EXPECT_THROW(run_pool(
                   5, 2,
                   [](std::size_t i) -> std::vector<Row> {
                     if (i == 3) throw DataError("boom");
                     return {};
                   },
                   [](std::vector<Row>&&) {}),
               DataError);
}

TEST(Output, CsvRoundTrip) {
  const fs::path dir = fresh_dir("csv");
  {
    CsvWriter w(dir / "t.csv", {"a", "b", "c"});
    w.write({std::string("x"), 0.5, true});
    EXPECT_THROW(w.write({1.0}), ContractError);
  }
  const auto t = read_csv(dir / "t.csv");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][t.column("b")], "0.5");
  EXPECT_EQ(t.rows[0][t.column("c")], "true");
}

TEST(Commands, ExactGridClassicalColumnAndMonotonicity) {
  const fs::path dir = fresh_dir("exact");
  const auto cfg = config(kToy4);
  ASSERT_EQ(cmd_exact(cfg, options(dir, "exact")), 0);
  const auto t = read_csv(dir / "exact_grid.csv");
  ASSERT_EQ(t.rows.size(), 24u);
  const auto h = parse_hamiltonian(toy_system("xy4").text);
  const auto space = RestrictedSpace::particle_sector(4, 2);
  const auto ranked = rank_determinants(h, space);
  const Eigen::MatrixXcd full(project_hamiltonian(h, RestrictedSpace(ranked)));
  std::map<std::pair<int, int>, double> e;
  for (const auto& r : t.rows) {
    const int nc = std::stoi(r[t.column("n_c")]);
    const int nq = std::stoi(r[t.column("n_q")]);
    e[{nc, nq}] = std::stod(r[t.column("energy")]);
    EXPECT_EQ(r[t.column("config_hash")].size(), 16u);
    EXPECT_FALSE(r[t.column("version")].empty());
    EXPECT_EQ(r[t.column("converged")], "true");
  }
  const auto at = [&](int nc, int nq) { return e.at(std::make_pair(nc, nq)); };
  for (int nc = 1; nc <= 6; ++nc) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(full.topLeftCorner(nc, nc));
    EXPECT_NEAR(at(nc, 0), eig.eigenvalues()(0), 1e-10) << nc;
    for (int nq = 0; nq <= 3; ++nq) {
      if (nc > 1) EXPECT_LE(at(nc, nq), at(nc - 1, nq) + 1e-10);
      if (nq > 0) EXPECT_LE(at(nc, nq), at(nc, nq - 1) + 1e-10);
    }
  }
  EXPECT_TRUE(fs::exists(dir / "exact_marginal.csv"));
  EXPECT_TRUE(fs::exists(dir / "exact_weights.csv"));
  const auto manifest = nlohmann::json::parse(std::ifstream(dir / "manifest_exact.json"));
  EXPECT_EQ(manifest["status"], 0);
  EXPECT_EQ(manifest["outputs"].size(), 3u);
}

TEST(Commands, SampleExactSentinelAndSeedDeterminism) {
  const fs::path dir = fresh_dir("sample");
  const auto cfg = config(R"({
    "systems": [{"name": "xy4", "hamiltonian": "builtin:xy4"}],
    "n_c": [6], "n_q": [2], "shots": ["exact", 2000], "n_seeds": 2,
    "tau_rank": [1e-6, 1e-2]
  })");
  ASSERT_EQ(cmd_sample(cfg, options(dir, "sample")), 0);
  const auto first = read_csv(dir / "sample.csv");
  ASSERT_EQ(first.rows.size(), 8u);
  for (const auto& r : first.rows) {
    if (r[first.column("shots")] == "0") {
      EXPECT_NEAR(std::stod(r[first.column("energy")]), std::stod(r[first.column("e_inf")]), 1e-9);
      EXPECT_LT(std::stod(r[first.column("dH_frob")]), 1e-12);
      EXPECT_LT(std::stod(r[first.column("w_unres")]), 1e-24);
    }
  }
  auto opts = options(dir, "sample");
  opts.workers = 1;
  ASSERT_EQ(cmd_sample(cfg, opts), 0);
  const auto second = read_csv(dir / "sample.csv");
  EXPECT_EQ(first.rows, second.rows);
}

TEST(Commands, SolverBenchFlagsAndZeroAlpha) {
  const fs::path dir = fresh_dir("bench");
  const auto cfg = config(R"({
    "systems": [{"name": "xy4", "hamiltonian": "builtin:xy4"}],
    "n_c": [3], "n_q": [2], "n_seeds": 2, "modes": ["deflation", "plain"],
    "synthetic": {"alpha": [0.0, 1.0], "reference_shots": 1000}
  })");
  ASSERT_EQ(cmd_solver_bench(cfg, options(dir, "solver-bench")), 0);
  const auto runs = read_csv(dir / "solver_bench_runs.csv");
  for (const auto& r : runs.rows) {
    if (std::stod(r[runs.column("noise")]) == 0.0) {
      EXPECT_LT(std::stod(r[runs.column("abs_error")]), 1e-9);
      EXPECT_EQ(std::stod(r[runs.column("frobenius")]), 0.0);
    }
    if (r[runs.column("all_truncated")] == "true") {
      EXPECT_GE(std::stoi(r[runs.column("n_discarded")]), 2);
    }
  }
  const auto summary = read_csv(dir / "solver_bench.csv");
  EXPECT_EQ(summary.rows.size(), 4u);
}

TEST(Commands, AnalyzeNeedsSampleOutput) {
  const fs::path dir = fresh_dir("analyze_missing");
  const auto cfg = config(R"({"systems": [{"name": "xy4", "hamiltonian": "builtin:xy4"}], "n_q": [2], "n_c": [3]})");
  try {
    cmd_analyze(cfg, options(dir, "analyze"));
    FAIL();
  } catch (const DependencyError& e) {
    EXPECT_NE(std::string(e.what()).find("canoe sample"), std::string::npos);
  }
}

TEST(Commands, AnalyzeAfterSample) {
  const fs::path dir = fresh_dir("analyze");
  const auto cfg = config(R"({
    "systems": [{"name": "xy4", "hamiltonian": "builtin:xy4"}],
    "n_c": [6], "n_q": [2], "shots": ["exact", 1000, 10000], "n_seeds": 2
  })");
  ASSERT_EQ(cmd_sample(cfg, options(dir, "sample")), 0);
  ASSERT_EQ(cmd_analyze(cfg, options(dir, "analyze")), 0);
  const auto w = read_csv(dir / "w_unres.csv");
  bool saw_exact = false;
  for (const auto& r : w.rows)
    if (r[w.column("shots")] == "0") {
      saw_exact = true;
      EXPECT_LT(std::stod(r[w.column("w_unres_mean")]), 1e-24);
    }
  EXPECT_TRUE(saw_exact);
  EXPECT_TRUE(fs::exists(dir / "complexity.csv"));
  EXPECT_TRUE(fs::exists(dir / "error_rate.csv"));
  const auto ex = nlohmann::json::parse(std::ifstream(dir / "extrapolation.json"));
  EXPECT_TRUE(ex.contains("points"));
}

TEST(Commands, OversizeSystemIsRefusedWithLimit) {
  const fs::path dir = fresh_dir("oversize");
  std::ofstream(dir / "h.txt") << "1 0 " << std::string(18, 'Z') << "\n";
  std::ofstream(dir / "c.json") << R"({"systems": [{"name": "big", "hamiltonian": "h.txt"}]})";
  const auto cfg = load_config(dir / "c.json");
  try {
    cmd_exact(cfg, options(dir, "exact"));
    FAIL();
  } catch (const SizeLimitError& e) {
    EXPECT_NE(std::string(e.what()).find("16"), std::string::npos);
  }
}

TEST(Commands, MarginalReplacementInterpolatesIsoErrorContours) {
  // Error halves per added classical determinant; one quantum state is worth two determinants.
  std::vector<std::vector<std::pair<int, double>>> rows(2);
  for (int nc = 1; nc <= 8; ++nc) {
    rows[0].emplace_back(nc, std::pow(0.5, nc));
    rows[1].emplace_back(nc, std::pow(0.5, nc + 2));
  }
  const auto m = marginal_replacement({0, 1}, rows, {std::pow(0.5, 5)});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NEAR(m[0].n_c_from, 5.0, 1e-12);
  EXPECT_NEAR(m[0].n_c_to, 3.0, 1e-12);
  EXPECT_NEAR(m[0].delta_n_c, 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(iso_error_n_c(rows[0], 1e-9)));
}

TEST(Binary, ExitCodes) {
  const fs::path dir = fresh_dir("binary");
  EXPECT_EQ(run_binary("self-test --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "manifest_self-test.json"));
  std::ofstream(dir / "bad.json") << R"({"systems": []})";
  EXPECT_EQ(run_binary("exact --config " + (dir / "bad.json").string() + " --out " + dir.string()), 2);
  EXPECT_EQ(run_binary("exact --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_binary("frobnicate"), 2);
  std::ofstream(dir / "ok.json") << R"({"systems": [{"name": "z", "hamiltonian": "builtin:zx1"}], "n_c": [1], "n_q": [0, 1]})";
  EXPECT_EQ(run_binary("exact --config " + (dir / "ok.json").string() + " --out " + dir.string() + " --workers 2"), 0);
  EXPECT_TRUE(fs::exists(dir / "exact_grid.csv"));
  EXPECT_EQ(run_binary("analyze --config " + (dir / "ok.json").string() + " --out " + (dir / "empty").string()), 2);
}
