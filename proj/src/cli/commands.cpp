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


#include "cli/commands.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "canoe/analysis.hpp"
#include "canoe/estimators.hpp"
#include "canoe/gensolver.hpp"
#include "cli/output.hpp"
#include "cli/toys.hpp"

namespace canoe::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = CANOE_VERSION;

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return nan();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

class Manifest {
 public:
  Manifest(const RunOptions& opts, const ExperimentConfig* cfg) : opts_(opts) {
    j_["command"] = opts.command;
    j_["version"] = kVersion;
    j_["started"] = timestamp();
    j_["argv"] = opts.argv;
    j_["seed_base"] = opts.seed_base;
    j_["workers"] = opts.workers;
    j_["limit_qubits"] = opts.limit_qubits;
    if (cfg) {
      j_["config"] = cfg->source.string();
      j_["config_hash"] = hex(cfg->hash);
    }
    j_["outputs"] = json::array();
    j_["systems"] = json::array();
  }
  void output(const std::filesystem::path& p, std::size_t rows) {
    j_["outputs"].push_back({{"path", p.filename().string()}, {"rows", rows}});
  }
  void system(const PreparedSystem& s) {
    j_["systems"].push_back({{"name", s.name},
                             {"n_qubit", s.h.n_qubit()},
                             {"n_terms", s.h.n_terms()},
                             {"space_size", s.space->size()},
                             {"reference", s.reference.to_string()},
                             {"tau", s.tau},
                             {"space_energy", std::isfinite(s.space_energy) ? json(s.space_energy) : json(nullptr)}});
  }
  json& extra() { return j_; }
  void write(int status) {
    j_["finished"] = timestamp();
    j_["status"] = status;
    std::ofstream out(opts_.out / ("manifest_" + opts_.command + ".json"));
    out << j_.dump(2) << "\n";
  }

 private:
  const RunOptions& opts_;
  json j_;
};

std::vector<std::string> with_provenance(std::vector<std::string> cols) {
  cols.emplace_back("config_hash");
  cols.emplace_back("version");
  return cols;
}

void add_provenance(Row& row, const ExperimentConfig& cfg) {
  row.emplace_back(hex(cfg.hash));
  row.emplace_back(std::string(kVersion));
}

SolverConfig solver_config(const ExperimentConfig& cfg, SolverMode mode, double rank_tol) {
  SolverConfig s = cfg.solver;
  s.mode = mode;
  s.rank_tol = rank_tol;
  return s;
}

// Solver failures become rows, not aborted sweeps.
SolverOutcome safe_solve(const BlockMatrices& pair, const SolverConfig& cfg, std::uint64_t seed) {
  try {
    return solve(pair, cfg, seed);
  } catch (const std::exception& e) {
    std::cerr << "warning: solve failed (" << e.what() << ")\n";
    SolverOutcome out;
    out.mode = cfg.mode;
    return out;
  }
}

std::vector<PreparedSystem> prepare_all(const ExperimentConfig& cfg, const RunOptions& opts, Manifest& manifest) {
  std::vector<PreparedSystem> out;
  for (const auto& spec : cfg.systems) {
    out.push_back(prepare_system(spec, cfg, opts.limit_qubits));
    manifest.system(out.back());
  }
  return out;
}

}  // namespace

HybridBasis PreparedSystem::basis(int n_c, int n_q) const {
  std::vector<Determinant> cls(ranked.begin(), ranked.begin() + n_c);
  std::vector<SparseState> qs(krylov.begin(), krylov.begin() + n_q);
  return HybridBasis(std::move(cls), std::move(qs), space);
}

PreparedSystem prepare_system(const SystemSpec& spec, const ExperimentConfig& cfg, int limit_qubits) {
  PreparedSystem s{spec.name, resolve_hamiltonian(spec.hamiltonian), nullptr, {}, {}, 0.0, {}, {}, nan()};
  const int n = s.h.n_qubit();
  if (n > limit_qubits) {
    throw SizeLimitError("system '" + spec.name + "' has " + std::to_string(n) + " qubits; the limit is " +
                         std::to_string(limit_qubits) + " (raise --limit-qubits, at most 30 supported)");
  }
  std::optional<int> electrons = spec.electrons;
  if (!electrons && spec.hamiltonian.rfind("builtin:", 0) == 0) {
    electrons = toy_system(spec.hamiltonian.substr(8)).electrons;
  }
  s.space = std::make_shared<const RestrictedSpace>(electrons ? RestrictedSpace::particle_sector(n, *electrons)
                                                              : RestrictedSpace::full(n));
  if (spec.ranking) {
    const auto records = load_determinant_list(*spec.ranking);
    for (const auto& r : records) {
      if (!r.weight) throw ConfigError("ranking file " + spec.ranking->string() + " needs a weight column");
    }
    s.ranked = rank_determinants(s.h, *s.space, &records);
  } else {
    s.ranked = rank_determinants(s.h, *s.space);
  }
  if (spec.reference) {
    s.reference = Determinant::from_string(*spec.reference);
    if (!s.space->contains(s.reference)) throw ConfigError("reference " + *spec.reference + " is outside the space");
  } else {
    s.reference = lowest_diagonal_determinant(s.h, *s.space);
  }
  s.tau = cfg.tau ? *cfg.tau : default_tau(s.h);

  const int max_nc = *std::max_element(cfg.n_c.begin(), cfg.n_c.end());
  const int max_nq = *std::max_element(cfg.n_q.begin(), cfg.n_q.end());
  if (max_nc > static_cast<int>(s.ranked.size())) {
    throw ConfigError("system '" + spec.name + "': n_c = " + std::to_string(max_nc) + " exceeds the " +
                      std::to_string(s.ranked.size()) + " ranked determinants");
  }
  if (max_nq > 0) {
    KrylovConfig kc;
    kc.tau = s.tau;
    kc.n_states = max_nq;
    kc.reference = s.reference;
    kc.evolution_tol = cfg.evolution_tol;
    s.krylov = krylov_states(s.h, *s.space, kc);
  }
  s.exact = build_exact_blocks(s.h, s.basis(max_nc, max_nq));
  s.exact.hermitize();
  if (static_cast<Eigen::Index>(s.space->size()) <= kDenseSolveLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(Eigen::MatrixXcd(project_hamiltonian(s.h, *s.space)),
                                                        Eigen::EigenvaluesOnly);
    s.space_energy = eig.eigenvalues()(0);
  }
  return s;
}

double iso_error_n_c(const std::vector<std::pair<int, double>>& row, double level) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [nc, err] : row) pts.emplace_back(static_cast<double>(nc), std::max(err, 1e-300));
  const auto env = lower_envelope(pts);
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (env[i].second <= level) {
      if (i == 0) return env[0].first;
      const auto& a = env[i - 1];
      const auto& b = env[i];
      const double t = (std::log(level) - std::log(a.second)) / (std::log(b.second) - std::log(a.second));
      return std::exp(std::log(a.first) + t * (std::log(b.first) - std::log(a.first)));
    }
  }
  return nan();
}

std::vector<MarginalRow> marginal_replacement(const std::vector<int>& n_q_values,
                                              const std::vector<std::vector<std::pair<int, double>>>& rows,
                                              const std::vector<double>& contours) {
  std::vector<MarginalRow> out;
  for (double level : contours) {
    for (std::size_t k = 0; k + 1 < n_q_values.size(); ++k) {
      MarginalRow r;
      r.contour = level;
      r.n_q_from = n_q_values[k];
      r.n_q_to = n_q_values[k + 1];
      r.n_c_from = iso_error_n_c(rows[k], level);
      r.n_c_to = iso_error_n_c(rows[k + 1], level);
      r.delta_n_c = r.n_c_from - r.n_c_to;
      out.push_back(r);
    }
  }
  return out;
}

int cmd_exact(const ExperimentConfig& cfg, const RunOptions& opts) {
  Manifest manifest(opts, &cfg);
  const auto systems = prepare_all(cfg, opts, manifest);
  const std::uint64_t seed = opts.seed_base + cfg.seeds.front();

  struct Task {
    std::size_t sys;
    int n_c;
    int n_q;
    SolverMode mode;
    double rank_tol;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < systems.size(); ++s)
    for (SolverMode mode : cfg.modes)
      for (double rt : cfg.rank_tols)
        for (int nq : cfg.n_q)
          for (int nc : cfg.n_c) tasks.push_back({s, nc, nq, mode, rt});

  CsvWriter grid(opts.out / "exact_grid.csv",
                 with_provenance({"system", "n_qubit", "n_c", "n_q", "shots", "seed", "mode", "tau_rank", "tau",
                                  "energy", "space_energy", "abs_error", "classical_weight", "n_discarded",
                                  "converged", "all_truncated", "iterations", "residual"}));
  CsvWriter weights(opts.out / "exact_weights.csv",
                    with_provenance({"system", "n_c", "n_q", "mode", "tau_rank", "classical_weight", "n_discarded"}));

  // (system, mode, tau_rank) -> n_q -> [(n_c, |error|)]
  std::map<std::tuple<std::size_t, int, double>, std::map<int, std::vector<std::pair<int, double>>>> errors;
  std::size_t next = 0;
  run_pool(
      tasks.size(), opts.workers,
      [&](std::size_t i) {
        const Task& t = tasks[i];
        const PreparedSystem& sys = systems[t.sys];
        const SolverOutcome o = safe_solve(sys.exact.truncated(t.n_c, t.n_q), solver_config(cfg, t.mode, t.rank_tol), seed);
        Row row{sys.name, std::int64_t{sys.h.n_qubit()}, std::int64_t{t.n_c}, std::int64_t{t.n_q}, std::uint64_t{kExactShots},
                seed, to_string(t.mode), t.rank_tol, sys.tau, o.energy, sys.space_energy,
                std::abs(o.energy - sys.space_energy), o.classical_weight, std::int64_t{o.n_discarded}, o.converged,
                o.all_truncated, std::int64_t{o.iterations}, o.residual};
        add_provenance(row, cfg);
        return std::vector<Row>{row};
      },
      [&](std::vector<Row>&& rows) {
        const Task& t = tasks[next++];
        for (auto& r : rows) {
          grid.write(r);
          Row w{r[0], r[2], r[3], r[6], r[7], r[12], r[13]};
          add_provenance(w, cfg);
          weights.write(w);
          errors[{t.sys, static_cast<int>(t.mode), t.rank_tol}][t.n_q].emplace_back(t.n_c, std::get<double>(r[11]));
        }
      });

  CsvWriter marginal(opts.out / "exact_marginal.csv",
                     with_provenance({"system", "mode", "tau_rank", "contour", "n_q_from", "n_q_to", "n_c_from",
                                      "n_c_to", "delta_n_c"}));
  for (const auto& [key, by_nq] : errors) {
    std::vector<int> nqs;
    std::vector<std::vector<std::pair<int, double>>> rows;
    for (const auto& [nq, row] : by_nq) {
      nqs.push_back(nq);
      auto sorted = row;
      std::sort(sorted.begin(), sorted.end());
      rows.push_back(std::move(sorted));
    }
    for (const auto& m : marginal_replacement(nqs, rows, cfg.contours)) {
      Row r{systems[std::get<0>(key)].name, to_string(static_cast<SolverMode>(std::get<1>(key))), std::get<2>(key),
            m.contour, std::int64_t{m.n_q_from}, std::int64_t{m.n_q_to}, m.n_c_from, m.n_c_to, m.delta_n_c};
      add_provenance(r, cfg);
      marginal.write(r);
    }
  }
  manifest.output(grid.path(), grid.rows());
  manifest.output(weights.path(), weights.rows());
  manifest.output(marginal.path(), marginal.rows());
  const int status = grid.rows() == tasks.size() ? 0 : 1;
  manifest.write(status);
  return status;
}

namespace {

EstimatedBlock estimate(const PreparedSystem& sys, const ExperimentConfig& cfg, int n_c, int n_q,
                        std::uint64_t shots, std::uint64_t seed) {
  const HybridBasis basis = sys.basis(n_c, n_q);
  if (cfg.estimator == "shadow") {
    if (shots == kExactShots) {
      // No finite-snapshot analogue of the exact limit; fall back to exact tables.
      return estimate_cq_block(sys.h, basis, BatchPlan::make(static_cast<std::size_t>(n_c), cfg.batch_size), shots, seed);
    }
    ShadowOptions so;
    so.groups = cfg.shadow_groups;
    return shadow_estimate_cq_block(sys.h, basis, shots, seed, so);
  }
  return estimate_cq_block(sys.h, basis, BatchPlan::make(static_cast<std::size_t>(n_c), cfg.batch_size), shots, seed);
}

}  // namespace

int cmd_sample(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.shots.empty()) throw ConfigError("config: shots: required for the sample command");
  Manifest manifest(opts, &cfg);
  const auto systems = prepare_all(cfg, opts, manifest);

  struct Task {
    std::size_t sys;
    int n_c;
    int n_q;
    std::uint64_t shots;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < systems.size(); ++s)
    for (int nq : cfg.n_q)
      for (int nc : cfg.n_c)
        for (std::uint64_t shots : cfg.shots)
          for (std::uint64_t seed : cfg.seeds) tasks.push_back({s, nc, nq, shots, opts.seed_base + seed});

  CsvWriter csv(opts.out / "sample.csv",
                with_provenance({"system", "n_qubit", "n_c", "n_q", "estimator", "shots", "total_shots", "seed",
                                 "mode", "tau_rank", "tau", "dH_frob", "dS_frob", "dH_trunc_frob", "conditioning", "w_unres",
                                 "w_tau", "reference_energy", "e_inf", "energy", "abs_error", "classical_weight", "n_discarded",
                                 "converged", "all_truncated"}));
  const std::size_t per_task = cfg.modes.size() * cfg.rank_tols.size();
  run_pool(
      tasks.size(), opts.workers,
      [&](std::size_t i) {
        const Task& t = tasks[i];
        const PreparedSystem& sys = systems[t.sys];
        const BlockMatrices exact = sys.exact.truncated(t.n_c, t.n_q);
        const EstimatedBlock est = estimate(sys, cfg, t.n_c, t.n_q, t.shots, t.seed);
        const BlockMatrices pair = inject_qq(est, exact);
        const DenseReference ref = dense_reference(exact);
        const double dh = (est.H_cq_hat - exact.H_cq).norm();
        const double ds = (est.S_cq_hat - exact.S_cq).norm();
        const double cond = conditioning_metric(pair);
        // Infinite-shot limit of the same estimator. Separates the truncation of shifted
        // strings outside the classical set from sampling noise.
        const EstimatedBlock lim = estimate(sys, cfg, t.n_c, t.n_q, kExactShots, t.seed);
        const BlockMatrices lim_pair = inject_qq(lim, exact);
        const double trunc = (lim.H_cq_hat - exact.H_cq).norm();
        const UnresolvedWeight w = unresolved_weight(exact, est.S_cq_hat, exact.S_qq, ref.vector);
        std::map<std::pair<SolverMode, double>, double> e_inf;
        for (SolverMode mode : cfg.modes)
          for (double rt : cfg.rank_tols)
            e_inf[{mode, rt}] = safe_solve(lim_pair, solver_config(cfg, mode, rt), t.seed).energy;
        std::vector<Row> rows;
        for (SolverMode mode : cfg.modes) {
          for (double rt : cfg.rank_tols) {
            const SolverOutcome o = safe_solve(pair, solver_config(cfg, mode, rt), t.seed);
            Row row{sys.name, std::int64_t{sys.h.n_qubit()}, std::int64_t{t.n_c}, std::int64_t{t.n_q}, cfg.estimator,
                    t.shots, est.total_shots, t.seed, to_string(mode), rt, sys.tau, dh, ds, trunc, cond, w.weight,
                    w.tau, ref.energy, e_inf.at({mode, rt}), o.energy, std::abs(o.energy - ref.energy), o.classical_weight,
                    std::int64_t{o.n_discarded}, o.converged, o.all_truncated};
            add_provenance(row, cfg);
            rows.push_back(std::move(row));
          }
        }
        return rows;
      },
      [&](std::vector<Row>&& rows) {
        for (auto& r : rows) csv.write(r);
      });
  manifest.output(csv.path(), csv.rows());
  const int status = csv.rows() == tasks.size() * per_task ? 0 : 1;
  manifest.write(status);
  return status;
}

int cmd_solver_bench(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.shots.empty() && cfg.alphas.empty()) {
    throw ConfigError("config: shots or synthetic.alpha: the solver-bench command needs at least one noise point");
  }
  Manifest manifest(opts, &cfg);
  const auto systems = prepare_all(cfg, opts, manifest);

  struct Task {
    std::size_t sys;
    int n_c;
    int n_q;
    bool synthetic;
    double noise;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < systems.size(); ++s)
    for (int nq : cfg.n_q)
      for (int nc : cfg.n_c) {
        for (std::uint64_t shots : cfg.shots)
          for (std::uint64_t seed : cfg.seeds) tasks.push_back({s, nc, nq, false, static_cast<double>(shots), opts.seed_base + seed});
        for (double a : cfg.alphas)
          for (std::uint64_t seed : cfg.seeds) tasks.push_back({s, nc, nq, true, a, opts.seed_base + seed});
      }

  const std::vector<std::string> run_cols{"system", "n_c", "n_q", "family", "noise", "seed", "frobenius", "mode",
                                          "tau_rank", "reference_energy", "energy", "abs_error", "classical_weight",
                                          "n_discarded", "converged", "all_truncated"};
  CsvWriter runs(opts.out / "solver_bench_runs.csv", with_provenance(run_cols));

  struct Acc {
    std::vector<double> err, energy, frob, discarded;
    std::size_t converged = 0, failed = 0, truncated = 0;
  };
  std::map<std::tuple<std::size_t, int, int, bool, double, int, double>, Acc> acc;
  std::size_t next = 0;
  run_pool(
      tasks.size(), opts.workers,
      [&](std::size_t i) {
        const Task& t = tasks[i];
        const PreparedSystem& sys = systems[t.sys];
        const BlockMatrices exact = sys.exact.truncated(t.n_c, t.n_q);
        const DenseReference ref = dense_reference(exact);
        BlockMatrices pair;
        double frob = 0.0;
        if (t.synthetic) {
          const EstimatedBlock base = estimate(sys, cfg, t.n_c, t.n_q, cfg.reference_shots, t.seed);
          SyntheticNoise sn = synthetic_alpha_noise(exact, base, t.noise);
          pair = std::move(sn.pair);
          frob = sn.frobenius;
        } else {
          const EstimatedBlock est = estimate(sys, cfg, t.n_c, t.n_q, static_cast<std::uint64_t>(t.noise), t.seed);
          pair = inject_qq(est, exact);
          frob = overlap_error_frobenius(est.S_cq_hat - exact.S_cq, Eigen::MatrixXcd::Zero(t.n_q, t.n_q));
        }
        std::vector<Row> rows;
        for (SolverMode mode : cfg.modes) {
          for (double rt : cfg.rank_tols) {
            const SolverOutcome o = safe_solve(pair, solver_config(cfg, mode, rt), t.seed);
            Row row{sys.name, std::int64_t{t.n_c}, std::int64_t{t.n_q}, std::string(t.synthetic ? "synthetic" : "sampled"),
                    t.noise, t.seed, frob, to_string(mode), rt, ref.energy, o.energy, std::abs(o.energy - ref.energy),
                    o.classical_weight, std::int64_t{o.n_discarded}, o.converged, o.all_truncated};
            add_provenance(row, cfg);
            rows.push_back(std::move(row));
          }
        }
        return rows;
      },
      [&](std::vector<Row>&& rows) {
        const Task& t = tasks[next++];
        for (auto& r : rows) {
          runs.write(r);
          const SolverMode mode = solver_mode_from_string(std::get<std::string>(r[7]));
          Acc& a = acc[{t.sys, t.n_c, t.n_q, t.synthetic, t.noise, static_cast<int>(mode), std::get<double>(r[8])}];
          const double energy = std::get<double>(r[10]);
          const bool conv = std::get<bool>(r[14]);
          a.err.push_back(std::get<double>(r[11]));
          a.energy.push_back(energy);
          a.frob.push_back(std::get<double>(r[6]));
          a.discarded.push_back(static_cast<double>(std::get<std::int64_t>(r[13])));
          a.converged += conv ? 1 : 0;
          a.failed += (!conv || !std::isfinite(energy)) ? 1 : 0;
          a.truncated += std::get<bool>(r[15]) ? 1 : 0;
        }
      });

  CsvWriter summary(opts.out / "solver_bench.csv",
                    with_provenance({"system", "n_c", "n_q", "family", "noise", "mode", "tau_rank", "n_seeds",
                                     "median_abs_error", "median_energy", "mean_frobenius", "median_n_discarded",
                                     "n_converged", "n_failed", "n_all_truncated"}));
  for (const auto& [k, a] : acc) {
    const auto& [s, nc, nq, synth, noise, mode, rt] = k;
    const double mean_frob = std::accumulate(a.frob.begin(), a.frob.end(), 0.0) / static_cast<double>(a.frob.size());
    Row row{systems[s].name, std::int64_t{nc}, std::int64_t{nq}, std::string(synth ? "synthetic" : "sampled"), noise,
            to_string(static_cast<SolverMode>(mode)), rt, static_cast<std::uint64_t>(a.err.size()), median(a.err),
            median(a.energy), mean_frob, median(a.discarded), static_cast<std::uint64_t>(a.converged),
            static_cast<std::uint64_t>(a.failed), static_cast<std::uint64_t>(a.truncated)};
    add_provenance(row, cfg);
    summary.write(row);
  }
  manifest.output(runs.path(), runs.rows());
  manifest.output(summary.path(), summary.rows());
  const int status = runs.rows() == tasks.size() * cfg.modes.size() * cfg.rank_tols.size() ? 0 : 1;
  manifest.write(status);
  return status;
}

int cmd_analyze(const ExperimentConfig& cfg, const RunOptions& opts) {
  const std::filesystem::path sweep = cfg.analyze.sweep ? *cfg.analyze.sweep : opts.out / "sample.csv";
  if (!std::filesystem::exists(sweep)) {
    throw DependencyError("analyze needs the shot-sweep table written by `canoe sample`; not found: " + sweep.string());
  }
  Manifest manifest(opts, &cfg);
  manifest.extra()["sweep"] = sweep.string();

  // Complexity tables.
  CsvWriter cx(opts.out / "complexity.csv",
               with_provenance({"system", "n_qubit", "n_c", "n_q", "m", "n_batches", "n_terms", "norm_1", "norm_2",
                                "epsilon", "delta", "hadamard", "shadow", "histogram"}));
  for (const auto& spec : cfg.systems) {
    const PauliHamiltonian h = resolve_hamiltonian(spec.hamiltonian);
    for (int nq : cfg.n_q) {
      if (nq == 0) continue;
      for (int nc : cfg.n_c) {
        const double m = static_cast<double>(std::min<std::size_t>(cfg.batch_size, static_cast<std::size_t>(nc)));
        const auto in = ComplexityInputs::with_batches(nc, nq, m, static_cast<double>(h.n_terms()), h.n_qubit(),
                                                       h.norm_1(), h.norm_2(), cfg.analyze.epsilon, cfg.analyze.delta);
        Row row{spec.name, std::int64_t{h.n_qubit()}, std::int64_t{nc}, std::int64_t{nq}, m, in.n_batches,
                static_cast<std::uint64_t>(h.n_terms()), h.norm_1(), h.norm_2(), in.epsilon, in.delta,
                complexity(ComplexityMethod::hadamard, in), complexity(ComplexityMethod::shadow, in),
                complexity(ComplexityMethod::histogram, in)};
        add_provenance(row, cfg);
        cx.write(row);
      }
    }
  }
  manifest.output(cx.path(), cx.rows());

  // Unresolved weight and error curves from the shot sweep.
  const CsvTable t = read_csv(sweep);
  const auto c_sys = t.column("system"), c_nqb = t.column("n_qubit"), c_nc = t.column("n_c"), c_nq = t.column("n_q"),
             c_shots = t.column("shots"), c_seed = t.column("seed"), c_mode = t.column("mode"),
             c_rt = t.column("tau_rank"), c_w = t.column("w_unres"), c_err = t.column("abs_error");
  struct Key {
    std::string sys;
    int nc, nq;
    std::uint64_t shots;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::map<std::string, double>> w_by_seed;
  std::map<std::string, std::pair<std::string, std::string>> first_mode;
  std::map<std::string, std::pair<int, int>> largest;
  std::map<std::string, int> n_qubit;
  for (const auto& r : t.rows) {
    const Key k{r[c_sys], std::stoi(r[c_nc]), std::stoi(r[c_nq]), std::stoull(r[c_shots])};
    w_by_seed[k][r[c_seed]] = std::stod(r[c_w]);
    first_mode.try_emplace(k.sys, r[c_mode], r[c_rt]);
    auto& l = largest[k.sys];
    l = std::max(l, std::make_pair(k.nc, k.nq));
    n_qubit[k.sys] = std::stoi(r[c_nqb]);
  }
  CsvWriter wu(opts.out / "w_unres.csv",
               with_provenance({"system", "n_c", "n_q", "shots", "n_seeds", "w_unres_mean"}));
  for (const auto& [k, seeds] : w_by_seed) {
    double sum = 0.0;
    for (const auto& [_, w] : seeds) sum += w;
    Row row{k.sys, std::int64_t{k.nc}, std::int64_t{k.nq}, k.shots, static_cast<std::uint64_t>(seeds.size()),
            sum / static_cast<double>(seeds.size())};
    add_provenance(row, cfg);
    wu.write(row);
  }
  manifest.output(wu.path(), wu.rows());

  std::map<std::string, std::map<double, std::vector<double>>> curves;
  for (const auto& r : t.rows) {
    const std::string& sys = r[c_sys];
    const auto shots = std::stod(r[c_shots]);
    if (shots <= 0.0) continue;
    if (std::make_pair(std::stoi(r[c_nc]), std::stoi(r[c_nq])) != largest[sys]) continue;
    if (std::make_pair(r[c_mode], r[c_rt]) != first_mode[sys]) continue;
    curves[sys][shots].push_back(std::stod(r[c_err]));
  }
  std::vector<ErrorCurve> ec;
  for (const auto& [sys, by_shots] : curves) {
    ErrorCurve c;
    c.system = sys;
    c.n_qubit = n_qubit[sys];
    c.n_q = largest[sys].second;
    for (const auto& [shots, errs] : by_shots) {
      c.points.emplace_back(shots, std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size()));
    }
    ec.push_back(std::move(c));
  }
  json fit_json;
  fit_json["threshold"] = kChemicalAccuracy;
  fit_json["target_nq"] = cfg.analyze.target_nq;
  fit_json["target_qubits"] = cfg.analyze.target_qubits;
  fit_json["points"] = json::array();
  try {
    const ExtrapolationFit fit = extrapolate_shots(ec, cfg.analyze.target_nq, cfg.analyze.target_qubits);
    fit_json["a"] = fit.a;
    fit_json["b"] = fit.b;
    fit_json["r2"] = fit.r2;
    fit_json["predicted_shots_per_histogram"] = fit.predicted_shots;
    for (const auto& p : fit.points) {
      fit_json["points"].push_back({{"system", p.system}, {"usable", p.usable}, {"extrapolated", p.extrapolated},
                                    {"shots", p.shots}, {"adjusted_shots", p.adjusted_shots}, {"x", p.x}});
    }
  } catch (const DataError& e) {
    fit_json["fit"] = nullptr;
    fit_json["error"] = e.what();
    for (const auto& c : ec) {
      const CrossingPoint p = chemical_accuracy_crossing(c, cfg.analyze.target_nq);
      fit_json["points"].push_back({{"system", p.system}, {"usable", p.usable}, {"extrapolated", p.extrapolated},
                                    {"shots", p.shots}, {"adjusted_shots", p.adjusted_shots}, {"x", p.x}});
    }
    std::cerr << "note: " << e.what() << "\n";
  }
  {
    std::ofstream out(opts.out / "extrapolation.json");
    out << fit_json.dump(2) << "\n";
    manifest.output(opts.out / "extrapolation.json", 1);
  }

  // Error-rate bounds; the defaults are the quartic and linear term counts at 100 qubits.
  std::vector<ErrorRateSpec> specs = cfg.analyze.error_rate;
  if (specs.empty()) specs = {{1e8, 10, 64, 1e-3}, {100, 10, 64, 1e-3}};
  CsvWriter er(opts.out / "error_rate.csv",
               with_provenance({"terms", "trotter_steps", "krylov_index", "delta", "gate_depth", "p_max"}));
  for (const auto& s : specs) {
    const ErrorRateBound b = error_rate_bound(s.terms, s.trotter_steps, s.krylov_index, s.delta);
    Row row{s.terms, s.trotter_steps, s.krylov_index, s.delta, b.gate_depth, b.p_max};
    add_provenance(row, cfg);
    er.write(row);
  }
  manifest.output(er.path(), er.rows());
  manifest.write(0);
  return 0;
}

int cmd_self_test(const RunOptions& opts, std::ostream& log) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    log << (ok ? "PASS " : "FAIL ") << name << (ok || detail.empty() ? "" : ": " + detail) << "\n";
    failures += ok ? 0 : 1;
  };
  auto guarded = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
      const auto [ok, detail] = body();
      check(name, ok, detail);
    } catch (const std::exception& e) {
      check(name, false, e.what());
    }
  };

  for (const auto& toy : toy_systems()) {
    if (toy.spectrum.empty()) continue;
    guarded("spectrum " + toy.name, [&] {
      const PauliHamiltonian h = parse_hamiltonian(toy.text);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(to_dense(h), Eigen::EigenvaluesOnly);
      double err = 0.0;
      for (std::size_t i = 0; i < toy.spectrum.size(); ++i) {
        err = std::max(err, std::abs(eig.eigenvalues()(static_cast<Eigen::Index>(i)) - toy.spectrum[i]));
      }
      return std::make_pair(err < 1e-12, "max deviation " + format_double(err));
    });
  }
  guarded("pauli action matches dense build", [&] {
    const PauliHamiltonian h = parse_hamiltonian(toy_system("xy4").text);
    const Eigen::MatrixXcd dense = to_dense(h);
    const SparseMatrixC proj = project_hamiltonian(h, RestrictedSpace::full(4));
    const double err = (Eigen::MatrixXcd(proj) - dense).cwiseAbs().maxCoeff();
    return std::make_pair(err < 1e-14, "max deviation " + format_double(err));
  });
  guarded("krylov phase on z1", [&] {
    const PauliHamiltonian h = parse_hamiltonian(toy_system("z1").text);
    KrylovConfig kc;
    kc.tau = 0.3;
    kc.n_states = 2;
    kc.reference = Determinant(0, 1);
    const auto states = krylov_states(h, RestrictedSpace::full(1), kc);
    const double err = std::abs(states[1].amplitude(Determinant(0, 1)) - std::exp(Complex(0.0, -0.3)));
    return std::make_pair(err < 1e-12, "deviation " + format_double(err));
  });
  guarded("exact pipeline on xy4", [&] {
    ExperimentConfig cfg;
    cfg.n_c = {3};
    cfg.n_q = {3};
    const PreparedSystem sys = prepare_system({"xy4", "builtin:xy4", std::nullopt, std::nullopt, std::nullopt}, cfg, 16);
    const DenseReference ref = dense_reference(sys.exact);
    SolverConfig sc;
    sc.mode = SolverMode::deflation;
    const SolverOutcome o = solve(sys.exact, sc, 1);
    const double err = std::abs(o.energy - ref.energy);
    return std::make_pair(o.converged && err < 1e-9, "deviation " + format_double(err));
  });
  guarded("exact-limit histogram estimator", [&] {
    ExperimentConfig cfg;
    cfg.n_c = {6};
    cfg.n_q = {3};
    const PreparedSystem sys = prepare_system({"xy4", "builtin:xy4", std::nullopt, std::nullopt, std::nullopt}, cfg, 16);
    const EstimatedBlock est = estimate_cq_block(sys.h, sys.basis(6, 3), BatchPlan::make(6, 4), kExactShots, 0);
    const double err = std::max((est.S_cq_hat - sys.exact.S_cq).cwiseAbs().maxCoeff(),
                                (est.H_cq_hat - sys.exact.H_cq).cwiseAbs().maxCoeff());
    return std::make_pair(err < 1e-12, "deviation " + format_double(err));
  });

  Manifest manifest(opts, nullptr);
  manifest.extra()["failures"] = failures;
  manifest.write(failures == 0 ? 0 : 1);
  log << (failures == 0 ? "self-test passed" : "self-test FAILED") << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace canoe::cli
