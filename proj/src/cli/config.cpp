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


#include "cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "canoe/errors.hpp"

namespace canoe::cli {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected a table");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double as_positive(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (!(x > 0.0)) fail(path, "expected a positive number");
  return x;
}

std::int64_t as_integer(const json& v, const std::string& path, std::int64_t lo) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < lo) fail(path, "expected an integer >= " + std::to_string(lo));
  return x;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

template <class F>
auto as_list(const json& v, const std::string& path, F&& each) {
  using T = decltype(each(v, path));
  if (!v.is_array()) fail(path, "expected a list");
  if (v.empty()) fail(path, "list must be nonempty");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(each(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path q(p);
  return q.is_absolute() ? q : base / q;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(root, "", {"systems", "n_c", "n_q", "tau", "evolution_tol", "batch_size", "shots", "seeds",
                        "n_seeds", "estimator", "shadow_groups", "modes", "tau_rank", "solver", "synthetic",
                        "contours", "analyze", "out"});
  ExperimentConfig cfg;
  cfg.text = text;
  cfg.hash = fnv1a(text);

  if (!root.contains("systems")) fail("systems", "required key is missing");
  cfg.systems = as_list(root["systems"], "systems", [&](const json& s, const std::string& p) {
    check_keys(s, p, {"name", "hamiltonian", "ranking", "electrons", "reference"});
    SystemSpec spec;
    if (!s.contains("hamiltonian")) fail(join(p, "hamiltonian"), "required key is missing");
    spec.hamiltonian = as_string(s["hamiltonian"], join(p, "hamiltonian"));
    if (spec.hamiltonian.rfind("builtin:", 0) != 0) {
      const auto path = resolve(base_dir, spec.hamiltonian);
      if (!std::filesystem::exists(path)) fail(join(p, "hamiltonian"), "file not found: " + path.string());
      spec.hamiltonian = path.string();
    }
    spec.name = s.contains("name") ? as_string(s["name"], join(p, "name")) : spec.hamiltonian;
    if (spec.name.find_first_of(",\"\n") != std::string::npos) fail(join(p, "name"), "name may not contain , \" or newlines");
    if (s.contains("ranking")) {
      const auto path = resolve(base_dir, as_string(s["ranking"], join(p, "ranking")));
      if (!std::filesystem::exists(path)) fail(join(p, "ranking"), "file not found: " + path.string());
      spec.ranking = path;
    }
    if (s.contains("electrons")) spec.electrons = static_cast<int>(as_integer(s["electrons"], join(p, "electrons"), 0));
    if (s.contains("reference")) {
      spec.reference = as_string(s["reference"], join(p, "reference"));
      if (spec.reference->find_first_not_of("01") != std::string::npos || spec.reference->empty()) {
        fail(join(p, "reference"), "expected a bitstring over {0,1}");
      }
    }
    return spec;
  });

  auto int_list = [&](const char* key, std::int64_t lo, std::vector<int> fallback) {
    if (!root.contains(key)) return fallback;
    return as_list(root[key], key, [&](const json& v, const std::string& p) {
      return static_cast<int>(as_integer(v, p, lo));
    });
  };
  cfg.n_c = int_list("n_c", 1, {1});
  cfg.n_q = int_list("n_q", 0, {0});
  if (root.contains("tau")) cfg.tau = as_positive(root["tau"], "tau");
  if (root.contains("evolution_tol")) cfg.evolution_tol = as_positive(root["evolution_tol"], "evolution_tol");
  if (root.contains("batch_size")) cfg.batch_size = static_cast<std::size_t>(as_integer(root["batch_size"], "batch_size", 1));
  if (root.contains("shots")) {
    cfg.shots = as_list(root["shots"], "shots", [&](const json& v, const std::string& p) {
      if (v.is_string() && v.get<std::string>() == "exact") return std::uint64_t{0};
      return static_cast<std::uint64_t>(as_integer(v, p, 1));
    });
  }
  if (root.contains("seeds") && root.contains("n_seeds")) fail("seeds", "give either seeds or n_seeds, not both");
  if (root.contains("seeds")) {
    cfg.seeds = as_list(root["seeds"], "seeds", [&](const json& v, const std::string& p) {
      return static_cast<std::uint64_t>(as_integer(v, p, 0));
    });
  } else {
    const auto n = root.contains("n_seeds") ? as_integer(root["n_seeds"], "n_seeds", 1) : 1;
    for (std::int64_t i = 0; i < n; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (root.contains("estimator")) {
    cfg.estimator = as_string(root["estimator"], "estimator");
    if (cfg.estimator != "histogram" && cfg.estimator != "shadow") fail("estimator", "expected histogram or shadow");
  }
  if (root.contains("shadow_groups")) cfg.shadow_groups = static_cast<std::size_t>(as_integer(root["shadow_groups"], "shadow_groups", 1));
  if (root.contains("modes")) {
    cfg.modes = as_list(root["modes"], "modes", [&](const json& v, const std::string& p) {
      try {
        return solver_mode_from_string(as_string(v, p));
      } catch (const ConfigError&) {
        fail(p, "expected plain, pseudo_inverse or deflation");
      }
    });
  }
  if (root.contains("tau_rank")) {
    cfg.rank_tols = as_list(root["tau_rank"], "tau_rank", [&](const json& v, const std::string& p) {
      const double x = as_number(v, p);
      if (x < 0.0) fail(p, "expected a nonnegative number");
      return x;
    });
  }
  if (root.contains("solver")) {
    const json& s = root["solver"];
    check_keys(s, "solver", {"tol", "maxiter", "n_restarts"});
    if (s.contains("tol")) cfg.solver.tol = as_positive(s["tol"], "solver.tol");
    if (s.contains("maxiter")) cfg.solver.maxiter = static_cast<int>(as_integer(s["maxiter"], "solver.maxiter", 1));
    if (s.contains("n_restarts")) cfg.solver.n_restarts = static_cast<int>(as_integer(s["n_restarts"], "solver.n_restarts", 1));
  }
  if (root.contains("synthetic")) {
    const json& s = root["synthetic"];
    check_keys(s, "synthetic", {"alpha", "reference_shots"});
    if (s.contains("alpha")) {
      cfg.alphas = as_list(s["alpha"], "synthetic.alpha", [&](const json& v, const std::string& p) {
        const double x = as_number(v, p);
        if (x < 0.0) fail(p, "expected a nonnegative number");
        return x;
      });
    }
    if (s.contains("reference_shots")) {
      cfg.reference_shots = static_cast<std::uint64_t>(as_integer(s["reference_shots"], "synthetic.reference_shots", 1));
    }
  }
  if (root.contains("contours")) {
    cfg.contours = as_list(root["contours"], "contours", [&](const json& v, const std::string& p) { return as_positive(v, p); });
  }
  if (root.contains("analyze")) {
    const json& a = root["analyze"];
    check_keys(a, "analyze", {"epsilon", "delta", "target_nq", "target_qubits", "sweep", "error_rate"});
    if (a.contains("epsilon")) cfg.analyze.epsilon = as_positive(a["epsilon"], "analyze.epsilon");
    if (a.contains("delta")) {
      cfg.analyze.delta = as_positive(a["delta"], "analyze.delta");
      if (cfg.analyze.delta >= 1.0) fail("analyze.delta", "expected a value in (0, 1)");
    }
    if (a.contains("target_nq")) cfg.analyze.target_nq = static_cast<int>(as_integer(a["target_nq"], "analyze.target_nq", 1));
    if (a.contains("target_qubits")) cfg.analyze.target_qubits = static_cast<int>(as_integer(a["target_qubits"], "analyze.target_qubits", 1));
    if (a.contains("sweep")) cfg.analyze.sweep = resolve(base_dir, as_string(a["sweep"], "analyze.sweep"));
    if (a.contains("error_rate")) {
      cfg.analyze.error_rate = as_list(a["error_rate"], "analyze.error_rate", [&](const json& e, const std::string& p) {
        check_keys(e, p, {"terms", "trotter_steps", "krylov_index", "delta"});
        for (const char* k : {"terms", "trotter_steps", "krylov_index", "delta"}) {
          if (!e.contains(k)) fail(join(p, k), "required key is missing");
        }
        ErrorRateSpec spec{as_positive(e["terms"], join(p, "terms")), as_positive(e["trotter_steps"], join(p, "trotter_steps")),
                           as_positive(e["krylov_index"], join(p, "krylov_index")), as_positive(e["delta"], join(p, "delta"))};
        if (spec.delta >= 1.0) fail(join(p, "delta"), "expected a value in (0, 1)");
        return spec;
      });
    }
  }
  if (root.contains("out")) cfg.out = resolve(base_dir, as_string(root["out"], "out"));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str(), path.parent_path());
  cfg.source = path;
  return cfg;
}

}  // namespace canoe::cli
