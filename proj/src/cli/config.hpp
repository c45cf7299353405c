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


#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "canoe/gensolver.hpp"

namespace canoe::cli {

struct SystemSpec {
  std::string name;
  std::string hamiltonian;  // file path or builtin:<name>
  std::optional<std::filesystem::path> ranking;
  std::optional<int> electrons;
  std::optional<std::string> reference;
};

struct ErrorRateSpec {
  double terms = 0.0;
  double trotter_steps = 0.0;
  double krylov_index = 0.0;
  double delta = 0.0;
};

struct AnalyzeSpec {
  double epsilon = 1.5936e-3;
  double delta = 0.05;
  int target_nq = 64;
  int target_qubits = 100;
  std::optional<std::filesystem::path> sweep;
  std::vector<ErrorRateSpec> error_rate;
};

struct ExperimentConfig {
  std::filesystem::path source;
  std::string text;
  std::uint64_t hash = 0;

  std::vector<SystemSpec> systems;
  std::vector<int> n_c;
  std::vector<int> n_q;
  std::optional<double> tau;
  double evolution_tol = 1e-12;
  std::size_t batch_size = 5000;
  std::vector<std::uint64_t> shots;
  std::vector<std::uint64_t> seeds;
  std::string estimator = "histogram";
  std::size_t shadow_groups = 1;
  std::vector<SolverMode> modes{SolverMode::deflation};
  std::vector<double> rank_tols{1e-6};
  SolverConfig solver;
  std::vector<double> alphas;
  std::uint64_t reference_shots = 100000;
  std::vector<double> contours{1.5936e-3};
  AnalyzeSpec analyze;
  std::optional<std::filesystem::path> out;
};

std::uint64_t fnv1a(std::string_view text) noexcept;

/// Parses and validates a JSON config. Errors name the offending key path.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace canoe::cli
