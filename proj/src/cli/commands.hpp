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
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "canoe/errors.hpp"
#include "canoe/subspace.hpp"
#include "cli/config.hpp"

namespace canoe::cli {

/// A command needs the output of an earlier command that is not present.
class DependencyError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct RunOptions {
  std::string command;
  std::filesystem::path out = ".";
  std::uint64_t seed_base = 0;
  int workers = 1;
  int limit_qubits = 16;
  std::vector<std::string> argv;
};

/// Everything about one system that every sweep point shares.
struct PreparedSystem {
  std::string name;
  PauliHamiltonian h;
  std::shared_ptr<const RestrictedSpace> space;
  std::vector<Determinant> ranked;
  Determinant reference;
  double tau = 0.0;
  std::vector<SparseState> krylov;
  BlockMatrices exact;       // largest requested (N_c, N_q)
  double space_energy = 0.0; // ground energy of the projected Hamiltonian, nan if too large

  HybridBasis basis(int n_c, int n_q) const;
};

PreparedSystem prepare_system(const SystemSpec& spec, const ExperimentConfig& cfg, int limit_qubits);

struct MarginalRow {
  double contour = 0.0;
  int n_q_from = 0;
  int n_q_to = 0;
  double n_c_from = 0.0;
  double n_c_to = 0.0;
  double delta_n_c = 0.0;
};

/// Continuous N_c at which an error row first reaches `level`, using log-log
/// interpolation along its running minimum. NaN when the row never gets there.
double iso_error_n_c(const std::vector<std::pair<int, double>>& row, double level);

/// Classical determinants saved per added quantum state along iso-error contours.
std::vector<MarginalRow> marginal_replacement(const std::vector<int>& n_q_values,
                                              const std::vector<std::vector<std::pair<int, double>>>& rows,
                                              const std::vector<double>& contours);

int cmd_exact(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_sample(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_solver_bench(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_analyze(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_self_test(const RunOptions& opts, std::ostream& log);

}  // namespace canoe::cli
