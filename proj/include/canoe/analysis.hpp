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

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "canoe/estimators.hpp"
#include "canoe/subspace.hpp"

namespace canoe {

inline constexpr double kChemicalAccuracy = 1.5936e-3;
inline constexpr std::uint64_t kSyntheticReferenceShots = 100000;

/// S(alpha) = S + alpha (S_ref - S); the same interpolation is applied to the
/// sampled Hamiltonian block so the pair stays consistent.
struct SyntheticNoise {
  BlockMatrices pair;
  double frobenius = 0.0;  // ||S(alpha) - S||_F over the full assembled overlap
};

SyntheticNoise synthetic_alpha_noise(const BlockMatrices& exact, const EstimatedBlock& reference,
                                     double alpha);

/// Frobenius norm of the full overlap difference implied by a cq-block error.
double overlap_error_frobenius(const Eigen::MatrixXcd& delta_cq, const Eigen::MatrixXcd& delta_qq);

enum class ComplexityMethod { hadamard, shadow, histogram };

struct ComplexityInputs {
  double n_c = 1;
  double n_q = 1;
  double m = 1;
  double n_batches = 1;
  double n_terms = 1;
  double n_qubit = 1;
  double norm_1 = 1;
  double norm_2 = 1;
  double epsilon = 1;
  double delta = 0.05;

  /// Fills n_batches = ceil(n_c / m).
  static ComplexityInputs with_batches(double n_c, double n_q, double m, double n_terms,
                                       double n_qubit, double norm_1, double norm_2,
                                       double epsilon, double delta);
};

double complexity(ComplexityMethod method, const ComplexityInputs& in);

/// Per-histogram Hoeffding radius for the histogram protocol.
double hoeffding_epsilon(int n_qubit, std::size_t n_q, std::size_t n_batches, double delta,
                         std::uint64_t shots);

struct PerturbativeError {
  double shift = 0.0;
  double perturbation_size = 0.0;  // ||dH||_2 + |E0| ||dS||_2
  std::optional<bool> within_gap;
};

PerturbativeError perturbative_energy_error(const Eigen::MatrixXcd& d_h, const Eigen::MatrixXcd& d_s,
                                            double e0, const Eigen::VectorXcd& v0,
                                            std::optional<double> gap = std::nullopt);

struct UnresolvedWeight {
  double weight = 0.0;
  double tau = 0.0;
  Eigen::Index rank = 0;
};

/// Share of the exact ground vector in overlap modes with eigenvalue <= tau,
/// with tau the spectral norm of the compressed overlap error.
UnresolvedWeight unresolved_weight(const BlockMatrices& exact, const Eigen::MatrixXcd& sampled_cq,
                                   const Eigen::MatrixXcd& sampled_qq, const Eigen::VectorXcd& ground);

struct ErrorCurve {
  std::string system;
  int n_qubit = 1;
  int n_q = 1;
  std::vector<std::pair<double, double>> points;  // (shots, |dE|), ascending shots
};

struct CrossingPoint {
  std::string system;
  bool usable = false;
  bool extrapolated = false;
  double shots = 0.0;
  double adjusted_shots = 0.0;
  double x = 0.0;  // log(2^n * target_nq)
};

struct ExtrapolationFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
  double predicted_shots = 0.0;
  std::vector<CrossingPoint> points;
};

/// Running minimum; only points that improve on every earlier point are kept.
std::vector<std::pair<double, double>> lower_envelope(const std::vector<std::pair<double, double>>& pts);

CrossingPoint chemical_accuracy_crossing(const ErrorCurve& curve, int target_nq = 64,
                                         double threshold = kChemicalAccuracy);

ExtrapolationFit extrapolate_shots(const std::vector<ErrorCurve>& curves, int target_nq = 64,
                                   int target_qubits = 100, double threshold = kChemicalAccuracy);

struct ErrorRateBound {
  double gate_depth = 0.0;
  double p_max = 0.0;
};

ErrorRateBound error_rate_bound(double terms, double trotter_steps, double krylov_index, double delta);

}  // namespace canoe
