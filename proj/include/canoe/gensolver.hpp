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
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "canoe/subspace.hpp"

namespace canoe {

using LinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct SchurSpectrum {
  Eigen::VectorXd eigvals;   // descending
  Eigen::MatrixXcd eigvecs;  // columns match eigvals
};

/// Spectrum of the Hermitized M - U^dag U.
SchurSpectrum schur_complement(const BlockMatrices& s);

enum class SolverMode { plain, pseudo_inverse, deflation };

std::string to_string(SolverMode mode);
SolverMode solver_mode_from_string(const std::string& text);

struct SolverConfig {
  SolverMode mode = SolverMode::deflation;
  double rank_tol = 1e-6;
  double tol = 1e-8;
  int maxiter = 300;
  int n_restarts = 3;
};

enum class LobpcgStatus { converged, max_iterations, indefinite };

struct LobpcgResult {
  double value = 0.0;
  Eigen::VectorXcd vector;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  LobpcgStatus status = LobpcgStatus::max_iterations;
};

/// Single-vector LOBPCG for the smallest eigenpair of A x = theta B x.
/// `precond` may be empty (identity). Throws BreakdownError when the
/// Rayleigh-Ritz basis has no usable direction.
LobpcgResult lobpcg(const LinearMap& a, const LinearMap& b, const LinearMap& precond,
                    const Eigen::VectorXcd& x0, double tol, int maxiter);

struct SolverOutcome {
  double energy = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXcd classical;
  Eigen::VectorXcd quantum;
  double classical_weight = 0.0;
  std::vector<Eigen::Index> retained;
  Eigen::Index n_discarded = 0;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool all_truncated = false;
  int indefinite_restarts = 0;
  SolverMode mode = SolverMode::plain;
};

/// Lowest generalized eigenpair of the block pair. The pair must already be
/// Hermitian; it is checked, not repaired.
SolverOutcome solve(const BlockMatrices& pair, const SolverConfig& cfg, std::uint64_t seed);

/// 1/|lambda_min| of the full overlap matrix, +inf when numerically singular.
double conditioning_metric(const BlockMatrices& s);

/// Eigenpairs of the full overlap matrix computed through a thin QR of the
/// cq block; the classical complement of range(U) contributes eigenvalue 1.
struct OverlapModes {
  Eigen::VectorXd values;    // ascending, compressed modes only
  Eigen::MatrixXcd vectors;  // full-length eigenvectors, one per value
  Eigen::MatrixXcd q;        // orthonormal basis of range(U)
  Eigen::Index unit_multiplicity = 0;
};

OverlapModes overlap_modes(const BlockMatrices& s);

/// Dense reference: lowest eigenvalue of H restricted to the range of S,
/// dropping overlap eigenvalues at or below cutoff * lambda_max.
struct DenseReference {
  double energy = 0.0;
  Eigen::VectorXcd vector;  // S-normalized, full length
  Eigen::Index rank = 0;
};

DenseReference dense_reference(const BlockMatrices& pair, double cutoff = 1e-10);

nlohmann::json to_json(const SolverOutcome& outcome);

}  // namespace canoe
