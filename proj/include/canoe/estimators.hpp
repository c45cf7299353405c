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

#include <nlohmann/json.hpp>

#include "canoe/pauli.hpp"
#include "canoe/rng.hpp"
#include "canoe/simstate.hpp"
#include "canoe/subspace.hpp"

namespace canoe {

inline constexpr std::size_t kDefaultBatchSize = 5000;

/// Passing this as a shot count selects exact outcome distributions.
inline constexpr std::uint64_t kExactShots = 0;

enum class HistogramKind { reference, joint_real, joint_imag };

/// Outcome counts. For the joint kinds only the + ancilla branch is binned;
/// the - branch total is kept in `discarded` so that bins + discarded = shots.
/// With shots == kExactShots the bins hold exact probabilities instead.
struct Histogram {
  struct Bin {
    std::uint64_t bits;
    double count;
  };

  HistogramKind kind = HistogramKind::reference;
  int n_qubit = 1;
  std::uint64_t shots = 0;
  std::vector<Bin> bins;  // sorted by bits
  double discarded = 0.0;

  bool exact() const noexcept { return shots == kExactShots; }
  double count(std::uint64_t bits) const;
  /// Empirical (or exact) probability of the binned outcome.
  double frequency(std::uint64_t bits) const;
  double total() const;
};

struct BatchPlan {
  std::size_t batch_size = 0;
  std::vector<std::vector<std::size_t>> batches;  // indices into the classical list

  std::size_t n_batches() const noexcept { return batches.size(); }
  static BatchPlan make(std::size_t n_classical, std::size_t batch_size = kDefaultBatchSize);
};

/// (1/sqrt|S_k|) sum over the batch.
SparseState batch_state(const std::vector<Determinant>& classical, const BatchPlan& plan,
                        std::size_t k);

Histogram sample_histogram(const SparseState& state, std::uint64_t shots, Rng& rng);
Histogram sample_histogram(const SparseState& state, std::uint64_t shots, std::uint64_t seed);
Histogram exact_histogram(const SparseState& state);

struct JointHistograms {
  Histogram real;
  Histogram imag;
};

/// Joint-space histograms with + branch probabilities |a+b|^2/4 and |a+ib|^2/4.
JointHistograms sample_joint_histograms(const SparseState& phi, const SparseState& chi,
                                        std::uint64_t shots, Rng& rng);
JointHistograms sample_joint_histograms(const SparseState& phi, const SparseState& chi,
                                        std::uint64_t shots, std::uint64_t seed);

struct AlphaEstimate {
  Determinant det;
  Complex value;
};

std::vector<AlphaEstimate> estimate_alpha(const Histogram& p_q, const Histogram& j_r,
                                          const Histogram& j_i, const BatchPlan& plan,
                                          std::size_t k, const std::vector<Determinant>& classical);

enum class EstimatorMethod { histogram, shadow };

struct EstimatedBlock {
  EstimatorMethod method = EstimatorMethod::histogram;
  Eigen::MatrixXcd S_cq_hat;
  Eigen::MatrixXcd H_cq_hat;
  std::uint64_t shots_per_histogram = 0;
  std::uint64_t total_shots = 0;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;
  std::size_t n_batches = 0;
  std::optional<Determinant> shadow_reference;
  std::size_t shadow_groups = 0;
};

EstimatedBlock estimate_cq_block(const PauliHamiltonian& h, const HybridBasis& basis,
                                 const BatchPlan& plan, std::uint64_t shots_per_histogram,
                                 std::uint64_t seed);

struct ShadowOptions {
  std::optional<Determinant> reference;
  std::size_t groups = 1;
};

inline constexpr int kShadowQubitLimit = 10;

/// Reference used by the shadow estimator: |0..0> unless some quantum state
/// overlaps it, else the smallest bit value with zero amplitude everywhere.
Determinant choose_shadow_reference(const HybridBasis& basis);

EstimatedBlock shadow_estimate_cq_block(const PauliHamiltonian& h, const HybridBasis& basis,
                                        std::uint64_t snapshots_per_state, std::uint64_t seed,
                                        const ShadowOptions& options = {});

/// Exact cc and qq blocks with the sampled cq block, Hermitized.
BlockMatrices inject_qq(const EstimatedBlock& block, const BlockMatrices& exact);

double hadamard_cost_model(std::size_t n_terms, double norm_2, std::size_t n_c, std::size_t n_q,
                           double epsilon);

nlohmann::json to_json(const EstimatedBlock& block);
EstimatedBlock estimated_block_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j);

}  // namespace canoe
