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

// Data-parallel inner loops. Each kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::omp`; both produce
// bit-identical output (every output slot is written by exactly one
// iteration, and reductions happen in a fixed order).

#include <Eigen/SparseCore>

#include <cstdint>
#include <span>
#include <vector>

#include "canoe/pauli.hpp"
#include "canoe/simstate.hpp"

namespace canoe::kernels {

using Triplet = Eigen::Triplet<Complex>;

/// One observed shadow measurement setting: per-qubit basis (0=X, 1=Y, 2=Z),
/// outcome bits, and how many snapshots landed on it.
struct ShadowObservation {
  std::vector<std::uint8_t> bases;
  std::uint64_t outcome;
  std::uint64_t count;
};

namespace serial {

/// out[i] = sum_g h_g conj(theta_g(rows[i])) table[rows[i] ^ b_g]; absent
/// table entries contribute zero.
void gather_rows(const PauliHamiltonian& h, std::span<const std::uint64_t> rows,
                 const SparseState& table, std::span<Complex> out);

/// Triplets of <d_r|H|d_c> over the space, grouped by column in order.
std::vector<Triplet> project_columns(const PauliHamiltonian& h, const RestrictedSpace& space);

/// out[i] = sum_obs count * prod_k <d_i,k| rho_k |ref_k>, the unnormalized
/// shadow estimate of <d_i|rho|ref>.
void shadow_accumulate(std::span<const std::uint64_t> dets, std::uint64_t ref, int n_qubit,
                       std::span<const ShadowObservation> obs, std::span<Complex> out);

}  // namespace serial

namespace omp {

void gather_rows(const PauliHamiltonian& h, std::span<const std::uint64_t> rows,
                 const SparseState& table, std::span<Complex> out);

std::vector<Triplet> project_columns(const PauliHamiltonian& h, const RestrictedSpace& space);

void shadow_accumulate(std::span<const std::uint64_t> dets, std::uint64_t ref, int n_qubit,
                       std::span<const ShadowObservation> obs, std::span<Complex> out);

}  // namespace omp

/// Single-qubit shadow factor <a| (3 U^dag|b><b|U - I) |c> for basis
/// 0=X, 1=Y, 2=Z and outcome b.
Complex shadow_factor(std::uint8_t basis, int outcome, int a, int c);

}  // namespace canoe::kernels
