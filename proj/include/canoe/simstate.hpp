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
#include <Eigen/SparseCore>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "canoe/pauli.hpp"

namespace canoe {

inline constexpr double kDefaultPrune = 1e-14;
inline constexpr Eigen::Index kDenseSolveLimit = 4096;

using SparseMatrixC = Eigen::SparseMatrix<Complex>;

/// Sparse amplitude table over determinants, kept sorted by bit value.
class SparseState {
 public:
  struct Entry {
    std::uint64_t bits;
    Complex amp;
  };

  explicit SparseState(int n_qubit = 1) : n_qubit_(n_qubit) {}

  /// Merges repeated determinants and drops |amp| < prune.
  static SparseState from_entries(int n_qubit, std::vector<Entry> entries,
                                  double prune = kDefaultPrune);
  static SparseState basis(const Determinant& d);

  int n_qubit() const noexcept { return n_qubit_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }
  Determinant determinant(std::size_t i) const { return Determinant(entries_[i].bits, n_qubit_); }

  /// Pointer to the stored amplitude, or nullptr when absent.
  const Complex* find(std::uint64_t bits) const noexcept;
  Complex amplitude(const Determinant& d) const;

  double norm() const noexcept;
  SparseState scaled(Complex factor) const;
  SparseState normalized() const;

 private:
  int n_qubit_;
  std::vector<Entry> entries_;
};

Complex inner(const SparseState& a, const SparseState& b);

/// Linear combination sum_i c_i |x_i>, pruned but not renormalized.
SparseState superpose(std::span<const std::pair<Complex, SparseState>> terms,
                      double prune = kDefaultPrune);

/// H|x> by forward Pauli action, with no projection.
SparseState apply_hamiltonian(const PauliHamiltonian& h, const SparseState& x,
                              double prune = kDefaultPrune);

/// Ordered determinant subset D that the simulator is confined to.
class RestrictedSpace {
 public:
  RestrictedSpace() = default;
  explicit RestrictedSpace(std::vector<Determinant> dets);

  static RestrictedSpace full(int n_qubit);
  /// All determinants with popcount == n_electrons, in ascending bit order.
  static RestrictedSpace particle_sector(int n_qubit, int n_electrons);

  int n_qubit() const noexcept { return n_qubit_; }
  std::size_t size() const noexcept { return dets_.size(); }
  bool empty() const noexcept { return dets_.empty(); }
  const std::vector<Determinant>& dets() const noexcept { return dets_; }
  std::optional<std::size_t> index_of(std::uint64_t bits) const;
  bool contains(const Determinant& d) const { return index_of(d.bits()).has_value(); }

  SparseState to_state(const Eigen::VectorXcd& coords, double prune = kDefaultPrune) const;
  Eigen::VectorXcd to_coords(const SparseState& x) const;

 private:
  int n_qubit_ = 0;
  std::vector<Determinant> dets_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// <d_i|H|d_k> restricted to D; terms that shift out of D are dropped.
SparseMatrixC project_hamiltonian(const PauliHamiltonian& h, const RestrictedSpace& space);

enum class Propagator { lanczos, dense };

struct KrylovConfig {
  double tau = 0.0;
  int n_states = 1;
  Determinant reference;
  double evolution_tol = 1e-12;
  Propagator propagator = Propagator::lanczos;
};

/// 1 / ||H||_2, the default Krylov time step.
double default_tau(const PauliHamiltonian& h);

/// exp(-i t H) v by an adaptive Lanczos subspace. Falls back to a dense
/// eigendecomposition when the subspace cannot reach `tol` and dim <= 4096.
Eigen::VectorXcd expm_multiply(const SparseMatrixC& h, const Eigen::VectorXcd& v, double t,
                               double tol);

/// States exp(-i H_D j tau)|ref>, j = 0..n_states-1.
std::vector<SparseState> krylov_states(const PauliHamiltonian& h, const RestrictedSpace& space,
                                       const KrylovConfig& cfg);

struct DeterminantRecord {
  Determinant det;
  std::optional<double> weight;
};

/// One bitstring per line with an optional real weight; `#` comments.
std::vector<DeterminantRecord> parse_determinant_list(std::istream& in);
std::vector<DeterminantRecord> load_determinant_list(const std::filesystem::path& path);

}  // namespace canoe
