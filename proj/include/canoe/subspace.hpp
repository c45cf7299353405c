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

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "canoe/pauli.hpp"
#include "canoe/simstate.hpp"

namespace canoe {

/// Classical determinants first, quantum states second.
class HybridBasis {
 public:
  HybridBasis(std::vector<Determinant> classical, std::vector<SparseState> quantum,
              std::shared_ptr<const RestrictedSpace> space);

  const std::vector<Determinant>& classical() const noexcept { return classical_; }
  const std::vector<SparseState>& quantum() const noexcept { return quantum_; }
  const RestrictedSpace& space() const noexcept { return *space_; }
  std::shared_ptr<const RestrictedSpace> space_ptr() const noexcept { return space_; }
  Eigen::Index n_c() const noexcept { return static_cast<Eigen::Index>(classical_.size()); }
  Eigen::Index n_q() const noexcept { return static_cast<Eigen::Index>(quantum_.size()); }
  int n_qubit() const noexcept { return space_->n_qubit(); }

  std::vector<std::uint64_t> classical_bits() const;

 private:
  std::vector<Determinant> classical_;
  std::vector<SparseState> quantum_;
  std::shared_ptr<const RestrictedSpace> space_;
};

/// Hermitian pair (H, S) in block form. The cc overlap block is the identity
/// and is never stored; the qc blocks are the adjoints of the cq blocks.
struct BlockMatrices {
  Eigen::MatrixXcd S_cq;
  Eigen::MatrixXcd S_qq;
  SparseMatrixC H_cc;
  Eigen::MatrixXcd H_cq;
  Eigen::MatrixXcd H_qq;

  Eigen::Index n_c() const noexcept { return H_cc.rows(); }
  Eigen::Index n_q() const noexcept { return S_qq.rows(); }
  Eigen::Index dim() const noexcept { return n_c() + n_q(); }

  Eigen::VectorXcd apply_S(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd apply_H(const Eigen::VectorXcd& x) const;

  /// Dense assembly, limited to kDenseSolveLimit rows.
  Eigen::MatrixXcd dense_S() const;
  Eigen::MatrixXcd dense_H() const;

  /// Leading n_c classical and n_q quantum entries.
  BlockMatrices truncated(Eigen::Index n_c, Eigen::Index n_q) const;

  /// (A + A^dag)/2 on the diagonal blocks.
  void hermitize();
  double hermiticity_defect() const;
  bool all_finite() const;
};

BlockMatrices build_exact_blocks(const PauliHamiltonian& h, const HybridBasis& basis);

/// sum_g h_g conj(theta_g(s)) alpha[s ^ b_g]; absent entries count as zero.
Complex hamiltonian_element_from_overlaps(const PauliHamiltonian& h, const Determinant& s,
                                          const SparseState& alpha);

/// Row-batched form of the above.
Eigen::VectorXcd hamiltonian_column_from_overlaps(const PauliHamiltonian& h,
                                                  std::span<const std::uint64_t> rows,
                                                  const SparseState& alpha);

struct QQReconstruction {
  Eigen::MatrixXcd S_qq;
  Eigen::MatrixXcd H_qq;
};

/// Rebuilds the qq blocks from amplitude tables restricted to `dset`.
/// Amplitudes outside `dset` are ignored, and a Pauli term contributes at s
/// only when s ^ b also lies in `dset`.
QQReconstruction reconstruct_qq_from_amplitudes(const PauliHamiltonian& h,
                                                std::span<const SparseState> tables,
                                                const RestrictedSpace& dset);

/// Determinants ordered by descending |ground-state coefficient| of the
/// projected Hamiltonian. A supplied ranking is returned verbatim.
std::vector<Determinant> rank_determinants(const PauliHamiltonian& h, const RestrictedSpace& space,
                                           const std::vector<DeterminantRecord>* ranking = nullptr);

/// Determinant with the lowest diagonal energy; ties go to the smaller bit value.
Determinant lowest_diagonal_determinant(const PauliHamiltonian& h, const RestrictedSpace& space);

}  // namespace canoe
