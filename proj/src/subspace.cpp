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


#include "canoe/subspace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "canoe/errors.hpp"
#include "canoe/kernels.hpp"

namespace canoe {

HybridBasis::HybridBasis(std::vector<Determinant> classical, std::vector<SparseState> quantum,
                         std::shared_ptr<const RestrictedSpace> space)
    : classical_(std::move(classical)), quantum_(std::move(quantum)), space_(std::move(space)) {
  if (!space_ || space_->empty()) throw ContractError("hybrid basis needs a nonempty space");
  std::unordered_set<std::uint64_t> seen;
  for (const auto& d : classical_) {
    if (!space_->contains(d) || d.n_qubit() != space_->n_qubit()) {
      throw ContractError("classical determinant " + d.to_string() + " is outside the space");
    }
    if (!seen.insert(d.bits()).second) {
      throw ContractError("classical determinant " + d.to_string() + " listed twice");
    }
  }
  for (const auto& q : quantum_) {
    if (q.n_qubit() != space_->n_qubit()) throw ContractError("quantum state width mismatch");
  }
}

std::vector<std::uint64_t> HybridBasis::classical_bits() const {
  std::vector<std::uint64_t> out;
  out.reserve(classical_.size());
  for (const auto& d : classical_) out.push_back(d.bits());
  return out;
}

Eigen::VectorXcd BlockMatrices::apply_S(const Eigen::VectorXcd& x) const {
  const Eigen::Index nc = n_c();
  const Eigen::Index nq = n_q();
  Eigen::VectorXcd y(nc + nq);
  y.head(nc) = x.head(nc);
  if (nq > 0) {
    y.head(nc) += S_cq * x.tail(nq);
    y.tail(nq) = S_cq.adjoint() * x.head(nc) + S_qq * x.tail(nq);
  }
  return y;
}

Eigen::VectorXcd BlockMatrices::apply_H(const Eigen::VectorXcd& x) const {
  const Eigen::Index nc = n_c();
  const Eigen::Index nq = n_q();
  Eigen::VectorXcd y(nc + nq);
  y.head(nc) = H_cc * x.head(nc);
  if (nq > 0) {
    y.head(nc) += H_cq * x.tail(nq);
    y.tail(nq) = H_cq.adjoint() * x.head(nc) + H_qq * x.tail(nq);
  }
  return y;
}

Eigen::MatrixXcd BlockMatrices::dense_S() const {
  if (dim() > kDenseSolveLimit) throw SizeLimitError("dense overlap assembly exceeds limit");
  const Eigen::Index nc = n_c();
  const Eigen::Index nq = n_q();
  Eigen::MatrixXcd s(dim(), dim());
  s.topLeftCorner(nc, nc).setIdentity();
  s.topRightCorner(nc, nq) = S_cq;
  s.bottomLeftCorner(nq, nc) = S_cq.adjoint();
  s.bottomRightCorner(nq, nq) = S_qq;
  return s;
}

Eigen::MatrixXcd BlockMatrices::dense_H() const {
  if (dim() > kDenseSolveLimit) throw SizeLimitError("dense Hamiltonian assembly exceeds limit");
  const Eigen::Index nc = n_c();
  const Eigen::Index nq = n_q();
  Eigen::MatrixXcd hm(dim(), dim());
  hm.topLeftCorner(nc, nc) = Eigen::MatrixXcd(H_cc);
  hm.topRightCorner(nc, nq) = H_cq;
  hm.bottomLeftCorner(nq, nc) = H_cq.adjoint();
  hm.bottomRightCorner(nq, nq) = H_qq;
  return hm;
}

BlockMatrices BlockMatrices::truncated(Eigen::Index nc, Eigen::Index nq) const {
  if (nc < 0 || nq < 0 || nc > n_c() || nq > n_q()) throw ContractError("truncation exceeds blocks");
  BlockMatrices out;
  out.S_cq = S_cq.topLeftCorner(nc, nq);
  out.S_qq = S_qq.topLeftCorner(nq, nq);
  out.H_cc = H_cc.topLeftCorner(nc, nc);
  out.H_cq = H_cq.topLeftCorner(nc, nq);
  out.H_qq = H_qq.topLeftCorner(nq, nq);
  return out;
}

void BlockMatrices::hermitize() {
  S_qq = (0.5 * (S_qq + S_qq.adjoint())).eval();
  H_qq = (0.5 * (H_qq + H_qq.adjoint())).eval();
  SparseMatrixC adj = H_cc.adjoint();
  H_cc = (0.5 * (H_cc + adj)).eval();
}

double BlockMatrices::hermiticity_defect() const {
  double d = 0.0;
  if (n_q() > 0) {
    d = std::max(d, (S_qq - S_qq.adjoint()).cwiseAbs().maxCoeff());
    d = std::max(d, (H_qq - H_qq.adjoint()).cwiseAbs().maxCoeff());
  }
  SparseMatrixC adj = H_cc.adjoint();
  SparseMatrixC diff = H_cc - adj;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrixC::InnerIterator it(diff, k); it; ++it) d = std::max(d, std::abs(it.value()));
  }
  return d;
}

bool BlockMatrices::all_finite() const {
  auto finite = [](const Eigen::MatrixXcd& m) { return m.allFinite(); };
  if (!finite(S_cq) || !finite(S_qq) || !finite(H_cq) || !finite(H_qq)) return false;
  for (Eigen::Index k = 0; k < H_cc.outerSize(); ++k) {
    for (SparseMatrixC::InnerIterator it(H_cc, k); it; ++it) {
      if (!std::isfinite(it.value().real()) || !std::isfinite(it.value().imag())) return false;
    }
  }
  return true;
}

BlockMatrices build_exact_blocks(const PauliHamiltonian& h, const HybridBasis& basis) {
  if (h.n_qubit() != basis.n_qubit()) throw ContractError("Hamiltonian and basis widths differ");
  const Eigen::Index nc = basis.n_c();
  const Eigen::Index nq = basis.n_q();
  const auto& cls = basis.classical();
  const auto& qs = basis.quantum();

  BlockMatrices out;
  if (nc > 0) {
    out.H_cc = project_hamiltonian(h, RestrictedSpace(cls));
  } else {
    out.H_cc = SparseMatrixC(0, 0);
  }
  out.S_cq.resize(nc, nq);
  out.H_cq.resize(nc, nq);
  out.S_qq.resize(nq, nq);
  out.H_qq.resize(nq, nq);

  // H|phi_k> by forward scatter; kept independent of the overlap-table route.
  std::vector<SparseState> h_phi;
  h_phi.reserve(qs.size());
  for (const auto& q : qs) h_phi.push_back(apply_hamiltonian(h, q, 0.0));

  for (Eigen::Index j = 0; j < nq; ++j) {
    const auto& q = qs[static_cast<std::size_t>(j)];
    const auto& hq = h_phi[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < nc; ++i) {
      const auto& d = cls[static_cast<std::size_t>(i)];
      out.S_cq(i, j) = q.amplitude(d);
      out.H_cq(i, j) = hq.amplitude(d);
    }
    for (Eigen::Index k = 0; k < nq; ++k) {
      out.S_qq(k, j) = inner(qs[static_cast<std::size_t>(k)], q);
      out.H_qq(k, j) = inner(qs[static_cast<std::size_t>(k)], hq);
    }
  }
  return out;
}

Complex hamiltonian_element_from_overlaps(const PauliHamiltonian& h, const Determinant& s,
                                          const SparseState& alpha) {
  if (s.n_qubit() != h.n_qubit() || alpha.n_qubit() != h.n_qubit()) {
    throw ContractError("width mismatch in overlap-table lookup");
  }
  Complex acc = 0.0;
  for (const auto& t : h.terms()) {
    if (const Complex* a = alpha.find(s.bits() ^ t.x_mask())) {
      acc += t.coeff() * std::conj(t.phase(s.bits())) * (*a);
    }
  }
  return acc;
}

Eigen::VectorXcd hamiltonian_column_from_overlaps(const PauliHamiltonian& h,
                                                  std::span<const std::uint64_t> rows,
                                                  const SparseState& alpha) {
  if (alpha.n_qubit() != h.n_qubit()) throw ContractError("width mismatch in overlap-table lookup");
  Eigen::VectorXcd out(static_cast<Eigen::Index>(rows.size()));
  kernels::omp::gather_rows(h, rows, alpha, std::span<Complex>(out.data(), rows.size()));
  return out;
}

QQReconstruction reconstruct_qq_from_amplitudes(const PauliHamiltonian& h,
                                                std::span<const SparseState> tables,
                                                const RestrictedSpace& dset) {
  const auto nq = static_cast<Eigen::Index>(tables.size());
  const auto nd = static_cast<Eigen::Index>(dset.size());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nd, nq);
  for (Eigen::Index j = 0; j < nq; ++j) {
    for (const auto& e : tables[static_cast<std::size_t>(j)].entries()) {
      if (auto i = dset.index_of(e.bits)) a(static_cast<Eigen::Index>(*i), j) = e.amp;
    }
  }
  QQReconstruction out;
  out.S_qq = a.adjoint() * a;
  if (nd == 0) {
    out.H_qq = Eigen::MatrixXcd::Zero(nq, nq);
    return out;
  }
  // Projection onto dset keeps exactly the pairs (s, s ^ b) with both ends in dset.
  const SparseMatrixC hd = project_hamiltonian(h, dset);
  out.H_qq = a.adjoint() * (hd * a);
  return out;
}

Determinant lowest_diagonal_determinant(const PauliHamiltonian& h, const RestrictedSpace& space) {
  if (space.empty()) throw ContractError("empty space has no reference determinant");
  std::size_t best = 0;
  double best_e = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::uint64_t s = space.dets()[i].bits();
    double e = 0.0;
    for (const auto& t : h.terms()) {
      if (t.x_mask() == 0) e += (t.coeff() * t.phase(s)).real();
    }
    if (i == 0 || e < best_e - 1e-12 ||
        (std::abs(e - best_e) <= 1e-12 && s < space.dets()[best].bits())) {
      best = i;
      best_e = e;
    }
  }
  return space.dets()[best];
}

std::vector<Determinant> rank_determinants(const PauliHamiltonian& h, const RestrictedSpace& space,
                                           const std::vector<DeterminantRecord>* ranking) {
  if (ranking) {
    std::vector<Determinant> out;
    out.reserve(ranking->size());
    for (const auto& r : *ranking) {
      if (!space.contains(r.det)) {
        throw ConfigError("ranked determinant " + r.det.to_string() + " is outside the space");
      }
      out.push_back(r.det);
    }
    return out;
  }
  if (space.empty()) throw ContractError("cannot rank an empty space");
  if (static_cast<Eigen::Index>(space.size()) > kDenseSolveLimit) {
    throw ConfigError("space of " + std::to_string(space.size()) +
                      " determinants exceeds the dense ranking limit; supply a ranking file");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig{Eigen::MatrixXcd(project_hamiltonian(h, space))};
  const Eigen::VectorXcd g = eig.eigenvectors().col(0);
  // Magnitudes are snapped to a 1e-12 grid so rounding noise cannot reorder ties.
  std::vector<std::pair<long long, std::uint64_t>> keys;
  keys.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double mag = std::abs(g(static_cast<Eigen::Index>(i)));
    keys.emplace_back(std::llround(mag * 1e12), space.dets()[i].bits());
  }
  std::vector<std::size_t> order(space.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a].first != keys[b].first) return keys[a].first > keys[b].first;
    return keys[a].second < keys[b].second;
  });
  std::vector<Determinant> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(space.dets()[i]);
  return out;
}

}  // namespace canoe
