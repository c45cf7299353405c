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

#include "canoe/simstate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "canoe/errors.hpp"
#include "canoe/kernels.hpp"

namespace canoe {

SparseState SparseState::from_entries(int n_qubit, std::vector<Entry> entries, double prune) {
  SparseState out(n_qubit);
  const std::uint64_t mask = width_mask(n_qubit);
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.bits < b.bits; });
  for (const auto& e : entries) {
    if (e.bits & ~mask) throw ContractError("amplitude entry exceeds state width");
    if (!out.entries_.empty() && out.entries_.back().bits == e.bits) {
      out.entries_.back().amp += e.amp;
    } else {
      out.entries_.push_back(e);
    }
  }
  std::erase_if(out.entries_, [prune](const Entry& e) { return std::abs(e.amp) < prune; });
  return out;
}

SparseState SparseState::basis(const Determinant& d) {
  SparseState out(d.n_qubit());
  out.entries_.push_back({d.bits(), Complex(1.0, 0.0)});
  return out;
}

const Complex* SparseState::find(std::uint64_t bits) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), bits,
                             [](const Entry& e, std::uint64_t b) { return e.bits < b; });
  if (it == entries_.end() || it->bits != bits) return nullptr;
  return &it->amp;
}

Complex SparseState::amplitude(const Determinant& d) const {
  if (d.n_qubit() != n_qubit_) throw ContractError("determinant width does not match state");
  const Complex* a = find(d.bits());
  return a ? *a : Complex(0.0, 0.0);
}

double SparseState::norm() const noexcept {
  double sq = 0.0;
  for (const auto& e : entries_) sq += std::norm(e.amp);
  return std::sqrt(sq);
}

SparseState SparseState::scaled(Complex factor) const {
  SparseState out = *this;
  for (auto& e : out.entries_) e.amp *= factor;
  return out;
}

SparseState SparseState::normalized() const {
  const double n = norm();
  if (n == 0.0) throw ContractError("cannot normalize the zero state");
  return scaled(1.0 / n);
}

Complex inner(const SparseState& a, const SparseState& b) {
  if (a.n_qubit() != b.n_qubit()) throw ContractError("inner product of states with different widths");
  auto ea = a.entries();
  auto eb = b.entries();
  Complex acc = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].bits < eb[j].bits) {
      ++i;
    } else if (eb[j].bits < ea[i].bits) {
      ++j;
    } else {
      acc += std::conj(ea[i].amp) * eb[j].amp;
      ++i;
      ++j;
    }
  }
  return acc;
}

SparseState superpose(std::span<const std::pair<Complex, SparseState>> terms, double prune) {
  if (terms.empty()) throw ContractError("superpose needs at least one term");
  const int n = terms.front().second.n_qubit();
  std::vector<SparseState::Entry> all;
  for (const auto& [c, x] : terms) {
    if (x.n_qubit() != n) throw ContractError("superpose of states with different widths");
    for (const auto& e : x.entries()) all.push_back({e.bits, c * e.amp});
  }
  return SparseState::from_entries(n, std::move(all), prune);
}

SparseState apply_hamiltonian(const PauliHamiltonian& h, const SparseState& x, double prune) {
  if (h.n_qubit() != x.n_qubit()) throw ContractError("Hamiltonian and state widths differ");
  std::vector<SparseState::Entry> out;
  out.reserve(x.size() * h.n_terms());
  for (const auto& e : x.entries()) {
    for (const auto& t : h.terms()) {
      out.push_back({e.bits ^ t.x_mask(), t.coeff() * t.phase(e.bits) * e.amp});
    }
  }
  return SparseState::from_entries(x.n_qubit(), std::move(out), prune);
}

RestrictedSpace::RestrictedSpace(std::vector<Determinant> dets) : dets_(std::move(dets)) {
  if (dets_.empty()) return;
  n_qubit_ = dets_.front().n_qubit();
  index_.reserve(dets_.size());
  for (std::size_t i = 0; i < dets_.size(); ++i) {
    if (dets_[i].n_qubit() != n_qubit_) throw ContractError("restricted space mixes widths");
    if (!index_.emplace(dets_[i].bits(), i).second) {
      throw ContractError("duplicate determinant " + dets_[i].to_string() + " in restricted space");
    }
  }
}

RestrictedSpace RestrictedSpace::full(int n_qubit) {
  if (n_qubit < 1 || n_qubit > 30) throw SizeLimitError("full space limited to 30 qubits");
  std::vector<Determinant> dets;
  const std::uint64_t dim = 1ULL << n_qubit;
  dets.reserve(dim);
  for (std::uint64_t b = 0; b < dim; ++b) dets.emplace_back(b, n_qubit);
  return RestrictedSpace(std::move(dets));
}

RestrictedSpace RestrictedSpace::particle_sector(int n_qubit, int n_electrons) {
  if (n_qubit < 1 || n_qubit > 30) throw SizeLimitError("particle sector limited to 30 qubits");
  if (n_electrons < 0 || n_electrons > n_qubit) throw ContractError("electron count out of range");
  std::vector<Determinant> dets;
  const std::uint64_t dim = 1ULL << n_qubit;
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (std::popcount(b) == n_electrons) dets.emplace_back(b, n_qubit);
  }
  return RestrictedSpace(std::move(dets));
}

std::optional<std::size_t> RestrictedSpace::index_of(std::uint64_t bits) const {
  auto it = index_.find(bits);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseState RestrictedSpace::to_state(const Eigen::VectorXcd& coords, double prune) const {
  if (static_cast<std::size_t>(coords.size()) != dets_.size()) {
    throw ContractError("coordinate vector does not match restricted space");
  }
  std::vector<SparseState::Entry> entries;
  entries.reserve(dets_.size());
  for (std::size_t i = 0; i < dets_.size(); ++i) {
    entries.push_back({dets_[i].bits(), coords(static_cast<Eigen::Index>(i))});
  }
  return SparseState::from_entries(n_qubit_, std::move(entries), prune);
}

Eigen::VectorXcd RestrictedSpace::to_coords(const SparseState& x) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dets_.size()));
  for (const auto& e : x.entries()) {
    auto i = index_of(e.bits);
    if (!i) throw ContractError("state has support outside the restricted space");
    out(static_cast<Eigen::Index>(*i)) = e.amp;
  }
  return out;
}

SparseMatrixC project_hamiltonian(const PauliHamiltonian& h, const RestrictedSpace& space) {
  if (space.empty()) throw ContractError("cannot project onto an empty space");
  if (space.n_qubit() != h.n_qubit()) throw ContractError("space width differs from Hamiltonian");
  const auto triplets = kernels::omp::project_columns(h, space);
  const auto dim = static_cast<Eigen::Index>(space.size());
  SparseMatrixC out(dim, dim);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

double default_tau(const PauliHamiltonian& h) {
  if (h.norm_2() <= 0.0) throw ContractError("default tau needs a nonzero Hamiltonian");
  return 1.0 / h.norm_2();
}

namespace {

Eigen::VectorXcd expm_dense(const SparseMatrixC& h, const Eigen::VectorXcd& v, double t) {
  if (h.rows() > kDenseSolveLimit) {
    throw SizeLimitError("dense propagator limited to dimension " + std::to_string(kDenseSolveLimit));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig{Eigen::MatrixXcd(h)};
  const Eigen::VectorXcd phase =
      (eig.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
  return eig.eigenvectors() * phase.cwiseProduct(eig.eigenvectors().adjoint() * v);
}

// One Lanczos step of size t. Returns false when the subspace cap is hit
// before the a-posteriori error estimate drops below tol.
bool expm_lanczos_step(const SparseMatrixC& h, const Eigen::VectorXcd& v, double t, double tol,
                       Eigen::Index max_dim, Eigen::VectorXcd& out) {
  const double beta0 = v.norm();
  if (beta0 == 0.0) {
    out = v;
    return true;
  }
  const Eigen::Index n = v.size();
  const Eigen::Index cap = std::min(max_dim, n);
  Eigen::MatrixXcd q(n, cap + 1);
  std::vector<double> alpha;
  std::vector<double> beta;
  q.col(0) = v / beta0;
  for (Eigen::Index k = 0; k < cap; ++k) {
    Eigen::VectorXcd w = h * q.col(k);
    alpha.push_back((q.col(k).adjoint() * w)(0).real());
    // Full reorthogonalization, twice.
    for (int pass = 0; pass < 2; ++pass) {
      w -= q.leftCols(k + 1) * (q.leftCols(k + 1).adjoint() * w);
    }
    const double b = w.norm();
    beta.push_back(b);

    const Eigen::Index m = k + 1;
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
    const Eigen::VectorXcd phase =
        (eig.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
    const Eigen::VectorXcd y =
        eig.eigenvectors().cast<Complex>() *
        phase.cwiseProduct(eig.eigenvectors().row(0).transpose().cast<Complex>());
    const bool invariant = b <= 1e-14 * std::max(1.0, std::abs(alpha.back()));
    const double err = beta0 * b * std::abs(y(m - 1));
    if (invariant || err < tol || m == n) {
      out = beta0 * (q.leftCols(m) * y);
      return true;
    }
    q.col(k + 1) = w / b;
  }
  return false;
}

}  // namespace

Eigen::VectorXcd expm_multiply(const SparseMatrixC& h, const Eigen::VectorXcd& v, double t,
                               double tol) {
  constexpr Eigen::Index kMaxSubspace = 64;
  constexpr int kMaxHalvings = 12;
  Eigen::VectorXcd out;
  if (expm_lanczos_step(h, v, t, tol, kMaxSubspace, out)) return out;
  // Split the interval into 2^level substeps with a proportionally tighter budget.
  for (int level = 1; level <= kMaxHalvings; ++level) {
    const long steps = 1L << level;
    const double dt = t / static_cast<double>(steps);
    Eigen::VectorXcd x = v;
    bool ok = true;
    for (long s = 0; s < steps && ok; ++s) {
      Eigen::VectorXcd next;
      ok = expm_lanczos_step(h, x, dt, tol / static_cast<double>(steps), kMaxSubspace, next);
      x = std::move(next);
    }
    if (ok) return x;
  }
  return expm_dense(h, v, t);
}

std::vector<SparseState> krylov_states(const PauliHamiltonian& h, const RestrictedSpace& space,
                                       const KrylovConfig& cfg) {
  if (cfg.n_states < 1) throw ContractError("Krylov basis needs n_states >= 1");
  if (!(cfg.tau > 0.0)) throw ContractError("Krylov time step must be positive");
  const auto ref = space.index_of(cfg.reference.bits());
  if (!ref || cfg.reference.n_qubit() != space.n_qubit()) {
    throw ContractError("Krylov reference " + cfg.reference.to_string() + " is not in the space");
  }
  const SparseMatrixC hd = project_hamiltonian(h, space);
  std::vector<SparseState> out;
  out.reserve(static_cast<std::size_t>(cfg.n_states));
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.size()));
  x(static_cast<Eigen::Index>(*ref)) = 1.0;
  out.push_back(SparseState::basis(cfg.reference));

  // Each state is propagated from the previous one, so the per-step budget is
  // the total tolerance divided by the number of steps.
  const double step_tol = cfg.evolution_tol / static_cast<double>(cfg.n_states);
  std::optional<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>> dense;
  if (cfg.propagator == Propagator::dense) {
    if (hd.rows() > kDenseSolveLimit) throw SizeLimitError("dense propagator limited to 4096 determinants");
    dense.emplace(Eigen::MatrixXcd(hd));
  }
  for (int j = 1; j < cfg.n_states; ++j) {
    if (dense) {
      const Eigen::VectorXcd phase =
          (dense->eigenvalues().cast<Complex>() * Complex(0.0, -cfg.tau)).array().exp().matrix();
      x = dense->eigenvectors() * phase.cwiseProduct(dense->eigenvectors().adjoint() * x);
    } else {
      x = expm_multiply(hd, x, cfg.tau, step_tol);
    }
    x /= x.norm();
    out.push_back(space.to_state(x));
  }
  return out;
}

std::vector<DeterminantRecord> parse_determinant_list(std::istream& in) {
  std::vector<DeterminantRecord> out;
  std::string line;
  std::size_t line_no = 0;
  int width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string bits;
    fields >> bits;
    if (bits.find_first_not_of("01") != std::string::npos || bits.size() > 64) {
      throw ParseError(line_no, "invalid determinant bitstring '" + bits + "'");
    }
    if (width < 0) {
      width = static_cast<int>(bits.size());
    } else if (static_cast<int>(bits.size()) != width) {
      throw FormatError("line " + std::to_string(line_no) + ": determinant has width " +
                        std::to_string(bits.size()) + ", expected " + std::to_string(width));
    }
    DeterminantRecord rec{Determinant::from_string(bits), std::nullopt};
    std::string weight;
    if (fields >> weight) {
      try {
        std::size_t used = 0;
        rec.weight = std::stod(weight, &used);
        if (used != weight.size()) throw std::invalid_argument(weight);
      } catch (const std::exception&) {
        throw ParseError(line_no, "invalid weight '" + weight + "'");
      }
      std::string extra;
      if (fields >> extra) throw ParseError(line_no, "unexpected trailing field '" + extra + "'");
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<DeterminantRecord> load_determinant_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open determinant file " + path.string());
  return parse_determinant_list(in);
}

}  // namespace canoe
