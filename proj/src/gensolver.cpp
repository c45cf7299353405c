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


#include "canoe/gensolver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "canoe/errors.hpp"
#include "canoe/rng.hpp"

namespace canoe {

std::string to_string(SolverMode mode) {
  switch (mode) {
    case SolverMode::plain:
      return "plain";
    case SolverMode::pseudo_inverse:
      return "pseudo_inverse";
    case SolverMode::deflation:
      return "deflation";
  }
  return "unknown";
}

SolverMode solver_mode_from_string(const std::string& text) {
  if (text == "plain") return SolverMode::plain;
  if (text == "pseudo_inverse") return SolverMode::pseudo_inverse;
  if (text == "deflation") return SolverMode::deflation;
  throw ConfigError("unknown solver mode '" + text + "'");
}

SchurSpectrum schur_complement(const BlockMatrices& s) {
  if (!s.S_cq.allFinite() || !s.S_qq.allFinite()) throw DataError("overlap blocks contain non-finite entries");
  Eigen::MatrixXcd schur = s.S_qq - s.S_cq.adjoint() * s.S_cq;
  schur = (0.5 * (schur + schur.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(schur);
  SchurSpectrum out;
  out.eigvals = eig.eigenvalues().reverse();
  out.eigvecs = eig.eigenvectors().rowwise().reverse();
  return out;
}

namespace {

// Orthonormalize columns in order with two Gram-Schmidt passes, dropping any
// column that is numerically inside the span of the previous ones.
Eigen::MatrixXcd orthonormal_columns(const std::vector<Eigen::VectorXcd>& cols) {
  std::vector<Eigen::VectorXcd> kept;
  for (const auto& c0 : cols) {
    const double n0 = c0.norm();
    if (!(n0 > 0.0) || !std::isfinite(n0)) continue;
    Eigen::VectorXcd c = c0 / n0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& k : kept) c -= k * k.dot(c);
    }
    const double n1 = c.norm();
    if (n1 < 1e-10) continue;
    kept.push_back(c / n1);
  }
  Eigen::MatrixXcd v(cols.front().size(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = kept[i];
  return v;
}

}  // namespace

LobpcgResult lobpcg(const LinearMap& a, const LinearMap& b, const LinearMap& precond,
                    const Eigen::VectorXcd& x0, double tol, int maxiter) {
  if (!(tol > 0.0)) throw ContractError("LOBPCG tolerance must be positive");
  if (!(x0.norm() > 0.0) || !x0.allFinite()) throw BreakdownError("LOBPCG start vector is zero or non-finite");
  LobpcgResult out;
  Eigen::VectorXcd x = x0;
  Eigen::VectorXcd bx = b(x);
  const double xbx = x.dot(bx).real();
  if (!(xbx > 0.0)) {
    out.status = LobpcgStatus::indefinite;
    out.vector = x;
    return out;
  }
  x /= std::sqrt(xbx);
  bx /= std::sqrt(xbx);
  Eigen::VectorXcd ax = a(x);
  double theta = x.dot(ax).real();
  Eigen::VectorXcd p;

  for (int it = 0;; ++it) {
    const Eigen::VectorXcd r = ax - theta * bx;
    out.residual = r.norm() / x.norm();
    out.value = theta;
    out.vector = x;
    out.iterations = it;
    if (out.residual <= tol) {
      out.status = LobpcgStatus::converged;
      return out;
    }
    if (it >= maxiter) {
      out.status = LobpcgStatus::max_iterations;
      return out;
    }
    std::vector<Eigen::VectorXcd> cols{x, precond ? precond(r) : r};
    if (p.size() > 0) cols.push_back(p);
    const Eigen::MatrixXcd v = orthonormal_columns(cols);
    const Eigen::Index k = v.cols();
    if (k == 0) throw BreakdownError("Rayleigh-Ritz basis collapsed to rank 0");
    Eigen::MatrixXcd av(v.rows(), k);
    Eigen::MatrixXcd bv(v.rows(), k);
    for (Eigen::Index i = 0; i < k; ++i) {
      av.col(i) = a(v.col(i));
      bv.col(i) = b(v.col(i));
    }
    Eigen::MatrixXcd g = v.adjoint() * bv;
    Eigen::MatrixXcd am = v.adjoint() * av;
    g = (0.5 * (g + g.adjoint())).eval();
    am = (0.5 * (am + am.adjoint())).eval();

    // Rank-revealing B-orthonormalization of the search space.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ge(g);
    const double gmax = ge.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (ge.eigenvalues()(i) > 1e-12 * gmax) keep.push_back(i);
    }
    if (keep.empty()) throw BreakdownError("Rayleigh-Ritz basis collapsed to rank 0");
    Eigen::MatrixXcd t(k, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
      t.col(static_cast<Eigen::Index>(i)) =
          ge.eigenvectors().col(keep[i]) / std::sqrt(ge.eigenvalues()(keep[i]));
    }
    Eigen::MatrixXcd ar = t.adjoint() * am * t;
    ar = (0.5 * (ar + ar.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> re(ar);
    const Eigen::VectorXcd c = t * re.eigenvectors().col(0);

    // The new direction is the non-x part of the update.
    Eigen::VectorXcd cp = c;
    cp(0) = 0.0;
    p = v * cp;
    x = v * c;
    ax = av * c;
    bx = bv * c;
    const double nb = x.dot(bx).real();
    if (!(nb > 0.0)) {
      out.status = LobpcgStatus::indefinite;
      return out;
    }
    x /= std::sqrt(nb);
    ax /= std::sqrt(nb);
    bx /= std::sqrt(nb);
    theta = x.dot(ax).real();
  }
}

namespace {

struct Run {
  LobpcgResult result;
  int indefinite = 0;
};

// Best of n restarts. Restart r always uses stream r, so adding restarts can
// only lower the returned energy.
Run best_of_restarts(const LinearMap& a, const LinearMap& b, const LinearMap& t, Eigen::Index n,
                     const SolverConfig& cfg, std::uint64_t seed) {
  const Rng root(seed);
  Run best;
  bool have = false;
  for (int r = 0; r < std::max(cfg.n_restarts, 1); ++r) {
    Rng rng = root.split(static_cast<std::uint64_t>(r));
    Eigen::VectorXcd x0(n);
    for (Eigen::Index i = 0; i < n; ++i) x0(i) = rng.complex_normal();
    LobpcgResult res = lobpcg(a, b, t, x0, cfg.tol, cfg.maxiter);
    if (res.status == LobpcgStatus::indefinite) {
      ++best.indefinite;
      continue;
    }
    const bool conv = res.status == LobpcgStatus::converged;
    const bool best_conv = have && best.result.status == LobpcgStatus::converged;
    const bool better = !have || (conv && !best_conv) ||
                        (conv == best_conv && res.value < best.result.value);
    if (better) {
      best.result = std::move(res);
      have = true;
    }
  }
  if (!have) best.result.status = LobpcgStatus::indefinite;
  return best;
}

LinearMap pseudo_inverse_map(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v_keep,
                             const Eigen::VectorXd& lam_keep) {
  // [[I + U S+ U^dag, -U S+], [-S+ U^dag, S+]] applied without forming blocks.
  const Eigen::Index nc = u.rows();
  return [u, v_keep, lam_keep, nc](const Eigen::VectorXcd& x) {
    const Eigen::Index nq = u.cols();
    const Eigen::VectorXcd xc = x.head(nc);
    const Eigen::VectorXcd xq = x.tail(nq);
    const Eigen::VectorXcd z = u.adjoint() * xc - xq;
    const Eigen::VectorXcd s_plus_z =
        v_keep * (lam_keep.cwiseInverse().cast<Complex>().cwiseProduct(v_keep.adjoint() * z));
    Eigen::VectorXcd y(nc + nq);
    y.head(nc) = xc + u * s_plus_z;
    y.tail(nq) = -s_plus_z;
    return y;
  };
}

void finish(SolverOutcome& out, const BlockMatrices& pair, const Eigen::VectorXcd& full) {
  const Eigen::Index nc = pair.n_c();
  out.classical = full.head(nc);
  out.quantum = full.tail(pair.n_q());
  const double norm = full.dot(pair.apply_S(full)).real();
  if (norm > 0.0) {
    out.classical /= std::sqrt(norm);
    out.quantum /= std::sqrt(norm);
  }
  out.classical_weight = out.classical.squaredNorm();
}

SolverOutcome plain_outcome(const BlockMatrices& pair, const SolverConfig& cfg, std::uint64_t seed,
                            const LinearMap& t) {
  SolverOutcome out;
  const auto a = [&pair](const Eigen::VectorXcd& x) { return pair.apply_H(x); };
  const auto b = [&pair](const Eigen::VectorXcd& x) { return pair.apply_S(x); };
  Run run = best_of_restarts(a, b, t, pair.dim(), cfg, seed);
  out.indefinite_restarts = run.indefinite;
  if (run.result.status == LobpcgStatus::indefinite) return out;
  out.energy = run.result.value;
  out.iterations = run.result.iterations;
  out.residual = run.result.residual;
  out.converged = run.result.status == LobpcgStatus::converged;
  finish(out, pair, run.result.vector);
  return out;
}

}  // namespace

SolverOutcome solve(const BlockMatrices& pair, const SolverConfig& cfg, std::uint64_t seed) {
  if (!(cfg.tol > 0.0) || cfg.rank_tol < 0.0 || cfg.maxiter < 0) {
    throw ContractError("invalid solver configuration");
  }
  if (!pair.all_finite()) throw DataError("block matrices contain non-finite entries");
  if (pair.hermiticity_defect() > 1e-10) throw ContractError("block pair is not Hermitian");
  if (pair.dim() == 0) throw ContractError("empty eigenproblem");

  const Eigen::Index nc = pair.n_c();
  const Eigen::Index nq = pair.n_q();
  if (nq == 0 || cfg.mode == SolverMode::plain) {
    SolverOutcome out = plain_outcome(pair, cfg, seed, LinearMap{});
    out.mode = cfg.mode;
    for (Eigen::Index j = 0; j < nq; ++j) out.retained.push_back(j);
    return out;
  }

  const SchurSpectrum spec = schur_complement(pair);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < nq; ++i) {
    if (spec.eigvals(i) > cfg.rank_tol) keep.push_back(i);
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXcd v_keep(nq, r);
  Eigen::VectorXd lam_keep(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    v_keep.col(i) = spec.eigvecs.col(keep[static_cast<std::size_t>(i)]);
    lam_keep(i) = spec.eigvals(keep[static_cast<std::size_t>(i)]);
  }

  if (r == 0) {
    if (nc == 0) throw ContractError("every direction was truncated and no classical sector remains");
    SolverOutcome out = plain_outcome(pair.truncated(nc, 0), cfg, seed, LinearMap{});
    out.mode = cfg.mode;
    out.all_truncated = true;
    out.n_discarded = nq;
    out.quantum = Eigen::VectorXcd::Zero(nq);
    return out;
  }

  if (cfg.mode == SolverMode::pseudo_inverse) {
    SolverOutcome out = plain_outcome(pair, cfg, seed, pseudo_inverse_map(pair.S_cq, v_keep, lam_keep));
    out.mode = cfg.mode;
    out.retained = keep;
    out.n_discarded = nq - r;
    return out;
  }

  // Deflation: replace the quantum sector by its retained Schur directions.
  BlockMatrices red;
  red.H_cc = pair.H_cc;
  red.S_cq = pair.S_cq * v_keep;
  red.H_cq = pair.H_cq * v_keep;
  red.S_qq = v_keep.adjoint() * pair.S_qq * v_keep;
  red.H_qq = v_keep.adjoint() * pair.H_qq * v_keep;
  red.hermitize();
  const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(r, r);
  SolverOutcome out = plain_outcome(red, cfg, seed, pseudo_inverse_map(red.S_cq, ident, lam_keep));
  out.mode = cfg.mode;
  out.retained = keep;
  out.n_discarded = nq - r;
  if (out.quantum.size() == r) out.quantum = (v_keep * out.quantum).eval();
  return out;
}

OverlapModes overlap_modes(const BlockMatrices& s) {
  const Eigen::Index nc = s.n_c();
  const Eigen::Index nq = s.n_q();
  OverlapModes out;
  Eigen::Index rank = 0;
  Eigen::MatrixXcd r_block(0, nq);
  if (nc > 0 && nq > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(s.S_cq);
    qr.setThreshold(1e-12);
    rank = qr.rank();
    out.q = qr.householderQ() * Eigen::MatrixXcd::Identity(nc, rank);
    r_block = out.q.adjoint() * s.S_cq;
  } else {
    out.q = Eigen::MatrixXcd(nc, 0);
  }
  out.unit_multiplicity = nc - rank;
  const Eigen::Index m = rank + nq;
  Eigen::MatrixXcd comp(m, m);
  comp.topLeftCorner(rank, rank).setIdentity();
  comp.topRightCorner(rank, nq) = r_block;
  comp.bottomLeftCorner(nq, rank) = r_block.adjoint();
  comp.bottomRightCorner(nq, nq) = 0.5 * (s.S_qq + s.S_qq.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(comp);
  out.values = eig.eigenvalues();
  out.vectors.resize(nc + nq, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.vectors.col(i).head(nc) = out.q * eig.eigenvectors().col(i).head(rank);
    out.vectors.col(i).tail(nq) = eig.eigenvectors().col(i).tail(nq);
  }
  return out;
}

double conditioning_metric(const BlockMatrices& s) {
  const OverlapModes modes = overlap_modes(s);
  double lo = modes.unit_multiplicity > 0 ? 1.0 : std::numeric_limits<double>::infinity();
  double hi = modes.unit_multiplicity > 0 ? 1.0 : 0.0;
  if (modes.values.size() > 0) {
    lo = std::min(lo, modes.values.minCoeff());
    hi = std::max(hi, modes.values.cwiseAbs().maxCoeff());
  }
  // Anything at rounding level relative to the spectrum counts as singular.
  const double floor = static_cast<double>(s.dim()) * std::numeric_limits<double>::epsilon() * hi;
  if (std::abs(lo) <= std::max(floor, 1e-300)) return std::numeric_limits<double>::infinity();
  return 1.0 / std::abs(lo);
}

DenseReference dense_reference(const BlockMatrices& pair, double cutoff) {
  const Eigen::MatrixXcd s = pair.dense_S();
  const Eigen::MatrixXcd hm = pair.dense_H();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> se(0.5 * (s + s.adjoint()));
  const double top = se.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (se.eigenvalues()(i) > cutoff * top) keep.push_back(i);
  }
  if (keep.empty()) throw DataError("overlap matrix has no numerically positive direction");
  Eigen::MatrixXcd t(s.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    t.col(static_cast<Eigen::Index>(i)) = se.eigenvectors().col(keep[i]) / std::sqrt(se.eigenvalues()(keep[i]));
  }
  Eigen::MatrixXcd reduced = t.adjoint() * hm * t;
  reduced = (0.5 * (reduced + reduced.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> he(reduced);
  DenseReference out;
  out.energy = he.eigenvalues()(0);
  out.vector = t * he.eigenvectors().col(0);
  out.rank = static_cast<Eigen::Index>(keep.size());
  return out;
}

nlohmann::json to_json(const SolverOutcome& o) {
  auto vec = [](const Eigen::VectorXcd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
    return a;
  };
  nlohmann::json j;
  j["mode"] = to_string(o.mode);
  j["energy"] = o.energy;
  j["classical_weight"] = o.classical_weight;
  j["retained"] = o.retained;
  j["n_discarded"] = o.n_discarded;
  j["iterations"] = o.iterations;
  j["residual"] = o.residual;
  j["converged"] = o.converged;
  j["all_truncated"] = o.all_truncated;
  j["indefinite_restarts"] = o.indefinite_restarts;
  j["classical"] = vec(o.classical);
  j["quantum"] = vec(o.quantum);
  return j;
}

}  // namespace canoe
