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


#include "canoe/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "canoe/errors.hpp"
#include "canoe/gensolver.hpp"

namespace canoe {

double overlap_error_frobenius(const Eigen::MatrixXcd& delta_cq, const Eigen::MatrixXcd& delta_qq) {
  // The cq error appears twice in the assembled matrix (upper and lower block).
  return std::sqrt(2.0 * delta_cq.squaredNorm() + delta_qq.squaredNorm());
}

SyntheticNoise synthetic_alpha_noise(const BlockMatrices& exact, const EstimatedBlock& reference,
                                     double alpha) {
  if (!(alpha >= 0.0)) throw ContractError("noise scale alpha must be nonnegative");
  if (reference.S_cq_hat.rows() != exact.n_c() || reference.S_cq_hat.cols() != exact.n_q()) {
    throw ContractError("reference sample shape does not match exact blocks");
  }
  const Eigen::MatrixXcd ds = reference.S_cq_hat - exact.S_cq;
  const Eigen::MatrixXcd dh = reference.H_cq_hat - exact.H_cq;
  SyntheticNoise out;
  out.pair = exact;
  out.pair.S_cq = exact.S_cq + alpha * ds;
  out.pair.H_cq = exact.H_cq + alpha * dh;
  out.frobenius = alpha * overlap_error_frobenius(ds, Eigen::MatrixXcd::Zero(exact.n_q(), exact.n_q()));
  return out;
}

ComplexityInputs ComplexityInputs::with_batches(double n_c, double n_q, double m, double n_terms,
                                                double n_qubit, double norm_1, double norm_2,
                                                double epsilon, double delta) {
  ComplexityInputs in;
  in.n_c = n_c;
  in.n_q = n_q;
  in.m = m;
  in.n_batches = std::ceil(n_c / m);
  in.n_terms = n_terms;
  in.n_qubit = n_qubit;
  in.norm_1 = norm_1;
  in.norm_2 = norm_2;
  in.epsilon = epsilon;
  in.delta = delta;
  return in;
}

double complexity(ComplexityMethod method, const ComplexityInputs& in) {
  if (!(in.epsilon > 0.0) || !(in.delta > 0.0) || !(in.delta < 1.0)) {
    throw ContractError("complexity needs epsilon > 0 and delta in (0, 1)");
  }
  const double e2 = in.epsilon * in.epsilon;
  switch (method) {
    case ComplexityMethod::hadamard:
      return 2.0 * in.n_c * in.n_q * in.n_terms * in.norm_2 * in.norm_2 / e2;
    case ComplexityMethod::shadow:
      return 68.0 * in.n_q * std::pow(3.0, in.n_qubit) * in.norm_1 * in.norm_1 *
             std::log(4.0 * in.n_c / in.delta) / e2;
    case ComplexityMethod::histogram: {
      const double hist = in.n_q * (1.0 + 2.0 * in.n_batches);
      return hist * 2.25 * in.m * in.norm_1 * in.norm_1 / e2 *
             std::log(2.0 * std::pow(2.0, in.n_qubit) * hist / in.delta);
    }
  }
  return 0.0;
}

double hoeffding_epsilon(int n_qubit, std::size_t n_q, std::size_t n_batches, double delta,
                         std::uint64_t shots) {
  if (shots == 0 || !(delta > 0.0) || !(delta < 1.0)) throw ContractError("invalid Hoeffding inputs");
  const double hist = static_cast<double>(n_q) * (1.0 + 2.0 * static_cast<double>(n_batches));
  const double arg = 2.0 * std::pow(2.0, n_qubit) * hist / delta;
  return std::sqrt(std::log(arg) / (2.0 * static_cast<double>(shots)));
}

namespace {

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

PerturbativeError perturbative_energy_error(const Eigen::MatrixXcd& d_h, const Eigen::MatrixXcd& d_s,
                                            double e0, const Eigen::VectorXcd& v0,
                                            std::optional<double> gap) {
  if (d_h.rows() != v0.size() || d_s.rows() != v0.size()) throw ContractError("perturbation shape mismatch");
  PerturbativeError out;
  out.shift = v0.dot((d_h - e0 * d_s) * v0).real();
  out.perturbation_size = spectral_norm(d_h) + std::abs(e0) * spectral_norm(d_s);
  if (gap) out.within_gap = out.perturbation_size < *gap;
  return out;
}

UnresolvedWeight unresolved_weight(const BlockMatrices& exact, const Eigen::MatrixXcd& sampled_cq,
                                   const Eigen::MatrixXcd& sampled_qq, const Eigen::VectorXcd& ground) {
  const Eigen::Index nc = exact.n_c();
  const Eigen::Index nq = exact.n_q();
  if (sampled_cq.rows() != nc || sampled_cq.cols() != nq || sampled_qq.rows() != nq ||
      ground.size() != nc + nq) {
    throw ContractError("unresolved weight inputs have inconsistent shapes");
  }
  UnresolvedWeight out;
  const Eigen::MatrixXcd d_cq = sampled_cq - exact.S_cq;
  const Eigen::MatrixXcd d_qq = sampled_qq - exact.S_qq;

  Eigen::MatrixXcd r(0, nq);
  if (nc > 0 && nq > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(d_cq);
    qr.setThreshold(1e-12);
    out.rank = qr.rank();
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(nc, out.rank);
    r = q.adjoint() * d_cq;
  }
  const Eigen::Index m = out.rank + nq;
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(m, m);
  d.topRightCorner(out.rank, nq) = r;
  d.bottomLeftCorner(nq, out.rank) = r.adjoint();
  d.bottomRightCorner(nq, nq) = 0.5 * (d_qq + d_qq.adjoint());
  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(d, Eigen::EigenvaluesOnly);
    out.tau = eig.eigenvalues().cwiseAbs().maxCoeff();
  }
  // A noiseless run resolves everything, including exact null modes.
  if (out.tau == 0.0) return out;

  const double total = ground.squaredNorm();
  if (!(total > 0.0)) throw ContractError("ground vector is zero");
  const OverlapModes modes = overlap_modes(exact);
  double w = 0.0;
  for (Eigen::Index i = 0; i < modes.values.size(); ++i) {
    if (modes.values(i) <= out.tau) w += std::norm(modes.vectors.col(i).dot(ground));
  }
  if (modes.unit_multiplicity > 0 && 1.0 <= out.tau) {
    const Eigen::VectorXcd gc = ground.head(nc);
    w += gc.squaredNorm() - (modes.q.adjoint() * gc).squaredNorm();
  }
  out.weight = w / total;
  return out;
}

std::vector<std::pair<double, double>> lower_envelope(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::pair<double, double>> sorted = pts;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<double, double>> env;
  for (const auto& p : sorted) {
    if (env.empty() || p.second < env.back().second) env.push_back(p);
  }
  return env;
}

namespace {

double loglog_solve(const std::pair<double, double>& p1, const std::pair<double, double>& p2, double y) {
  const double lx1 = std::log(p1.first);
  const double lx2 = std::log(p2.first);
  const double ly1 = std::log(p1.second);
  const double ly2 = std::log(p2.second);
  return std::exp(lx1 + (std::log(y) - ly1) * (lx2 - lx1) / (ly2 - ly1));
}

double log_dimension(int n_qubit, double n_q) {
  return static_cast<double>(n_qubit) * std::log(2.0) + std::log(n_q);
}

}  // namespace

CrossingPoint chemical_accuracy_crossing(const ErrorCurve& curve, int target_nq, double threshold) {
  CrossingPoint out;
  out.system = curve.system;
  if (curve.n_q < 1 || curve.n_qubit < 1) return out;
  std::vector<std::pair<double, double>> valid;
  for (const auto& p : curve.points) {
    if (p.first > 0.0 && p.second > 0.0 && std::isfinite(p.second)) valid.push_back(p);
  }
  const auto env = lower_envelope(valid);
  if (env.empty()) return out;
  std::optional<double> shots;
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (env[i].second <= threshold) {
      shots = i == 0 ? env[0].first : loglog_solve(env[i - 1], env[i], threshold);
      break;
    }
  }
  if (!shots) {
    if (env.size() < 2) return out;
    shots = loglog_solve(env[env.size() - 2], env.back(), threshold);
    out.extrapolated = true;
  }
  out.usable = std::isfinite(*shots) && *shots > 0.0;
  out.shots = *shots;
  out.x = log_dimension(curve.n_qubit, target_nq);
  out.adjusted_shots = *shots * out.x / log_dimension(curve.n_qubit, curve.n_q);
  return out;
}

ExtrapolationFit extrapolate_shots(const std::vector<ErrorCurve>& curves, int target_nq,
                                   int target_qubits, double threshold) {
  ExtrapolationFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& c : curves) {
    CrossingPoint p = chemical_accuracy_crossing(c, target_nq, threshold);
    if (p.usable) {
      xs.push_back(p.x);
      ys.push_back(p.adjusted_shots);
    }
    fit.points.push_back(std::move(p));
  }
  const bool distinct = !xs.empty() && std::any_of(xs.begin(), xs.end(), [&](double x) { return x != xs[0]; });
  if (xs.size() < 2 || !distinct) throw DataError("shot extrapolation needs at least two usable systems");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.a = sxy / sxx;
  fit.b = my - fit.a * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.a * xs[i] + fit.b);
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.predicted_shots = fit.a * log_dimension(target_qubits, target_nq) + fit.b;
  return fit;
}

ErrorRateBound error_rate_bound(double terms, double trotter_steps, double krylov_index, double delta) {
  if (!(terms > 0.0) || !(trotter_steps > 0.0) || !(krylov_index > 0.0)) {
    throw ContractError("error-rate bound needs positive depth factors");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) throw ContractError("failure probability must lie in (0, 1)");
  ErrorRateBound out;
  out.gate_depth = terms * trotter_steps * krylov_index;
  // 1 - (1 - delta)^(1/D) without cancellation for large D.
  out.p_max = -std::expm1(std::log1p(-delta) / out.gate_depth);
  return out;
}

}  // namespace canoe
