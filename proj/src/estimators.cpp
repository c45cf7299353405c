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


#include "canoe/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "canoe/errors.hpp"
#include "canoe/kernels.hpp"

namespace canoe {

namespace {

void require_normalized(const SparseState& x, const char* what) {
  if (std::abs(x.norm() - 1.0) > 1e-10) {
    throw ContractError(std::string(what) + " must be normalized (norm " + std::to_string(x.norm()) + ")");
  }
}

const Histogram::Bin* find_bin(const std::vector<Histogram::Bin>& bins, std::uint64_t bits) {
  auto it = std::lower_bound(bins.begin(), bins.end(), bits,
                             [](const Histogram::Bin& b, std::uint64_t v) { return b.bits < v; });
  if (it == bins.end() || it->bits != bits) return nullptr;
  return &*it;
}

}  // namespace

double Histogram::count(std::uint64_t bits) const {
  const Bin* b = find_bin(bins, bits);
  return b ? b->count : 0.0;
}

double Histogram::frequency(std::uint64_t bits) const {
  const double c = count(bits);
  return exact() ? c : c / static_cast<double>(shots);
}

double Histogram::total() const {
  double t = discarded;
  for (const auto& b : bins) t += b.count;
  return t;
}

BatchPlan BatchPlan::make(std::size_t n_classical, std::size_t batch_size) {
  if (batch_size == 0) throw ContractError("batch size must be positive");
  BatchPlan plan;
  plan.batch_size = std::min(batch_size, std::max<std::size_t>(n_classical, 1));
  for (std::size_t start = 0; start < n_classical; start += plan.batch_size) {
    std::vector<std::size_t> batch;
    for (std::size_t i = start; i < std::min(n_classical, start + plan.batch_size); ++i) batch.push_back(i);
    plan.batches.push_back(std::move(batch));
  }
  return plan;
}

SparseState batch_state(const std::vector<Determinant>& classical, const BatchPlan& plan,
                        std::size_t k) {
  if (k >= plan.n_batches()) throw ContractError("batch index out of range");
  const auto& batch = plan.batches[k];
  if (batch.empty()) throw ContractError("empty batch");
  const double beta = 1.0 / std::sqrt(static_cast<double>(batch.size()));
  std::vector<SparseState::Entry> entries;
  entries.reserve(batch.size());
  for (std::size_t i : batch) entries.push_back({classical.at(i).bits(), Complex(beta, 0.0)});
  return SparseState::from_entries(classical.at(batch.front()).n_qubit(), std::move(entries), 0.0);
}

Histogram exact_histogram(const SparseState& state) {
  require_normalized(state, "sampled state");
  Histogram h;
  h.kind = HistogramKind::reference;
  h.n_qubit = state.n_qubit();
  h.shots = kExactShots;
  for (const auto& e : state.entries()) h.bins.push_back({e.bits, std::norm(e.amp)});
  return h;
}

Histogram sample_histogram(const SparseState& state, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw ContractError("histogram sampling needs at least one shot");
  require_normalized(state, "sampled state");
  std::vector<double> probs;
  probs.reserve(state.size());
  for (const auto& e : state.entries()) probs.push_back(std::norm(e.amp));
  const auto counts = rng.multinomial(shots, probs);
  Histogram h;
  h.kind = HistogramKind::reference;
  h.n_qubit = state.n_qubit();
  h.shots = shots;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) h.bins.push_back({state.entries()[i].bits, static_cast<double>(counts[i])});
  }
  return h;
}

Histogram sample_histogram(const SparseState& state, std::uint64_t shots, std::uint64_t seed) {
  Rng rng(seed);
  return sample_histogram(state, shots, rng);
}

namespace {

struct JointSupport {
  std::vector<std::uint64_t> bits;
  std::vector<Complex> a;
  std::vector<Complex> b;
};

JointSupport merge_support(const SparseState& phi, const SparseState& chi) {
  JointSupport out;
  auto ea = phi.entries();
  auto eb = chi.entries();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && ea[i].bits < eb[j].bits)) {
      out.bits.push_back(ea[i].bits);
      out.a.push_back(ea[i].amp);
      out.b.push_back(0.0);
      ++i;
    } else if (i == ea.size() || eb[j].bits < ea[i].bits) {
      out.bits.push_back(eb[j].bits);
      out.a.push_back(0.0);
      out.b.push_back(eb[j].amp);
      ++j;
    } else {
      out.bits.push_back(ea[i].bits);
      out.a.push_back(ea[i].amp);
      out.b.push_back(eb[j].amp);
      ++i;
      ++j;
    }
  }
  return out;
}

Histogram joint_histogram(const JointSupport& sup, Complex beta_phase, HistogramKind kind,
                          int n_qubit, std::uint64_t shots, Rng* rng) {
  const std::size_t n = sup.bits.size();
  std::vector<double> probs(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = 0.25 * std::norm(sup.a[i] + beta_phase * sup.b[i]);
    probs[n + i] = 0.25 * std::norm(sup.a[i] - beta_phase * sup.b[i]);
  }
  Histogram h;
  h.kind = kind;
  h.n_qubit = n_qubit;
  h.shots = shots;
  if (shots == kExactShots) {
    for (std::size_t i = 0; i < n; ++i) h.bins.push_back({sup.bits[i], probs[i]});
    for (std::size_t i = 0; i < n; ++i) h.discarded += probs[n + i];
    return h;
  }
  const auto counts = rng->multinomial(shots, probs);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) h.bins.push_back({sup.bits[i], static_cast<double>(counts[i])});
    h.discarded += static_cast<double>(counts[n + i]);
  }
  return h;
}

JointHistograms joint_histograms(const SparseState& phi, const SparseState& chi,
                                 std::uint64_t shots, Rng* rng) {
  if (phi.n_qubit() != chi.n_qubit()) throw ContractError("joint histogram widths differ");
  require_normalized(phi, "quantum state");
  require_normalized(chi, "batch state");
  const JointSupport sup = merge_support(phi, chi);
  JointHistograms out;
  out.real = joint_histogram(sup, Complex(1.0, 0.0), HistogramKind::joint_real, phi.n_qubit(), shots, rng);
  out.imag = joint_histogram(sup, Complex(0.0, 1.0), HistogramKind::joint_imag, phi.n_qubit(), shots, rng);
  return out;
}

}  // namespace

JointHistograms sample_joint_histograms(const SparseState& phi, const SparseState& chi,
                                        std::uint64_t shots, Rng& rng) {
  return joint_histograms(phi, chi, shots, &rng);
}

JointHistograms sample_joint_histograms(const SparseState& phi, const SparseState& chi,
                                        std::uint64_t shots, std::uint64_t seed) {
  Rng rng(seed);
  return joint_histograms(phi, chi, shots, &rng);
}

std::vector<AlphaEstimate> estimate_alpha(const Histogram& p_q, const Histogram& j_r,
                                          const Histogram& j_i, const BatchPlan& plan,
                                          std::size_t k, const std::vector<Determinant>& classical) {
  if (k >= plan.n_batches()) throw ContractError("batch index out of range");
  if (p_q.kind != HistogramKind::reference || j_r.kind != HistogramKind::joint_real ||
      j_i.kind != HistogramKind::joint_imag) {
    throw ContractError("histogram kinds do not match estimator slots");
  }
  const auto& batch = plan.batches[k];
  const double m = static_cast<double>(batch.size());
  const double sm = std::sqrt(m);
  std::vector<AlphaEstimate> out;
  out.reserve(batch.size());
  for (std::size_t idx : batch) {
    const Determinant& d = classical.at(idx);
    const double pq = p_q.frequency(d.bits());
    const double pr = 2.0 * j_r.frequency(d.bits());
    const double pi = 2.0 * j_i.frequency(d.bits());
    const double base = 0.5 * (pq + 1.0 / m);
    out.push_back({d, Complex(sm * (pr - base), sm * (pi - base))});
  }
  return out;
}

EstimatedBlock estimate_cq_block(const PauliHamiltonian& h, const HybridBasis& basis,
                                 const BatchPlan& plan, std::uint64_t shots_per_histogram,
                                 std::uint64_t seed) {
  const auto& cls = basis.classical();
  std::size_t covered = 0;
  for (const auto& b : plan.batches) covered += b.size();
  if (covered != cls.size()) throw ContractError("batch plan does not cover the classical sector");

  const Eigen::Index nc = basis.n_c();
  const Eigen::Index nq = basis.n_q();
  EstimatedBlock out;
  out.method = EstimatorMethod::histogram;
  out.S_cq_hat = Eigen::MatrixXcd::Zero(nc, nq);
  out.H_cq_hat = Eigen::MatrixXcd::Zero(nc, nq);
  out.shots_per_histogram = shots_per_histogram;
  out.seed = seed;
  out.batch_size = plan.batch_size;
  out.n_batches = plan.n_batches();
  out.total_shots = static_cast<std::uint64_t>(nq) * (1 + 2 * plan.n_batches()) * shots_per_histogram;
  if (nc == 0 || nq == 0) return out;

  const bool exact = shots_per_histogram == kExactShots;
  std::vector<SparseState> chis;
  for (std::size_t k = 0; k < plan.n_batches(); ++k) chis.push_back(batch_state(cls, plan, k));
  const auto rows = basis.classical_bits();
  const Rng root(seed);

  for (Eigen::Index j = 0; j < nq; ++j) {
    const SparseState& phi = basis.quantum()[static_cast<std::size_t>(j)];
    const Rng stream = root.split(static_cast<std::uint64_t>(j));
    Rng ref_rng = stream.split(0);
    const Histogram pq = exact ? exact_histogram(phi) : sample_histogram(phi, shots_per_histogram, ref_rng);
    std::vector<SparseState::Entry> table;
    table.reserve(cls.size());
    for (std::size_t k = 0; k < plan.n_batches(); ++k) {
      Rng batch_rng = stream.split(1 + k);
      const JointHistograms jh =
          joint_histograms(phi, chis[k], shots_per_histogram, exact ? nullptr : &batch_rng);
      for (const auto& a : estimate_alpha(pq, jh.real, jh.imag, plan, k, cls)) {
        table.push_back({a.det.bits(), a.value});
      }
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
      // Batches walk the classical list in order, so table[i] belongs to row i.
      out.S_cq_hat(static_cast<Eigen::Index>(i), j) = table[i].amp;
    }
    const SparseState alpha = SparseState::from_entries(basis.n_qubit(), std::move(table), 0.0);
    out.H_cq_hat.col(j) = hamiltonian_column_from_overlaps(h, rows, alpha);
  }
  return out;
}

Determinant choose_shadow_reference(const HybridBasis& basis) {
  const int n = basis.n_qubit();
  auto clear = [&](std::uint64_t bits) {
    for (const auto& q : basis.quantum()) {
      const Complex* a = q.find(bits);
      if (a && std::abs(*a) > 1e-10) return false;
    }
    return true;
  };
  const std::uint64_t limit = n >= 63 ? ~0ULL : (1ULL << n);
  for (std::uint64_t b = 0; b < limit; ++b) {
    if (clear(b)) return Determinant(b, n);
  }
  throw ContractError("no determinant has zero amplitude in every quantum state");
}

namespace {

// Amplitudes of psi in the rotated product basis: out[b] = prod_k conj(e_{b_k}) . psi.
void rotate_to_bases(std::vector<Complex>& psi, int n, const std::vector<std::uint8_t>& bases) {
  const double r = 1.0 / std::sqrt(2.0);
  const std::size_t dim = psi.size();
  for (int k = 0; k < n; ++k) {
    if (bases[static_cast<std::size_t>(k)] == 2) continue;
    const bool y = bases[static_cast<std::size_t>(k)] == 1;
    const std::size_t bit = 1ULL << k;
    for (std::size_t s = 0; s < dim; ++s) {
      if (s & bit) continue;
      const Complex a0 = psi[s];
      const Complex a1 = psi[s | bit];
      // Rows are conj(e_0) = (1, 1)/sqrt2 or (1, -i)/sqrt2, conj(e_1) = (1, -1)/sqrt2 or (1, i)/sqrt2.
      const Complex w = y ? Complex(0.0, -1.0) : Complex(1.0, 0.0);
      psi[s] = r * (a0 + w * a1);
      psi[s | bit] = r * (a0 - w * a1);
    }
  }
}

}  // namespace

EstimatedBlock shadow_estimate_cq_block(const PauliHamiltonian& h, const HybridBasis& basis,
                                        std::uint64_t snapshots_per_state, std::uint64_t seed,
                                        const ShadowOptions& options) {
  const int n = basis.n_qubit();
  if (n > kShadowQubitLimit) {
    throw SizeLimitError("shadow estimator is limited to " + std::to_string(kShadowQubitLimit) + " qubits");
  }
  if (options.groups == 0) throw ContractError("median-of-means needs at least one group");
  if (snapshots_per_state < options.groups) throw ContractError("fewer snapshots than groups");

  Determinant ref;
  if (options.reference) {
    ref = *options.reference;
    if (ref.n_qubit() != n) throw ContractError("shadow reference width mismatch");
    for (const auto& q : basis.quantum()) {
      const Complex* a = q.find(ref.bits());
      if (a && std::abs(*a) > 1e-10) {
        throw ContractError("shadow reference " + ref.to_string() + " overlaps a quantum state");
      }
    }
  } else {
    ref = choose_shadow_reference(basis);
  }

  const Eigen::Index nc = basis.n_c();
  const Eigen::Index nq = basis.n_q();
  EstimatedBlock out;
  out.method = EstimatorMethod::shadow;
  out.S_cq_hat = Eigen::MatrixXcd::Zero(nc, nq);
  out.H_cq_hat = Eigen::MatrixXcd::Zero(nc, nq);
  out.shots_per_histogram = snapshots_per_state;
  out.total_shots = static_cast<std::uint64_t>(nq) * snapshots_per_state;
  out.seed = seed;
  out.shadow_reference = ref;
  out.shadow_groups = options.groups;
  if (nc == 0 || nq == 0) return out;

  const std::size_t dim = std::size_t{1} << n;
  std::uint64_t n_settings = 1;
  for (int k = 0; k < n; ++k) n_settings *= 3;
  const std::vector<double> uniform(n_settings, 1.0);

  const auto rows = basis.classical_bits();
  const Rng root(seed);
  for (Eigen::Index j = 0; j < nq; ++j) {
    const SparseState& phi = basis.quantum()[static_cast<std::size_t>(j)];
    std::vector<Complex> psi_r(dim, 0.0);
    for (const auto& e : phi.entries()) psi_r[e.bits] = e.amp / std::sqrt(2.0);
    psi_r[ref.bits()] += 1.0 / std::sqrt(2.0);

    const Rng stream = root.split(static_cast<std::uint64_t>(j));
    std::vector<Eigen::VectorXcd> group_means;
    for (std::size_t g = 0; g < options.groups; ++g) {
      std::uint64_t n_g = snapshots_per_state / options.groups;
      if (g < snapshots_per_state % options.groups) ++n_g;
      Rng rng = stream.split(g);
      const auto per_setting = rng.multinomial(n_g, uniform);
      std::vector<kernels::ShadowObservation> obs;
      for (std::uint64_t code = 0; code < n_settings; ++code) {
        if (per_setting[code] == 0) continue;
        std::vector<std::uint8_t> bases(static_cast<std::size_t>(n));
        std::uint64_t c = code;
        for (int k = 0; k < n; ++k) {
          bases[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(c % 3);
          c /= 3;
        }
        std::vector<Complex> rotated = psi_r;
        rotate_to_bases(rotated, n, bases);
        std::vector<double> probs(dim);
        for (std::size_t s = 0; s < dim; ++s) probs[s] = std::norm(rotated[s]);
        const auto outcomes = rng.multinomial(per_setting[code], probs);
        for (std::size_t s = 0; s < dim; ++s) {
          if (outcomes[s] > 0) obs.push_back({bases, s, outcomes[s]});
        }
      }
      Eigen::VectorXcd acc(nc);
      kernels::omp::shadow_accumulate(rows, ref.bits(), n, obs,
                                      std::span<Complex>(acc.data(), static_cast<std::size_t>(nc)));
      // <d|phi> = 2 <d|rho|ref> because <ref|phi> = 0 and <d|ref> = 0.
      group_means.push_back(acc * (2.0 / static_cast<double>(n_g)));
    }
    for (Eigen::Index i = 0; i < nc; ++i) {
      if (rows[static_cast<std::size_t>(i)] == ref.bits()) continue;  // known zero overlap
      std::vector<double> re;
      std::vector<double> im;
      for (const auto& gm : group_means) {
        re.push_back(gm(i).real());
        im.push_back(gm(i).imag());
      }
      auto median = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        const std::size_t mid = v.size() / 2;
        return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
      };
      out.S_cq_hat(i, j) = Complex(median(re), median(im));
    }
    std::vector<SparseState::Entry> table;
    for (Eigen::Index i = 0; i < nc; ++i) table.push_back({rows[static_cast<std::size_t>(i)], out.S_cq_hat(i, j)});
    const SparseState alpha = SparseState::from_entries(n, std::move(table), 0.0);
    out.H_cq_hat.col(j) = hamiltonian_column_from_overlaps(h, rows, alpha);
  }
  return out;
}

BlockMatrices inject_qq(const EstimatedBlock& block, const BlockMatrices& exact) {
  if (block.S_cq_hat.rows() != exact.n_c() || block.S_cq_hat.cols() != exact.n_q() ||
      block.H_cq_hat.rows() != exact.n_c() || block.H_cq_hat.cols() != exact.n_q()) {
    throw ContractError("sampled block shape does not match exact blocks");
  }
  BlockMatrices out = exact;
  out.S_cq = block.S_cq_hat;
  out.H_cq = block.H_cq_hat;
  out.hermitize();
  return out;
}

double hadamard_cost_model(std::size_t n_terms, double norm_2, std::size_t n_c, std::size_t n_q,
                           double epsilon) {
  if (!(epsilon > 0.0)) throw ContractError("epsilon must be positive");
  return 2.0 * static_cast<double>(n_c) * static_cast<double>(n_q) * static_cast<double>(n_terms) *
         norm_2 * norm_2 / (epsilon * epsilon);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("matrix must be an array of rows");
  const auto nr = static_cast<Eigen::Index>(j.size());
  const auto nc = nr > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXcd m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != nc) throw FormatError("ragged matrix");
    for (Eigen::Index c = 0; c < nc; ++c) {
      const auto& z = row[static_cast<std::size_t>(c)];
      if (!z.is_array() || z.size() != 2) throw FormatError("complex entries must be [re, im]");
      m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

nlohmann::json to_json(const EstimatedBlock& block) {
  nlohmann::json j;
  j["method"] = block.method == EstimatorMethod::histogram ? "histogram" : "shadow";
  j["seed"] = block.seed;
  j["shots_per_histogram"] = block.shots_per_histogram;
  j["total_shots"] = block.total_shots;
  j["batch_size"] = block.batch_size;
  j["n_batches"] = block.n_batches;
  if (block.shadow_reference) {
    j["shadow_reference"] = block.shadow_reference->to_string();
    j["shadow_groups"] = block.shadow_groups;
  }
  j["S_cq_hat"] = matrix_to_json(block.S_cq_hat);
  j["H_cq_hat"] = matrix_to_json(block.H_cq_hat);
  return j;
}

EstimatedBlock estimated_block_from_json(const nlohmann::json& j) {
  try {
    EstimatedBlock b;
    const auto method = j.at("method").get<std::string>();
    if (method == "histogram") {
      b.method = EstimatorMethod::histogram;
    } else if (method == "shadow") {
      b.method = EstimatorMethod::shadow;
    } else {
      throw FormatError("unknown estimator method '" + method + "'");
    }
    b.seed = j.at("seed").get<std::uint64_t>();
    b.shots_per_histogram = j.at("shots_per_histogram").get<std::uint64_t>();
    b.total_shots = j.at("total_shots").get<std::uint64_t>();
    b.batch_size = j.at("batch_size").get<std::size_t>();
    b.n_batches = j.at("n_batches").get<std::size_t>();
    if (j.contains("shadow_reference")) {
      b.shadow_reference = Determinant::from_string(j.at("shadow_reference").get<std::string>());
      b.shadow_groups = j.at("shadow_groups").get<std::size_t>();
    }
    b.S_cq_hat = matrix_from_json(j.at("S_cq_hat"));
    b.H_cq_hat = matrix_from_json(j.at("H_cq_hat"));
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("estimated block: ") + e.what());
  }
}

}  // namespace canoe
