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


#include <gtest/gtest.h>

#include <random>

#include "canoe/errors.hpp"
#include "canoe/estimators.hpp"
#include "canoe/rng.hpp"
#include "oracles.hpp"

using namespace canoe;

namespace {

SparseState dense_state(int n, const Eigen::VectorXcd& v) {
  std::vector<SparseState::Entry> e;
  for (Eigen::Index i = 0; i < v.size(); ++i) e.push_back({static_cast<std::uint64_t>(i), v(i)});
  return SparseState::from_entries(n, std::move(e), 0.0);
}

struct Toy {
  PauliHamiltonian h;
  std::shared_ptr<const RestrictedSpace> space;
  std::vector<Determinant> cls;
  std::vector<SparseState> q;
};

// Three qubits, full space, two random quantum states, all eight determinants classical.
Toy toy3(std::uint64_t seed, int n_c = 8) {
  std::mt19937_64 rng(seed);
  const auto terms = oracle::random_hamiltonian(3, 8, rng);
  Toy t{parse_hamiltonian(oracle::text(terms)), std::make_shared<RestrictedSpace>(RestrictedSpace::full(3)), {}, {}};
  for (int i = 0; i < n_c; ++i) t.cls.emplace_back(static_cast<std::uint64_t>(i), 3);
  for (int j = 0; j < 2; ++j) t.q.push_back(dense_state(3, oracle::random_state(8, rng)));
  return t;
}

}  // namespace

TEST(Rng, SplitStreamsAreDeterministicAndIndependentOfSiblings) {
  const Rng root(42);
  Rng a = root.split(3);
  Rng b = root.split(3);
  Rng other = root.split(4);
  for (int i = 0; i < 5; ++i) other.uniform();
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.engine()(), b.engine()());
  EXPECT_NE(Rng(42).split(0).engine()(), Rng(42).split(1).engine()());
}

TEST(Rng, MultinomialConservesCount) {
  Rng rng(1);
  const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
  for (int trial = 0; trial < 50; ++trial) {
    const auto draw = rng.multinomial(1000, p);
    std::uint64_t total = 0;
    for (auto d : draw) total += d;
    EXPECT_EQ(total, 1000u);
    EXPECT_EQ(draw[1], 0u);
  }
}

TEST(Histogram, DeterministicStateCollectsEveryShot) {
  const auto s = SparseState::basis(Determinant(5, 3));
  const Histogram h = sample_histogram(s, 1234, 9);
  ASSERT_EQ(h.bins.size(), 1u);
  EXPECT_EQ(h.count(5), 1234.0);
  EXPECT_EQ(h.frequency(5), 1.0);
  EXPECT_EQ(h.total(), 1234.0);
}

TEST(Histogram, CountsSumToShotsAndAreSeedDeterministic) {
  std::mt19937_64 rng(2);
  const auto s = dense_state(4, oracle::random_state(16, rng));
  const Histogram a = sample_histogram(s, 5000, 17);
  const Histogram b = sample_histogram(s, 5000, 17);
  EXPECT_DOUBLE_EQ(a.total(), 5000.0);
  ASSERT_EQ(a.bins.size(), b.bins.size());
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    EXPECT_EQ(a.bins[i].bits, b.bins[i].bits);
    EXPECT_EQ(a.bins[i].count, b.bins[i].count);
    EXPECT_GE(a.frequency(a.bins[i].bits), 0.0);
    EXPECT_LE(a.frequency(a.bins[i].bits), 1.0);
  }
}

TEST(Histogram, RejectsZeroShotsAndUnnormalizedStates) {
  const auto s = SparseState::basis(Determinant(0, 2));
  EXPECT_THROW(sample_histogram(s, 0, 1), ContractError);
  EXPECT_THROW(sample_histogram(s.scaled(1.1), 10, 1), ContractError);
}

TEST(Histogram, EqualSuperpositionStaysWithinBinomialBand) {
  const auto s = SparseState::from_entries(2, {{1, std::sqrt(0.5)}, {2, std::sqrt(0.5)}});
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Histogram h = sample_histogram(s, 1000000, seed);
    inside += std::abs(h.frequency(1) - 0.5) <= 0.002 ? 1 : 0;
  }
  EXPECT_GE(inside, 99);
}

TEST(Histogram, PooledCountsFitTheBornDistribution) {
  std::mt19937_64 rng(3);
  const auto v = oracle::random_state(8, rng);
  const auto s = dense_state(3, v);
  const int seeds = 1000;
  const std::uint64_t shots = 200;
  Eigen::VectorXd observed = Eigen::VectorXd::Zero(8);
  for (int seed = 0; seed < seeds; ++seed) {
    const Histogram h = sample_histogram(s, shots, static_cast<std::uint64_t>(seed));
    for (Eigen::Index k = 0; k < 8; ++k) observed(k) += h.count(static_cast<std::uint64_t>(k));
  }
  double chi2 = 0.0;
  for (Eigen::Index k = 0; k < 8; ++k) {
    const double expected = std::norm(v(k)) * static_cast<double>(shots * seeds);
    chi2 += (observed(k) - expected) * (observed(k) - expected) / expected;
  }
  // 99.9th percentile of chi-square with 7 degrees of freedom.
  EXPECT_LT(chi2, 24.322);
}

TEST(JointHistograms, ExactDistributionsMatchInterferenceFormula) {
  std::mt19937_64 rng(4);
  const auto a = oracle::random_state(4, rng);
  const auto b = oracle::random_state(4, rng);
  const auto h = sample_joint_histograms(dense_state(2, a), dense_state(2, b), kExactShots, 0);
  for (Eigen::Index s = 0; s < 4; ++s) {
    EXPECT_NEAR(h.real.frequency(static_cast<std::uint64_t>(s)), 0.25 * std::norm(a(s) + b(s)), 1e-14);
    EXPECT_NEAR(h.imag.frequency(static_cast<std::uint64_t>(s)), 0.25 * std::norm(a(s) + Complex(0, 1) * b(s)), 1e-14);
  }
  EXPECT_NEAR(h.real.total(), 1.0, 1e-14);
}

TEST(JointHistograms, IdenticalStatesInterfereConstructively) {
  std::mt19937_64 rng(5);
  const auto v = oracle::random_state(8, rng);
  const auto h = sample_joint_histograms(dense_state(3, v), dense_state(3, v), kExactShots, 0);
  for (Eigen::Index s = 0; s < 8; ++s) EXPECT_NEAR(h.real.frequency(static_cast<std::uint64_t>(s)), std::norm(v(s)), 1e-14);
}

TEST(JointHistograms, DisjointSupportGivesQuarterBeta) {
  const auto phi = SparseState::basis(Determinant(0, 2));
  const auto chi = SparseState::from_entries(2, {{1, std::sqrt(0.5)}, {2, std::sqrt(0.5)}});
  const auto h = sample_joint_histograms(phi, chi, kExactShots, 0);
  EXPECT_NEAR(h.real.frequency(1), 0.125, 1e-15);
  EXPECT_NEAR(h.imag.frequency(1), 0.125, 1e-15);
}

TEST(JointHistograms, SampledCountsIncludeDiscardedBranch) {
  std::mt19937_64 rng(6);
  const auto a = dense_state(3, oracle::random_state(8, rng));
  const auto b = dense_state(3, oracle::random_state(8, rng));
  const auto h = sample_joint_histograms(a, b, 777, 3);
  EXPECT_DOUBLE_EQ(h.real.total(), 777.0);
  EXPECT_DOUBLE_EQ(h.imag.total(), 777.0);
}

TEST(BatchPlan, PartitionsWithShortLastBatch) {
  const auto plan = BatchPlan::make(10, 4);
  ASSERT_EQ(plan.n_batches(), 3u);
  EXPECT_EQ(plan.batches[2].size(), 2u);
  std::size_t next = 0;
  for (const auto& b : plan.batches)
    for (std::size_t i : b) EXPECT_EQ(i, next++);
  EXPECT_EQ(BatchPlan::make(10, 5000).n_batches(), 1u);
  EXPECT_THROW(BatchPlan::make(3, 0), ContractError);
}

TEST(BatchPlan, BatchStateHasUniformAmplitudes) {
  std::vector<Determinant> cls;
  for (int i = 0; i < 5; ++i) cls.emplace_back(static_cast<std::uint64_t>(i), 3);
  const auto plan = BatchPlan::make(5, 3);
  const auto last = batch_state(cls, plan, 1);
  EXPECT_EQ(last.size(), 2u);
  EXPECT_NEAR(std::abs(last.amplitude(Determinant(4, 3)) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(batch_state(cls, plan, 0).norm(), 1.0, 1e-15);
}

TEST(EstimateAlpha, ExactHistogramsRecoverAmplitudes) {
  std::mt19937_64 rng(7);
  const auto v = oracle::random_state(8, rng);
  const auto phi = dense_state(3, v);
  std::vector<Determinant> cls;
  for (int i = 0; i < 8; ++i) cls.emplace_back(static_cast<std::uint64_t>(i), 3);
  for (std::size_t m : {1u, 3u, 8u}) {
    const auto plan = BatchPlan::make(8, m);
    for (std::size_t k = 0; k < plan.n_batches(); ++k) {
      const auto j = sample_joint_histograms(phi, batch_state(cls, plan, k), kExactShots, 0);
      for (const auto& a : estimate_alpha(exact_histogram(phi), j.real, j.imag, plan, k, cls)) {
        EXPECT_LT(std::abs(a.value - v(static_cast<Eigen::Index>(a.det.bits()))), 1e-12) << "m=" << m;
      }
    }
  }
}

TEST(EstimateAlpha, ZeroAmplitudeGivesZero) {
  const auto phi = SparseState::basis(Determinant(0, 2));
  const std::vector<Determinant> cls{Determinant(3, 2)};
  const auto plan = BatchPlan::make(1, 1);
  const auto j = sample_joint_histograms(phi, batch_state(cls, plan, 0), kExactShots, 0);
  const auto a = estimate_alpha(exact_histogram(phi), j.real, j.imag, plan, 0, cls);
  EXPECT_LT(std::abs(a.front().value), 1e-15);
}

TEST(EstimateAlpha, RejectsSwappedSlots) {
  const auto phi = SparseState::basis(Determinant(0, 2));
  const std::vector<Determinant> cls{Determinant(0, 2)};
  const auto plan = BatchPlan::make(1, 1);
  const auto j = sample_joint_histograms(phi, batch_state(cls, plan, 0), kExactShots, 0);
  EXPECT_THROW(estimate_alpha(j.real, j.real, j.imag, plan, 0, cls), ContractError);
  EXPECT_THROW(estimate_alpha(exact_histogram(phi), j.real, j.imag, plan, 1, cls), ContractError);
}

TEST(EstimateCqBlock, ExactLimitReproducesExactBlocksOnFullSupport) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Toy t = toy3(seed);
    const HybridBasis basis(t.cls, t.q, t.space);
    const BlockMatrices ex = build_exact_blocks(t.h, basis);
    for (std::size_t m : {2u, 5u, 8u}) {
      const auto est = estimate_cq_block(t.h, basis, BatchPlan::make(8, m), kExactShots, 0);
      EXPECT_LT((est.S_cq_hat - ex.S_cq).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((est.H_cq_hat - ex.H_cq).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(EstimateCqBlock, ShotAccounting) {
  const Toy t = toy3(1);
  const HybridBasis basis(t.cls, t.q, t.space);
  const auto single = estimate_cq_block(t.h, basis, BatchPlan::make(8, 8), 100, 1);
  EXPECT_EQ(single.n_batches, 1u);
  EXPECT_EQ(single.total_shots, 3u * 2u * 100u);
  const auto three = estimate_cq_block(t.h, basis, BatchPlan::make(8, 3), 100, 1);
  EXPECT_EQ(three.total_shots, 2u * (1u + 2u * 3u) * 100u);
  EXPECT_THROW(estimate_cq_block(t.h, basis, BatchPlan::make(7, 3), 100, 1), ContractError);
}

TEST(EstimateCqBlock, SameSeedSameBlockDifferentSeedDifferentBlock) {
  const Toy t = toy3(2);
  const HybridBasis basis(t.cls, t.q, t.space);
  const auto plan = BatchPlan::make(8, 4);
  const auto a = estimate_cq_block(t.h, basis, plan, 1000, 5);
  const auto b = estimate_cq_block(t.h, basis, plan, 1000, 5);
  const auto c = estimate_cq_block(t.h, basis, plan, 1000, 6);
  EXPECT_EQ((a.S_cq_hat - b.S_cq_hat).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((a.S_cq_hat - c.S_cq_hat).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Shadow, SingleQubitBasisStateInLargeSampleLimit) {
  const auto h = parse_hamiltonian("1 0 Z\n");
  auto space = std::make_shared<RestrictedSpace>(RestrictedSpace::full(1));
  const HybridBasis basis({Determinant(1, 1)}, {SparseState::basis(Determinant(1, 1))}, space);
  const auto est = shadow_estimate_cq_block(h, basis, 2000000, 3);
  EXPECT_EQ(est.shadow_reference->bits(), 0u);
  EXPECT_NEAR(est.S_cq_hat(0, 0).real(), 1.0, 1e-2);
  EXPECT_NEAR(est.S_cq_hat(0, 0).imag(), 0.0, 1e-2);
  EXPECT_EQ(est.total_shots, 2000000u);
}

TEST(Shadow, TwoQubitOverlapsAreUnbiased) {
  std::mt19937_64 rng(8);
  Eigen::VectorXcd v = oracle::random_state(4, rng);
  v(0) = 0.0;
  v.normalize();
  const auto h = parse_hamiltonian("1 0 ZZ\n");
  auto space = std::make_shared<RestrictedSpace>(RestrictedSpace::full(2));
  const HybridBasis basis({Determinant(1, 2), Determinant(2, 2), Determinant(3, 2)}, {dense_state(2, v)}, space);
  // Per-snapshot estimator is bounded by 2 * 3^2 in magnitude; use the empirical spread across seeds.
  const int seeds = 40;
  const std::uint64_t snaps = 100000;
  std::vector<Eigen::VectorXcd> draws;
  for (int s = 0; s < seeds; ++s) draws.push_back(shadow_estimate_cq_block(h, basis, snaps, static_cast<std::uint64_t>(s)).S_cq_hat.col(0));
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (int part = 0; part < 2; ++part) {
      double mean = 0.0, sq = 0.0;
      for (const auto& d : draws) {
        const double x = part ? d(i).imag() : d(i).real();
        mean += x;
        sq += x * x;
      }
      mean /= seeds;
      const double sd = std::sqrt(std::max(sq / seeds - mean * mean, 0.0));
      const double exact = part ? v(i + 1).imag() : v(i + 1).real();
      EXPECT_LT(std::abs(mean - exact), 3.0 * sd / std::sqrt(double(seeds)) + 1e-3) << i << "," << part;
    }
  }
}

TEST(Shadow, ReferenceRules) {
  const auto h = parse_hamiltonian("1 0 ZZ\n");
  auto space = std::make_shared<RestrictedSpace>(RestrictedSpace::full(2));
  const auto phi = SparseState::from_entries(2, {{0, std::sqrt(0.5)}, {1, std::sqrt(0.5)}});
  const HybridBasis basis({Determinant(1, 2)}, {phi}, space);
  EXPECT_EQ(choose_shadow_reference(basis).bits(), 2u);
  ShadowOptions bad;
  bad.reference = Determinant(0, 2);
  EXPECT_THROW(shadow_estimate_cq_block(h, basis, 100, 1, bad), ContractError);
  ShadowOptions zero_groups;
  zero_groups.groups = 0;
  EXPECT_THROW(shadow_estimate_cq_block(h, basis, 100, 1, zero_groups), ContractError);
  const std::string wide(kShadowQubitLimit + 1, 'Z');
  const auto hw = parse_hamiltonian("1 0 " + wide + "\n");
  auto sw = std::make_shared<RestrictedSpace>(RestrictedSpace::particle_sector(kShadowQubitLimit + 1, 1));
  const HybridBasis bw({sw->dets()[0]}, {SparseState::basis(sw->dets()[1])}, sw);
  EXPECT_THROW(shadow_estimate_cq_block(hw, bw, 10, 1), SizeLimitError);
}

TEST(Shadow, MedianOfMeansIsSeedDeterministic) {
  const Toy t = toy3(4, 5);
  std::vector<SparseState> q;
  for (const auto& s : t.q) {
    std::vector<SparseState::Entry> e;
    for (const auto& x : s.entries())
      if (x.bits != 7) e.push_back(x);
    q.push_back(SparseState::from_entries(3, e, 0.0).normalized());
  }
  const HybridBasis basis(t.cls, q, t.space);
  ShadowOptions o;
  o.reference = Determinant(7, 3);
  o.groups = 5;
  const auto a = shadow_estimate_cq_block(t.h, basis, 5000, 11, o);
  const auto b = shadow_estimate_cq_block(t.h, basis, 5000, 11, o);
  EXPECT_EQ((a.S_cq_hat - b.S_cq_hat).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.shadow_groups, 5u);
}

TEST(InjectQQ, ReplacesOnlyCrossBlockAndHermitizes) {
  const Toy t = toy3(5);
  const HybridBasis basis(t.cls, t.q, t.space);
  const BlockMatrices ex = build_exact_blocks(t.h, basis);
  auto est = estimate_cq_block(t.h, basis, BatchPlan::make(8, 8), 500, 3);
  const BlockMatrices pair = inject_qq(est, ex);
  EXPECT_EQ((pair.S_cq - est.S_cq_hat).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((pair.H_qq - ex.H_qq).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(pair.hermiticity_defect(), 1e-15);
  est.S_cq_hat.resize(3, 2);
  EXPECT_THROW(inject_qq(est, ex), ContractError);
}

TEST(EstimatedBlock, JsonRoundTrip) {
  const Toy t = toy3(6);
  const HybridBasis basis(t.cls, t.q, t.space);
  const auto est = estimate_cq_block(t.h, basis, BatchPlan::make(8, 3), 300, 9);
  const auto back = estimated_block_from_json(nlohmann::json::parse(to_json(est).dump()));
  EXPECT_EQ((back.S_cq_hat - est.S_cq_hat).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((back.H_cq_hat - est.H_cq_hat).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(back.total_shots, est.total_shots);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_THROW(matrix_from_json(nlohmann::json::parse("[[[1,2]],[[1]]]")), FormatError);
}

TEST(HadamardCost, ClosedForm) {
  EXPECT_DOUBLE_EQ(hadamard_cost_model(1, 1.0, 1, 1, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(hadamard_cost_model(3, 2.0, 4, 5, 0.5), 2.0 * 4 * 5 * 3 * 4.0 / 0.25);
}
