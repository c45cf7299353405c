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
#include "canoe/gensolver.hpp"
#include "canoe/subspace.hpp"
#include "oracles.hpp"

using namespace canoe;

namespace {

Eigen::MatrixXcd random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (auto& x : a.reshaped()) x = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

Eigen::MatrixXcd random_spd(Eigen::Index n, std::mt19937_64& rng, double shift = 1.0) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (auto& x : a.reshaped()) x = Complex(g(rng), g(rng));
  return a * a.adjoint() / static_cast<double>(n) + shift * Eigen::MatrixXcd::Identity(n, n);
}

// Pair from real Krylov-like vectors on a small full space.
struct Problem {
  BlockMatrices pair;
  oracle::Mat h;
  oracle::Mat s;
};

Problem exact_problem(int n, int n_c, int n_q, std::uint64_t seed, bool duplicate_hf = true) {
  std::mt19937_64 rng(seed);
  const auto terms = oracle::random_hamiltonian(n, 3 * n, rng);
  const auto h = parse_hamiltonian(oracle::text(terms));
  auto space = std::make_shared<RestrictedSpace>(RestrictedSpace::full(n));
  const auto ranked = rank_determinants(h, *space);
  std::vector<Determinant> cls(ranked.begin(), ranked.begin() + n_c);
  KrylovConfig kc;
  kc.tau = default_tau(h);
  kc.n_states = n_q;
  kc.reference = duplicate_hf ? cls.front() : ranked.back();
  auto q = n_q > 0 ? krylov_states(h, *space, kc) : std::vector<SparseState>{};
  BlockMatrices b = build_exact_blocks(h, HybridBasis(cls, q, space));
  b.hermitize();
  return {b, b.dense_H(), b.dense_S()};
}

BlockMatrices pair_from_dense(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& s, Eigen::Index nc) {
  const Eigen::Index nq = h.rows() - nc;
  BlockMatrices b;
  b.H_cc = h.topLeftCorner(nc, nc).sparseView();
  b.H_cq = h.topRightCorner(nc, nq);
  b.H_qq = h.bottomRightCorner(nq, nq);
  b.S_cq = s.topRightCorner(nc, nq);
  b.S_qq = s.bottomRightCorner(nq, nq);
  return b;
}

}  // namespace

TEST(Lobpcg, DiagonalProblem) {
  const Eigen::VectorXcd d = Eigen::Vector3cd(1.0, 2.0, 3.0);
  const LinearMap a = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return d.cwiseProduct(x); };
  const LinearMap id = [](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return x; };
  const auto r = lobpcg(a, id, LinearMap{}, Eigen::Vector3cd(1.0, 1.0, 1.0), 1e-10, 100);
  EXPECT_EQ(r.status, LobpcgStatus::converged);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(r.vector(0)) / r.vector.norm(), 1.0, 1e-9);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(Lobpcg, RandomDefinitePairsMatchDenseOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXcd a = random_hermitian(20, rng);
    const Eigen::MatrixXcd b = random_spd(20, rng);
    const LinearMap am = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return a * x; };
    const LinearMap bm = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return b * x; };
    const auto r = lobpcg(am, bm, LinearMap{}, oracle::random_state(20, rng), 1e-11, 500);
    ASSERT_EQ(r.status, LobpcgStatus::converged);
    EXPECT_NEAR(r.value, oracle::gev_lowest(a, b), 1e-9);
  }
}

TEST(Lobpcg, ExactInversePreconditionerConvergesQuickly) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXcd b = random_spd(10, rng, 2.0);
  const Eigen::MatrixXcd a = b * Eigen::VectorXd::LinSpaced(10, 1.0, 10.0).cast<Complex>().asDiagonal() * b;
  const Eigen::MatrixXcd binv = b.inverse();
  const LinearMap am = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return a * x; };
  const LinearMap bm = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return b * x; };
  const LinearMap pm = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return binv * x; };
  const auto x0 = oracle::random_state(10, rng);
  const auto pre = lobpcg(am, bm, pm, x0, 1e-8, 300);
  const auto plain = lobpcg(am, bm, LinearMap{}, x0, 1e-8, 300);
  ASSERT_EQ(pre.status, LobpcgStatus::converged);
  EXPECT_NEAR(pre.value, oracle::gev_lowest(a, b), 1e-9);
  EXPECT_LE(pre.iterations, plain.iterations);
}

TEST(Lobpcg, IndefiniteMetricIsReported) {
  const Eigen::MatrixXcd b = Eigen::Vector2cd(1.0, -1.0).asDiagonal();
  const LinearMap am = [](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return x; };
  const LinearMap bm = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return b * x; };
  const auto r = lobpcg(am, bm, LinearMap{}, Eigen::Vector2cd(0.0, 1.0), 1e-10, 50);
  EXPECT_EQ(r.status, LobpcgStatus::indefinite);
}

TEST(Lobpcg, ZeroStartIsABreakdown) {
  const LinearMap id = [](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return x; };
  EXPECT_THROW(lobpcg(id, id, LinearMap{}, Eigen::Vector2cd::Zero(), 1e-10, 10), BreakdownError);
}

TEST(Schur, ZeroCouplingGivesQuantumOverlapSpectrum) {
  std::mt19937_64 rng(3);
  BlockMatrices b;
  b.H_cc = Eigen::MatrixXcd::Identity(2, 2).sparseView();
  b.S_cq = Eigen::MatrixXcd::Zero(2, 3);
  b.H_cq = Eigen::MatrixXcd::Zero(2, 3);
  b.S_qq = random_spd(3, rng);
  b.H_qq = random_hermitian(3, rng);
  const auto spec = schur_complement(b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(b.S_qq);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(spec.eigvals(i), eig.eigenvalues()(2 - i), 1e-12);
  EXPECT_GE(spec.eigvals(0), spec.eigvals(2));
}

TEST(Schur, RandomCaseMatchesDenseOracle) {
  std::mt19937_64 rng(4);
  BlockMatrices b;
  b.H_cc = Eigen::MatrixXcd::Identity(3, 3).sparseView();
  b.S_cq = 0.3 * random_hermitian(3, rng);
  b.H_cq = random_hermitian(3, rng);
  b.S_qq = random_spd(3, rng);
  b.H_qq = random_hermitian(3, rng);
  const auto spec = schur_complement(b);
  const Eigen::MatrixXcd m = b.S_qq - b.S_cq.adjoint() * b.S_cq;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(spec.eigvals(i), eig.eigenvalues()(2 - i), 1e-12);
    const Eigen::VectorXcd v = spec.eigvecs.col(i);
    EXPECT_LT((m * v - spec.eigvals(i) * v).norm(), 1e-12);
  }
}

TEST(Schur, DuplicatedReferenceHasOneNullDirection) {
  const Problem p = exact_problem(4, 3, 3, 7, true);
  const auto spec = schur_complement(p.pair);
  int zeros = 0;
  for (Eigen::Index i = 0; i < spec.eigvals.size(); ++i) zeros += std::abs(spec.eigvals(i)) < 1e-12 ? 1 : 0;
  EXPECT_EQ(zeros, 1);
}

TEST(Schur, NonFiniteInputIsADataError) {
  Problem p = exact_problem(2, 2, 1, 1);
  p.pair.S_qq(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(schur_complement(p.pair), DataError);
  EXPECT_THROW(solve(p.pair, SolverConfig{}, 0), DataError);
}

TEST(Solve, ClassicalOnlyIsStandardEigenproblem) {
  const Problem p = exact_problem(3, 5, 0, 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(p.h);
  for (SolverMode mode : {SolverMode::plain, SolverMode::pseudo_inverse, SolverMode::deflation}) {
    SolverConfig cfg;
    cfg.mode = mode;
    const auto out = solve(p.pair, cfg, 1);
    EXPECT_NEAR(out.energy, eig.eigenvalues()(0), 1e-10);
    EXPECT_EQ(out.classical_weight, 1.0);
  }
}

TEST(Solve, AllModesMatchDenseOracleOnTwoQubitFullBasis) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem p = exact_problem(2, 3, 2, seed, false);
    const double ref = oracle::gev_lowest(p.h, p.s);
    for (SolverMode mode : {SolverMode::plain, SolverMode::pseudo_inverse, SolverMode::deflation}) {
      SolverConfig cfg;
      cfg.mode = mode;
      cfg.rank_tol = 1e-10;
      const auto out = solve(p.pair, cfg, seed);
      EXPECT_NEAR(out.energy, ref, 1e-9) << to_string(mode) << " seed " << seed;
    }
  }
}

TEST(Solve, DeflationDropsPlantedSmallDirection) {
  std::mt19937_64 rng(5);
  const Eigen::Index nc = 4;
  const Eigen::Index nq = 3;
  // Quantum overlap with known Schur spectrum {1, 0.5, 1e-6}: U = 0 makes S_schur = S_qq.
  Eigen::MatrixXcd v = Eigen::HouseholderQR<Eigen::MatrixXcd>(random_hermitian(nq, rng)).householderQ();
  const Eigen::MatrixXcd sqq = v * Eigen::Vector3d(1.0, 0.5, 1e-6).cast<Complex>().asDiagonal() * v.adjoint();
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(nc + nq, nc + nq);
  s.bottomRightCorner(nq, nq) = sqq;
  s.topRightCorner(nc, nq).setZero();
  s.bottomLeftCorner(nq, nc).setZero();
  const Eigen::MatrixXcd h = random_hermitian(nc + nq, rng);
  const BlockMatrices pair = pair_from_dense(h, s, nc);
  SolverConfig cfg;
  cfg.mode = SolverMode::deflation;
  cfg.rank_tol = 1e-2;
  const auto out = solve(pair, cfg, 3);
  EXPECT_EQ(out.n_discarded, 1);
  EXPECT_EQ(out.retained.size(), 2u);
  // Oracle on the retained subspace: classical block plus the two large directions.
  Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(nc + nq, nc + 2);
  basis.topLeftCorner(nc, nc).setIdentity();
  basis.bottomRightCorner(nq, 2) = v.leftCols(2);
  EXPECT_NEAR(out.energy, oracle::gev_lowest(basis.adjoint() * h * basis, basis.adjoint() * s * basis), 1e-9);
}

TEST(Solve, DeflationOnExactPairMatchesPlainAndLiftedVectorSolvesFullPair) {
  const Problem p = exact_problem(3, 3, 3, 11, true);
  SolverConfig plain;
  plain.mode = SolverMode::plain;
  SolverConfig defl;
  defl.mode = SolverMode::deflation;
  defl.rank_tol = 1e-12;
  const auto a = solve(p.pair, plain, 2);
  const auto b = solve(p.pair, defl, 2);
  EXPECT_NEAR(a.energy, oracle::gev_lowest(p.h, p.s), 1e-8);
  EXPECT_NEAR(b.energy, a.energy, 1e-8);
  Eigen::VectorXcd c(p.h.rows());
  c << b.classical, b.quantum;
  EXPECT_LT((p.h * c - b.energy * p.s * c).norm(), 1e-6);
}

TEST(Solve, AllTruncatedFallsBackToClassicalSolve) {
  const Problem p = exact_problem(2, 2, 1, 8, true);
  SolverConfig cfg;
  cfg.mode = SolverMode::deflation;
  cfg.rank_tol = 1e-6;
  const auto out = solve(p.pair, cfg, 1);
  ASSERT_TRUE(out.all_truncated);
  EXPECT_EQ(out.n_discarded, 1);
  const auto cls = solve(p.pair.truncated(2, 0), SolverConfig{}, 1);
  EXPECT_NEAR(out.energy, cls.energy, 1e-12);
}

TEST(Solve, RejectsNonHermitianPairs) {
  Problem p = exact_problem(2, 2, 2, 9, false);
  p.pair.H_qq(0, 1) += 1e-6;
  EXPECT_THROW(solve(p.pair, SolverConfig{}, 0), ContractError);
}

TEST(Solve, RestartsNeverWorsenTheEnergy) {
  const Problem p = exact_problem(3, 4, 3, 13, false);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 4; ++k) {
    SolverConfig cfg;
    cfg.mode = SolverMode::plain;
    cfg.n_restarts = k;
    cfg.maxiter = 5;  // force unconverged runs so restarts matter
    const auto out = solve(p.pair, cfg, 21);
    if (out.converged) {
      EXPECT_LE(out.energy, prev + 1e-12);
      prev = out.energy;
    }
  }
}

TEST(Solve, SeedDeterminism) {
  const Problem p = exact_problem(3, 3, 2, 14, false);
  const auto a = solve(p.pair, SolverConfig{}, 5);
  const auto b = solve(p.pair, SolverConfig{}, 5);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(SolverMode, StringRoundTrip) {
  for (SolverMode m : {SolverMode::plain, SolverMode::pseudo_inverse, SolverMode::deflation})
    EXPECT_EQ(solver_mode_from_string(to_string(m)), m);
  EXPECT_THROW(solver_mode_from_string("bogus"), ConfigError);
}

TEST(Conditioning, IdentityAndDuplicateRow) {
  BlockMatrices id;
  id.H_cc = Eigen::MatrixXcd::Identity(2, 2).sparseView();
  id.S_cq = Eigen::MatrixXcd::Zero(2, 2);
  id.H_cq = Eigen::MatrixXcd::Zero(2, 2);
  id.S_qq = Eigen::MatrixXcd::Identity(2, 2);
  id.H_qq = Eigen::MatrixXcd::Zero(2, 2);
  EXPECT_NEAR(conditioning_metric(id), 1.0, 1e-14);
  const Problem dup = exact_problem(3, 3, 2, 15, true);
  EXPECT_TRUE(std::isinf(conditioning_metric(dup.pair)));
}

TEST(Conditioning, MatchesDenseSmallestEigenvalue) {
  const Problem p = exact_problem(3, 3, 3, 16, false);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(p.s);
  EXPECT_NEAR(conditioning_metric(p.pair) * std::abs(eig.eigenvalues()(0)), 1.0, 1e-8);
}

TEST(OverlapModes, ValuesAndUnitMultiplicityReproduceFullSpectrum) {
  const Problem p = exact_problem(3, 5, 2, 17, false);
  const auto modes = overlap_modes(p.pair);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(p.s);
  std::vector<double> got(modes.values.data(), modes.values.data() + modes.values.size());
  for (Eigen::Index i = 0; i < modes.unit_multiplicity; ++i) got.push_back(1.0);
  std::sort(got.begin(), got.end());
  ASSERT_EQ(static_cast<Eigen::Index>(got.size()), p.s.rows());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], eig.eigenvalues()(static_cast<Eigen::Index>(i)), 1e-12);
  for (Eigen::Index i = 0; i < modes.values.size(); ++i) {
    const Eigen::VectorXcd v = modes.vectors.col(i);
    EXPECT_LT((p.s * v - modes.values(i) * v).norm(), 1e-11);
  }
}

TEST(DenseReference, AgreesWithOracle) {
  const Problem p = exact_problem(3, 4, 3, 18, true);
  const auto ref = dense_reference(p.pair);
  EXPECT_NEAR(ref.energy, oracle::gev_lowest(p.h, p.s), 1e-10);
  EXPECT_NEAR(ref.vector.dot(p.s * ref.vector).real(), 1.0, 1e-10);
}

TEST(SolverOutcome, JsonCarriesFlags) {
  const Problem p = exact_problem(2, 2, 1, 8, true);
  const auto out = solve(p.pair, SolverConfig{}, 1);
  const auto j = to_json(out);
  EXPECT_EQ(j.at("all_truncated").get<bool>(), out.all_truncated);
  EXPECT_EQ(j.at("mode").get<std::string>(), "deflation");
}
