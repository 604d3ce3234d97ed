// Copyright 2026 The gnprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gnprep/exact_engine.hpp"
#include "gnprep/jordan_wigner.hpp"
#include "gnprep/mps.hpp"
#include "oracles.hpp"

using namespace gnprep;

namespace {

SpinOperator random_pauli_sum(int nq, int terms, std::mt19937& rng) {
  std::uniform_int_distribution<int> letter(0, 3);
  std::normal_distribution<double> g;
  SpinOperator h(nq);
  for (int t = 0; t < terms; ++t) {
    std::string s;
    for (int q = 0; q < nq; ++q) s.push_back("IXYZ"[letter(rng)]);
    h.add(PauliString::parse(g(rng), s));
  }
  return h;
}

SpinOperator gn(int n, double g0, int N = 1) {
  LatticeConfig c;
  c.n = n;
  c.N = N;
  c.g0 = g0;
  return map_hamiltonian(c);
}

StateVector random_state(int dim, std::mt19937& rng) {
  std::normal_distribution<double> g;
  StateVector v(dim);
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v.normalized();
}

// Singular values of the statevector reshaped at cut k.
Eigen::VectorXd oracle_schmidt(const StateVector& psi, int n, int k) {
  const Eigen::Index rows = Eigen::Index(1) << (k + 1);
  const Eigen::Index cols = Eigen::Index(1) << (n - k - 1);
  oracle::Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = psi[r * cols + c];
  return Eigen::JacobiSVD<oracle::Mat>(m).singularValues();
}

}  // namespace

TEST(Mps, StatevectorRoundTrip) {
  std::mt19937 rng(1);
  for (int n : {1, 2, 5, 7}) {
    const auto psi = random_state(1 << n, rng);
    const auto m = MPS::from_statevector(psi, n);
    EXPECT_LT((m.to_statevector() - psi).norm(), 1e-12);
    EXPECT_NEAR(m.norm(), 1.0, 1e-12);
  }
}

TEST(Mps, ProductStateBits) {
  const auto m = MPS::product({1, 0, 1});
  const auto v = m.to_statevector();
  EXPECT_EQ(v.size(), 8);
  EXPECT_NEAR(std::abs(v[5]), 1.0, 0.0);
  EXPECT_NEAR(v.norm(), 1.0, 0.0);
  EXPECT_EQ(m.max_bond(), 1);
}

TEST(Mps, RandomIsNormalizedAndCanonical) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto m = MPS::random(6, 4, seed);
    EXPECT_NEAR(m.norm(), 1.0, 1e-10);
    EXPECT_LE(m.canonical_residual(), 1e-10);
    EXPECT_LE(m.max_bond(), 4);
    m.canonicalize(CanonicalForm::Left);
    EXPECT_LE(m.canonical_residual(), 1e-10);
  }
}

TEST(Mps, CanonicalizePreservesState) {
  auto m = MPS::random(5, 3, 9);
  const auto before = m.to_statevector();
  for (auto f : {CanonicalForm::Left, CanonicalForm::Right, CanonicalForm::Left}) {
    m.canonicalize(f);
    EXPECT_LT((m.to_statevector() - before).norm(), 1e-12);
  }
}

TEST(Mps, SchmidtValuesMatchDirectSvd) {
  std::mt19937 rng(4);
  const int n = 6;
  const auto psi = random_state(1 << n, rng);
  const auto m = MPS::from_statevector(psi, n);
  const auto sv = m.schmidt_values();
  ASSERT_EQ(static_cast<int>(sv.size()), n - 1);
  for (int k = 0; k + 1 < n; ++k) {
    const auto ref = oracle_schmidt(psi, n, k);
    ASSERT_EQ(sv[k].size(), ref.size());
    EXPECT_LT((sv[k] - ref).norm(), 1e-12);
    EXPECT_NEAR(sv[k].squaredNorm(), 1.0, 1e-10);
    for (Eigen::Index i = 0; i + 1 < sv[k].size(); ++i) EXPECT_GE(sv[k][i], sv[k][i + 1]);
    EXPECT_GE(sv[k].minCoeff(), 0.0);
  }
}

TEST(Mps, OverlapMatchesStatevector) {
  const auto a = MPS::random(5, 4, 1), b = MPS::random(5, 3, 2);
  EXPECT_LT(std::abs(MPS::overlap(a, b) - a.to_statevector().dot(b.to_statevector())), 1e-12);
}

TEST(Mps, EntropyOfSimpleStates) {
  EXPECT_NEAR(half_chain_entropy(MPS::product({0, 1, 1, 0})), 0.0, 1e-14);
  StateVector bell = StateVector::Zero(4);
  bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(half_chain_entropy(MPS::from_statevector(bell, 2)), std::log(2.0), 1e-12);
}

TEST(Mps, TruncationWeightConventions) {
  StateVector bell = StateVector::Zero(4);
  bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
  const auto m = MPS::from_statevector(bell, 2);
  EXPECT_NEAR(truncation_weight(m, 1), 0.5, 1e-12);
  EXPECT_NEAR(truncation_weight(m, 1, SchmidtConvention::Amplitudes), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_EQ(truncation_weight(m, 2), 0.0);
  EXPECT_EQ(truncation_weight(m, 5, SchmidtConvention::Amplitudes), 0.0);
  EXPECT_THROW(truncation_weight(m, -1), ConfigError);
}

TEST(Mps, BinaryRoundTrip) {
  auto m = MPS::random(5, 4, 3);
  m.schmidt_values();
  std::stringstream ss;
  m.save(ss);
  const auto back = MPS::load(ss);
  EXPECT_EQ(back.bond_dims(), m.bond_dims());
  EXPECT_EQ(back.center(), m.center());
  EXPECT_LT((back.to_statevector() - m.to_statevector()).norm(), 0.0 + 1e-300);
  ASSERT_EQ(back.cached_schmidt().size(), m.cached_schmidt().size());
  for (std::size_t k = 0; k < m.cached_schmidt().size(); ++k)
    EXPECT_EQ(back.cached_schmidt()[k], m.cached_schmidt()[k]);
  std::stringstream bad("not an mps");
  EXPECT_THROW(MPS::load(bad), ConfigError);
}

TEST(Mpo, DenseContractionMatchesPauliSum) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int nq = 1 + trial % 6;
    const auto h = random_pauli_sum(nq, 12, rng);
    EXPECT_LT((build_mpo(h).to_dense() - to_dense(h)).norm(), 1e-12) << nq;
  }
  for (auto h : {gn(2, 0.0), gn(3, 1.0), gn(2, 0.5, 2)})
    EXPECT_LT((build_mpo(h).to_dense() - to_dense(h)).norm(), 1e-11);
}

TEST(Mpo, NearestNeighbourChainHasSmallBond) {
  const int n = 8;
  SpinOperator h(n);
  for (int i = 0; i + 1 < n; ++i)
    for (char c : {'X', 'Y', 'Z'}) {
      std::string s(n, 'I');
      s[i] = s[i + 1] = c;
      h.add(PauliString::parse(1.0, s));
    }
  for (int i = 0; i < n; ++i) h += SpinOperator::single(n, i, Pauli::Z, 0.3);
  EXPECT_LE(build_mpo(h).max_bond(), 5);
}

TEST(Mpo, ExpectationMatchesStatevector) {
  const auto h = gn(3, 0.7);
  const auto m = MPS::random(6, 4, 5);
  const auto v = m.to_statevector();
  const cplx ref = v.dot(to_dense(h) * v);
  EXPECT_LT(std::abs(expectation(m, build_mpo(h)) - ref), 1e-11);
}

TEST(Dmrg, ClassicalPair) {
  SpinOperator zz(2);
  zz.add(PauliString::parse(-1.0, "ZZ"));
  const auto r = dmrg_ground_state(zz);
  EXPECT_NEAR(r.energy, -1.0, 1e-12);
  EXPECT_TRUE(r.converged);
}

TEST(Dmrg, ClassicalPairWithBiasIsProduct) {
  SpinOperator h(2);
  h.add(PauliString::parse(-1.0, "ZZ"));
  h.add(PauliString::parse(-0.1, "ZI"));
  const auto r = dmrg_ground_state(h);
  EXPECT_NEAR(r.energy, -1.1, 1e-12);
  EXPECT_EQ(r.state.max_bond(), 1);
}

TEST(Dmrg, FreeLatticeMatchesExact) {
  const auto h = gn(4, 0.0);
  const double exact = eigensolve(h, 1).energies[0];
  const auto r = dmrg_ground_state(h);
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.energy, exact, 1e-8);
  EXPECT_GE(r.energy, exact - 1e-10);
  EXPECT_LE(r.state.canonical_residual(), 1e-10);
  EXPECT_NEAR(r.state.norm(), 1.0, 1e-10);
}

TEST(Dmrg, InteractingLatticeMatchesExact) {
  const auto h = gn(4, 0.5);
  const double exact = eigensolve(h, 1).energies[0];
  const auto r = dmrg_ground_state(h);
  EXPECT_NEAR(r.energy, exact, 1e-7);
  EXPECT_GE(r.energy, exact - 1e-10);
  for (std::size_t i = 1; i < r.sweep_energies.size(); ++i)
    EXPECT_LE(r.sweep_energies[i], r.sweep_energies[i - 1] + 1e-10);
}

TEST(Dmrg, ReportsNonConvergence) {
  DmrgOptions opt;
  opt.chi_max = 1;
  opt.max_sweeps = 2;
  opt.tol = 1e-15;
  const auto r = dmrg_ground_state(gn(3, 0.5), opt);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.message.empty());
  EXPECT_THROW(dmrg_ground_state(SpinOperator::single(2, 0, Pauli::Z, kI)), NotHermitianError);
}

TEST(Dmrg, TruncationWeightMonotoneOnVacuum) {
  const auto r = dmrg_ground_state(gn(4, 1.0));
  const auto sv = r.state.schmidt_values();
  const auto& mid = sv[sv.size() / 2];
  for (auto conv : {SchmidtConvention::Probabilities, SchmidtConvention::Amplitudes}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int chi = 0; chi <= mid.size() + 1; ++chi) {
      const double f = truncation_weight(mid, chi, conv);
      EXPECT_LE(f, prev);
      prev = f;
    }
    EXPECT_EQ(prev, 0.0);
  }
}

TEST(Scaling, PredictChiExample) {
  ScalingModel m;
  m.ma = 0.01;
  m.k_override = 1.0;
  EXPECT_EQ(predict_chi(m), 3);
}

TEST(Scaling, Exponents) {
  EXPECT_NEAR(chi_exponent(1), 1.0 / 6 + 1 / std::sqrt(3.0), 1e-15);
  ScalingModel m;
  EXPECT_NEAR(-dmrg_cost_model(m, 10).exponent, 3.232, 5e-4);
  m.N = 0;
  EXPECT_DOUBLE_EQ(dmrg_cost_model(m, 10).exponent, -1.0);
  for (int N = 1; N < 8; ++N) EXPECT_GT(chi_exponent(N + 1), chi_exponent(N));
}

TEST(Scaling, CubicCostLaw) {
  ScalingModel m;
  m.ma = 0.01;
  m.k_override = 1.0;  // chi = 3
  ScalingModel m2 = m;
  m2.k_override = 2.0;  // chi = ceil(2 * 2.154) = 5
  const double c1 = dmrg_cost_model(m, 8).cost, c2 = dmrg_cost_model(m2, 8).cost;
  EXPECT_DOUBLE_EQ(c1, 8 * 27.0);
  EXPECT_DOUBLE_EQ(c2, 8 * 125.0);
  ScalingModel big = m;
  big.k_override = 6.0 / std::pow(100.0, 1.0 / 6) - 1e-9;  // chi = 6
  EXPECT_DOUBLE_EQ(dmrg_cost_model(big, 8).cost / dmrg_cost_model(m, 8).cost, 8.0);
}

TEST(Scaling, PredictChiMonotone) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(1e-4, 0.9);
  for (int i = 0; i < 300; ++i) {
    ScalingModel a;
    a.ma = u(rng);
    a.eps = u(rng);
    ScalingModel b = a;
    b.ma = a.ma * 0.5;
    EXPECT_GE(predict_chi(b), predict_chi(a));
    b = a;
    b.eps = a.eps * 0.5;
    EXPECT_GE(predict_chi(b), predict_chi(a));
    EXPECT_GE(predict_chi(a), 1);
  }
}

TEST(Scaling, EntropyFit) {
  std::vector<std::pair<double, double>> runs;
  for (double ma : {0.5, 0.25, 0.125, 0.0625}) runs.emplace_back(ma, 0.3 + std::log(1 / ma) / 6);
  const auto f = entropy_scaling_check(runs);
  EXPECT_NEAR(f.slope, 1.0 / 6, 1e-12);
  EXPECT_NEAR(f.intercept, 0.3, 1e-12);
  EXPECT_LT(f.residual, 1e-12);
  EXPECT_THROW(entropy_scaling_check({{0.5, 0.1}, {0.25, 0.2}}), DegenerateInputError);
  EXPECT_THROW(entropy_scaling_check({{0.5, 0.1}, {0.5, 0.2}, {0.5, 0.3}}), DegenerateInputError);
}
