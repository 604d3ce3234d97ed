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

#include "gnprep/circuit.hpp"
#include "gnprep/jordan_wigner.hpp"
#include "oracles.hpp"

using namespace gnprep;

namespace {

StateVector bell() {
  StateVector v = StateVector::Zero(4);
  v[0] = v[3] = 1.0 / std::sqrt(2.0);
  return v;
}

void expect_gates_unitary(const CircuitDescription& c) {
  for (const auto& g : c.gates) {
    EXPECT_LE(g.unitarity_residual(), 1e-10);
    for (int q : g.window) {
      EXPECT_GE(q, 0);
      EXPECT_LT(q, c.qubits);
    }
  }
}

}  // namespace

TEST(Circuit, EmptyCircuitIsAllZeros) {
  CircuitDescription c;
  c.qubits = 3;
  const auto psi = simulate_circuit(c);
  EXPECT_EQ(psi[0], cplx(1.0));
  EXPECT_NEAR(psi.norm(), 1.0, 0.0);
}

TEST(Circuit, ProductStateUsesSingleQubitGates) {
  const auto m = MPS::product({1, 0, 0, 1, 1});
  const auto c = compile(m);
  ASSERT_EQ(c.gates.size(), 5u);
  for (const auto& g : c.gates) EXPECT_EQ(g.window.size(), 1u);
  EXPECT_EQ(c.chi, 1);
  EXPECT_NEAR(fidelity(simulate_circuit(c), m.to_statevector()), 1.0, 1e-12);
}

TEST(Circuit, BellPair) {
  const auto m = MPS::from_statevector(bell(), 2);
  const auto c = compile(m);
  ASSERT_EQ(c.gates.size(), 2u);
  EXPECT_EQ(c.gates[0].window.size(), 2u);
  EXPECT_EQ(c.gates[1].window.size(), 1u);
  EXPECT_GE(fidelity(simulate_circuit(c), bell()), 1.0 - 1e-10);
  expect_gates_unitary(c);
}

TEST(Circuit, RandomCorpusRoundTrip) {
  std::mt19937 rng(2026);
  std::uniform_int_distribution<int> un(1, 8), uc(1, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = un(rng), chi = uc(rng);
    const auto m = MPS::random(n, chi, 1000 + trial);
    const auto c = compile(m);
    const auto psi = simulate_circuit(c);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
    EXPECT_GE(fidelity(psi, m.to_statevector()), 1.0 - 1e-9) << n << ' ' << chi;
    expect_gates_unitary(c);
    EXPECT_LE(c.gate_constant(), 2.0);
  }
}

TEST(Circuit, NonPowerOfTwoBondsArePadded) {
  const auto m = MPS::random(6, 3, 77);
  ASSERT_EQ(m.max_bond(), 3);
  const auto c = compile(m);
  EXPECT_GE(fidelity(simulate_circuit(c), m.to_statevector()), 1.0 - 1e-9);
  for (const auto& g : c.gates) EXPECT_LE(g.window.size(), 3u);
}

TEST(Circuit, GateConstantStableAcrossLength) {
  std::vector<double> cs;
  for (int n : {10, 12, 14, 16}) cs.push_back(compile(MPS::random(n, 8, n)).gate_constant());
  const double mean = (cs[0] + cs[1] + cs[2] + cs[3]) / 4;
  for (double c : cs) EXPECT_LT(std::abs(c - mean), 0.2 * mean);
}

TEST(Circuit, CompletionIsDeterministicWithPositiveLeads) {
  const auto m = MPS::random(5, 4, 9);
  const auto a = compile(m), b = compile(m);
  for (std::size_t i = 0; i < a.gates.size(); ++i) EXPECT_EQ(a.gates[i].unitary, b.gates[i].unitary);
  DenseMatrix partial = DenseMatrix::Zero(4, 4);
  partial(1, 0) = 1.0;
  const auto u = complete_unitary(partial, {true, false, false, false});
  for (int c = 1; c < 4; ++c)
    for (int r = 0; r < 4; ++r)
      if (std::abs(u(r, c)) > 1e-12) {
        EXPECT_NEAR(u(r, c).imag(), 0.0, 1e-15);
        EXPECT_GT(u(r, c).real(), 0.0);
        break;
      }
  EXPECT_LE((u.adjoint() * u - DenseMatrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(Circuit, CanonicalizePreservesSchmidtValues) {
  auto m = MPS::random(6, 4, 21);
  const auto before = m.schmidt_values();
  const auto again = canonicalize(canonicalize(m, CanonicalForm::Right), CanonicalForm::Right);
  const auto after = again.schmidt_values();
  for (std::size_t k = 0; k < before.size(); ++k) EXPECT_LT((before[k] - after[k]).norm(), 1e-12);
  EXPECT_NEAR(again.norm(), 1.0, 1e-12);
  EXPECT_LE(again.canonical_residual(), 1e-10);
  EXPECT_NEAR(fidelity(again.to_statevector(), m), 1.0, 1e-10);
}

TEST(Circuit, IsometriesAreIsometric) {
  const auto m = canonicalize(MPS::random(7, 8, 4), CanonicalForm::Right);
  for (const auto& v : isometries(m)) EXPECT_LE(v.residual(), 1e-10);
}

TEST(Circuit, FidelityBasics) {
  StateVector a = StateVector::Zero(4), b = StateVector::Zero(4);
  a[1] = 1.0;
  b[2] = 1.0;
  EXPECT_NEAR(fidelity(a, a), 1.0, 1e-15);
  EXPECT_NEAR(fidelity(a, b), 0.0, 1e-15);
  EXPECT_NEAR(fidelity(bell(), MPS::from_statevector(bell(), 2)), 1.0, 1e-12);
  EXPECT_THROW(fidelity(a, StateVector::Zero(2)), ShapeError);
}

TEST(Circuit, JsonRoundTrip) {
  const auto c = compile(MPS::random(4, 4, 3));
  const auto back = circuit_from_json(nlohmann::json::parse(to_json(c).dump()));
  ASSERT_EQ(back.gates.size(), c.gates.size());
  EXPECT_EQ(back.two_level_count(), c.two_level_count());
  EXPECT_LT((simulate_circuit(back) - simulate_circuit(c)).norm(), 1e-15);
}

TEST(Circuit, LatticeVacuum) {
  LatticeConfig cfg;
  cfg.n = 4;
  cfg.g0 = 0.5;
  DmrgOptions opt;
  opt.chi_max = 8;
  const auto r = dmrg_ground_state(map_hamiltonian(cfg), opt);
  EXPECT_EQ(r.state.max_bond(), 8);
  const auto c = compile(r.state);
  EXPECT_GE(fidelity(simulate_circuit(c), r.state.to_statevector()), 1.0 - 1e-9);
}

TEST(Circuit, TruncationTracksInfidelity) {
  LatticeConfig cfg;
  cfg.n = 4;
  cfg.g0 = 1.0;
  const auto full = dmrg_ground_state(map_hamiltonian(cfg)).state;
  const auto psi = full.to_statevector();
  const auto sv = full.schmidt_values();
  const auto& mid = sv[sv.size() / 2];
  double prev_inf = 2.0, prev_f = 2.0;
  for (int chi = 1; chi <= 16; chi *= 2) {
    const auto cut = MPS::from_statevector(psi, full.sites(), chi);
    const double inf = 1.0 - fidelity(psi, cut);
    const double f = truncation_weight(mid, chi);
    EXPECT_LE(inf, prev_inf + 1e-12);
    EXPECT_LE(f, prev_f);
    EXPECT_EQ(inf < 1e-10, f < 1e-10) << chi;
    prev_inf = inf;
    prev_f = f;
  }
}
