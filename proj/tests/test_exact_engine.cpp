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

#include <sstream>

#include "gnprep/exact_engine.hpp"
#include "gnprep/jordan_wigner.hpp"
#include "oracles.hpp"

using namespace gnprep;

namespace {

LatticeConfig free_lattice(int n, double r = 1.0, double m0 = 1.0) {
  LatticeConfig c;
  c.n = n;
  c.m0 = m0;
  c.r = r;
  return c;
}

// Two-level system with splitting omega: |0> at -omega/2, |1> at +omega/2.
SpinOperator two_level(double omega) { return SpinOperator::single(1, 0, Pauli::Z, -0.5 * omega); }
SpinOperator flip() { return SpinOperator::single(1, 0, Pauli::X); }

StateVector basis(int dim, int i) {
  StateVector v = StateVector::Zero(dim);
  v[i] = 1.0;
  return v;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST(Eigensolve, SingleQubitZ) {
  const auto s = eigensolve(SpinOperator::single(1, 0, Pauli::Z), 2);
  ASSERT_EQ(s.size(), 2);
  EXPECT_NEAR(s.energies[0], -1.0, 1e-15);
  EXPECT_NEAR(s.energies[1], 1.0, 1e-15);
  EXPECT_NEAR(s.gap(), 2.0, 1e-15);
  EXPECT_NEAR(s.omega(1, 0), 2.0, 1e-15);
}

TEST(Eigensolve, FreeTheoryMatchesFourierOracle) {
  for (int n : {2, 3, 4, 6}) {
    const auto cfg = free_lattice(n, 0.5);
    const auto s = eigensolve(map_hamiltonian(cfg), 0);
    const auto ref = oracle::free_spectrum(n, 1, 1.0, 1.0, 0.5);
    ASSERT_EQ(static_cast<std::size_t>(s.size()), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
      ASSERT_NEAR(s.energies[static_cast<Eigen::Index>(i)], ref[i], 1e-9 * std::max(1.0, std::abs(ref[i])));
  }
}

TEST(Eigensolve, DegenerateMomentumPairs) {
  const auto s = eigensolve(map_hamiltonian(free_lattice(4)), 8);
  // levels 1 and 2 are the +-p single-particle states
  EXPECT_LE(std::abs(s.energies[2] - s.energies[1]), 1e-10);
  EXPECT_GT(s.energies[1] - s.energies[0], 0.5);
}

TEST(Eigensolve, ResidualsAndOrthonormality) {
  LatticeConfig cfg = free_lattice(3);
  cfg.g0 = 0.7;
  const auto h = map_hamiltonian(cfg);
  const auto s = eigensolve(h, 10);
  EXPECT_LE(max_residual(h, s), 1e-8 * h.coefficient_norm());
  const DenseMatrix gram = s.vectors.adjoint() * s.vectors;
  EXPECT_LE((gram - DenseMatrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
  for (int i = 1; i < s.size(); ++i) EXPECT_LE(s.energies[i - 1], s.energies[i]);
}

TEST(Eigensolve, LanczosAgreesWithDense) {
  LatticeConfig cfg = free_lattice(3);
  cfg.g0 = 0.5;
  const auto h = map_hamiltonian(cfg);
  EigensolveOptions opt;
  opt.force_sparse = true;
  const auto sparse = eigensolve(h, 6, opt);
  const auto dense = eigensolve(h, 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(sparse.energies[i], dense.energies[i], 1e-9);
  EXPECT_LE(max_residual(h, sparse), 1e-8 * h.coefficient_norm());
}

TEST(Eigensolve, LanczosAboveDenseLimit) {
  const auto cfg = free_lattice(7);
  const auto h = map_hamiltonian(cfg);
  const auto s = eigensolve(h, 3);
  const auto ref = oracle::free_spectrum(7, 1, 1.0, 1.0, 1.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.energies[i], ref[static_cast<std::size_t>(i)], 1e-9);
  EXPECT_LE(std::abs(s.energies[2] - s.energies[1]), 1e-9);
}

TEST(Eigensolve, Errors) {
  SpinOperator nh(2);
  nh.add(PauliString::parse(kI, "XY"));
  EXPECT_THROW(eigensolve(nh, 1), NotHermitianError);
  EigensolveOptions opt;
  opt.qubit_cap = 4;
  EXPECT_THROW(eigensolve(SpinOperator::identity(5), 1, opt), ResourceError);
  DenseMatrix bad = DenseMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  EXPECT_THROW(eigensolve_dense(bad), NotHermitianError);
}

TEST(Eigensolve, BlocksFollowNumberSectors) {
  const auto h = to_dense(map_hamiltonian(free_lattice(2)));
  const auto blocks = matrix_blocks(h);
  EXPECT_GE(blocks.size(), 5u);  // particle-number sectors 0..4 at least
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  EXPECT_EQ(total, 16u);
}

TEST(Detuning, HandEnumeratedExamples) {
  Eigen::VectorXd e(3);
  e << 0.0, 1.0, 2.5;
  EXPECT_NEAR(detuning(e, 1.0, 2), 0.5, 1e-15);
  e << 0.0, 1.0, 2.9;
  EXPECT_NEAR(detuning(e, 1.0, 2), 0.9, 1e-15);
  Eigen::VectorXd h(4);
  h << 0.0, 1.0, 2.0, 3.0;
  EXPECT_THROW(detuning(h, 1.0, 2), ResonanceCollisionError);
  EXPECT_THROW(detuning(e, 1.0, 3), ShapeError);
}

TEST(Detuning, ShiftInvariant) {
  Eigen::VectorXd e(5);
  e << -1.25, 0.5, 0.625, 2.0, 3.375;
  for (double c : {0.25, -4.0, 16.0}) {
    Eigen::VectorXd s = e.array() + c;
    EXPECT_EQ(detuning(s, 1.375, 2), detuning(e, 1.375, 2));
  }
  Spectrum sp;
  sp.energies = e;
  EXPECT_NEAR(detuning(sp.shifted(0.3), 1.4, 2), detuning(sp, 1.4, 2), 1e-14);
}

TEST(Detuning, CoupledVariantIgnoresDarkLevels) {
  Eigen::VectorXd e(4);
  e << 0.0, 1.0, 2.0, 2.7;
  DenseMatrix w = DenseMatrix::Zero(4, 4);
  w(0, 1) = w(1, 0) = 1.0;
  w(1, 3) = w(3, 1) = 0.5;
  EXPECT_THROW(detuning(e, 1.0, 2), ResonanceCollisionError);
  EXPECT_NEAR(coupled_detuning(e, w, 1.0, 2), 0.7, 1e-14);
}

TEST(EvolveDriven, ZeroDriveStaysInGroundState) {
  const auto h0 = map_hamiltonian(free_lattice(2));
  const auto w = SpinOperator::single(4, 1, Pauli::X);
  const auto r = evolve_driven(h0, w, 0.0, 1.0, uniform_grid(20.0, 11));
  for (const auto& ov : r.overlaps) EXPECT_NEAR(ov[0], 1.0, 1e-9);
}

TEST(EvolveDriven, ResonantTwoLevelMeetsRabiBound) {
  const double omega = 1.0, lambda = 0.02;
  const double t = M_PI / lambda;
  const auto r = evolve_driven(two_level(omega), flip(), lambda, omega, {0.0, t}, {basis(2, 1)}, basis(2, 0));
  const double amp = std::sqrt(r.overlaps.back()[0]);
  EXPECT_GE(amp, 1.0 - (lambda / omega) * (lambda / omega) / std::sqrt(3.0));
}

TEST(EvolveDriven, NormConservedOverLongDrive) {
  const double lambda = 0.05;
  const auto r = evolve_driven(two_level(1.0), flip(), lambda, 1.0, uniform_grid(10 * M_PI / lambda, 41), {basis(2, 1)},
                               basis(2, 0));
  for (double nrm : r.norms) EXPECT_NEAR(nrm, 1.0, 1e-8);
  EXPECT_TRUE(r.within_budget() || r.error_estimate < 1e-3);
}

TEST(EvolveDriven, FrameStaysOrthonormal) {
  LatticeConfig cfg = free_lattice(2);
  const auto h0 = to_sparse(map_hamiltonian(cfg));
  DriveConfig d;
  const auto w = to_sparse(jw_map(build_drive_operator(cfg, d)));
  std::vector<StateVector> out;
  for (int i : {0, 3, 5, 9}) {
    const auto r = evolve_driven(h0, w, 0.3, 1.7, {0.0, 15.0}, basis(16, i), {});
    out.push_back(r.final_state());
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out.size(); ++j)
      EXPECT_NEAR(std::abs(out[i].dot(out[j])), i == j ? 1.0 : 0.0, 1e-7);
}

TEST(EvolveDriven, StepUnderflowRaisesStiffness) {
  EvolutionOptions opt;
  opt.initial_step = 10.0;
  opt.min_step = 0.5;
  EXPECT_THROW(evolve_driven(two_level(1000.0), flip(), 1.0, 1.0, {0.0, 5.0}, {}, basis(2, 0), opt), StiffnessError);
}

TEST(EvolveDriven, CsvHeaderNamesUnits) {
  const auto r = evolve_driven(two_level(1.0), flip(), 0.1, 1.0, uniform_grid(1.0, 3), {basis(2, 0), basis(2, 1)},
                               basis(2, 0));
  std::ostringstream os;
  r.write_csv(os);
  std::string header;
  std::getline(std::istringstream(os.str()) >> std::ws, header);
  EXPECT_EQ(header, "t[1/energy],overlap_0[probability],overlap_1[probability],norm[1]");
}

TEST(Trotter, ConvergesMonotonically) {
  const DenseMatrix h0 = to_dense(two_level(1.0) + SpinOperator::single(1, 0, Pauli::Y, 0.3));
  const DenseMatrix w = to_dense(flip());
  const auto psi0 = basis(2, 0);
  const double t = 6.0;
  const auto ref = evolve_driven(h0, w, 0.4, 1.1, {0.0, t}, psi0, {}).final_state();
  for (int order : {1, 2, 4}) {
    double prev = 1.0;
    for (int steps : {4, 8, 16, 32, 64}) {
      const double infid = 1.0 - std::abs(ref.dot(evolve_trotter(h0, w, 0.4, 1.1, t, order, steps, psi0).state));
      EXPECT_LE(infid, prev + 1e-12) << "order " << order << " steps " << steps;
      prev = infid;
    }
  }
}

TEST(Trotter, SecondOrderSelfConvergenceSlope) {
  SpinOperator h(2);
  h.add(PauliString::parse(0.7, "ZI"));
  h.add(PauliString::parse(-0.4, "IZ"));
  h.add(PauliString::parse(0.3, "XX"));
  SpinOperator wop(2);
  wop.add(PauliString::parse(1.0, "XI"));
  wop.add(PauliString::parse(0.5, "YZ"));
  const DenseMatrix h0 = to_dense(h), w = to_dense(wop);
  const auto psi0 = basis(4, 0);
  const double t = 3.0;
  const StateVector ref = evolve_trotter(h0, w, 0.8, 1.3, t, 4, 4096, psi0).state;
  std::vector<double> steps, err2, err4;
  for (int s : {8, 16, 32, 64}) {
    steps.push_back(s);
    err2.push_back((evolve_trotter(h0, w, 0.8, 1.3, t, 2, s, psi0).state - ref).norm());
    err4.push_back((evolve_trotter(h0, w, 0.8, 1.3, t, 4, s, psi0).state - ref).norm());
  }
  EXPECT_NEAR(log_slope(steps, err2), -2.0, 0.3);
  EXPECT_LT(log_slope(steps, err4), -3.5);
}

TEST(Trotter, CommutingPartsExactInOneStep) {
  const DenseMatrix h0 = to_dense(two_level(1.3));
  const DenseMatrix w = to_dense(SpinOperator::single(1, 0, Pauli::Z, 0.5) + SpinOperator::identity(1, 0.2));
  StateVector psi0(2);
  psi0 << 0.6, cplx(0.0, 0.8);
  const auto ref = evolve_driven(h0, w, 0.7, 2.1, {0.0, 4.0}, psi0, {}).final_state();
  for (int order : {1, 2, 4}) {
    const auto r = evolve_trotter(h0, w, 0.7, 2.1, 4.0, order, 1, psi0);
    EXPECT_LE((r.state - ref).norm(), 1e-9);
  }
}

TEST(Trotter, RejectsBadOrder) {
  const DenseMatrix h = to_dense(flip());
  EXPECT_THROW(evolve_trotter(h, h, 1.0, 1.0, 1.0, 3, 10, basis(2, 0)), ConfigError);
  EXPECT_THROW(evolve_trotter(h, h, 1.0, 1.0, 1.0, 2, 0, basis(2, 0)), ConfigError);
  const auto checked = evolve_trotter_checked(h, h, 0.5, 1.0, 1.0, 2, 200, basis(2, 0));
  EXPECT_NEAR(checked.fidelity_vs_reference, 1.0, 1e-6);
}
