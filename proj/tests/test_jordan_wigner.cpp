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

#include "gnprep/jordan_wigner.hpp"
#include "oracles.hpp"

using namespace gnprep;

namespace {

LatticeConfig lattice(int n, int N, double g0 = 0.0, double a = 1.0) {
  LatticeConfig c;
  c.n = n;
  c.N = N;
  c.g0 = g0;
  c.a = a;
  return c;
}

Eigen::VectorXd eigenvalues(const DenseMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<DenseMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

TEST(QubitOrderingTest, IndexFormulaAndBijection) {
  const LatticeShape s{3, 2, 1.0};
  const QubitOrdering ord(s);
  std::vector<int> hits(12, 0);
  for (int x = 0; x < 3; ++x)
    for (int j = 1; j <= 2; ++j)
      for (int al = 0; al < 2; ++al) {
        EXPECT_EQ(ord.index(x, j, al), 4 * x + 2 * (j - 1) + al);
        ++hits[static_cast<std::size_t>(ord.index(x, j, al))];
        EXPECT_EQ(ord.site_of_qubit(ord.index(x, j, al)), x);
      }
  for (int h : hits) EXPECT_EQ(h, 1);
  const QubitOrdering alt(s, OrderingScheme::SiteSpinorSpecies);
  EXPECT_EQ(alt.index(1, 2, 0), 4 + 1);
  EXPECT_EQ(alt.index(1, 1, 1), 4 + 2);
  EXPECT_THROW(ord.index(3, 1, 0), ShapeError);
}

TEST(JwMap, FirstModeHasEmptyTail) {
  const double a = 0.25;
  const LatticeShape s{1, 1, a};
  const auto img = jw_map(FermionOperator::annihilator(s, 0, 1, 0));
  const auto want = SpinOperator::lowering(2, 0) * cplx(-1.0 / std::sqrt(a));
  EXPECT_LE((to_dense(img) - to_dense(want)).norm(), 1e-14);
  EXPECT_EQ(img.size(), 2u);
}

TEST(JwMap, SecondModeCarriesZTail) {
  const double a = 0.25;
  const LatticeShape s{1, 1, a};
  const auto img = jw_map(FermionOperator::annihilator(s, 0, 1, 1));
  const auto want = SpinOperator::single(2, 0, Pauli::Z) * SpinOperator::lowering(2, 1) * cplx(-1.0 / std::sqrt(a));
  EXPECT_EQ(img.size(), want.size());
  EXPECT_LE((to_dense(img) - to_dense(want)).norm(), 1e-14);
  for (const auto& p : img.strings()) EXPECT_EQ(p.letters[0], Pauli::Z);
}

TEST(JwMap, NumberOperatorTailsCancel) {
  const double a = 0.5;
  const LatticeShape s{2, 1, a};
  for (int x = 0; x < 2; ++x)
    for (int al = 0; al < 2; ++al) {
      FermionOperator n(s);
      n.add_term(1.0, 0, {Factor{FactorKind::Create, x, 1, al}, Factor{FactorKind::Annihilate, x, 1, al}});
      const auto img = jw_map(n);
      const int q = 2 * x + al;
      const auto want = (SpinOperator::identity(4) - SpinOperator::single(4, q, Pauli::Z)) * cplx(1.0 / (2 * a));
      EXPECT_EQ(img, want);
    }
}

TEST(JwMap, MatchesKroneckerOracle) {
  const double a = 0.7;
  const LatticeShape s{2, 2, a};
  const QubitOrdering ord(s);
  for (int x = 0; x < 2; ++x)
    for (int j = 1; j <= 2; ++j)
      for (int al = 0; al < 2; ++al) {
        const auto m = to_dense(jw_map(FermionOperator::annihilator(s, x, j, al), ord), 8);
        EXPECT_LE((m - oracle::annihilator(ord.index(x, j, al), 8, a)).norm(), 1e-13);
      }
}

TEST(JwMap, CanonicalAnticommutationRelations) {
  for (auto [n, N] : {std::pair{1, 1}, {2, 1}, {3, 1}, {1, 2}, {2, 2}}) {
    const double a = 0.6;
    const LatticeShape s{n, N, a};
    std::vector<DenseMatrix> c;
    for (int x = 0; x < n; ++x)
      for (int j = 1; j <= N; ++j)
        for (int al = 0; al < 2; ++al) c.push_back(to_dense(jw_map(FermionOperator::annihilator(s, x, j, al))));
    const Eigen::Index d = c[0].rows();
    const DenseMatrix id = DenseMatrix::Identity(d, d);
    double worst = 0.0;
    for (std::size_t u = 0; u < c.size(); ++u)
      for (std::size_t v = 0; v < c.size(); ++v) {
        const DenseMatrix cd = c[u] * c[v].adjoint() + c[v].adjoint() * c[u];
        const DenseMatrix cc = c[u] * c[v] + c[v] * c[u];
        const DenseMatrix want = u == v ? DenseMatrix(id / a) : DenseMatrix(DenseMatrix::Zero(d, d));
        worst = std::max(worst, (cd - want).cwiseAbs().maxCoeff());
        worst = std::max(worst, cc.cwiseAbs().maxCoeff());
      }
    EXPECT_LE(worst, 1e-12) << "n=" << n << " N=" << N;
  }
}

TEST(MapHamiltonian, AgreesWithMappedFermionOperator) {
  const auto cfg = lattice(3, 2, 0.8, 0.5);
  const auto diff = map_hamiltonian(cfg) - jw_map(build_hamiltonian(cfg));
  EXPECT_LE(diff.coefficient_norm(), 1e-12);
  EXPECT_EQ(map_hamiltonian(cfg).size(), jw_map(build_hamiltonian(cfg)).size());
  EXPECT_TRUE(map_hamiltonian(cfg).is_hermitian());
}

TEST(MapHamiltonian, SpectrumIndependentOfOrdering) {
  for (auto [n, N] : {std::pair{2, 2}, {3, 1}}) {
    const auto cfg = lattice(n, N, 0.9);
    const auto e1 = eigenvalues(to_dense(map_hamiltonian(cfg, GammaConvention::standard(), OrderingScheme::SiteSpeciesSpinor)));
    const auto e2 = eigenvalues(to_dense(map_hamiltonian(cfg, GammaConvention::standard(), OrderingScheme::SiteSpinorSpecies)));
    EXPECT_LE((e1 - e2).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(MapHamiltonian, CommutesWithGlobalParity) {
  for (auto [n, N] : {std::pair{3, 1}, {4, 2}}) {
    const auto h = map_hamiltonian(lattice(n, N, 1.1));
    for (const auto& p : h.strings()) {
      int flips = 0;
      for (auto l : p.letters) flips += (l == Pauli::X || l == Pauli::Y);
      EXPECT_EQ(flips % 2, 0);
    }
  }
  const auto h = to_dense(map_hamiltonian(lattice(3, 1, 1.1)));
  const DenseMatrix z = oracle::string_matrix("ZZZZZZ");
  EXPECT_LE((h * z - z * h).norm(), 1e-12);
}

TEST(Locality, IdentityHasZeroWidth) {
  const LatticeShape s{2, 1, 1.0};
  const auto r = locality_report(SpinOperator::identity(4, 2.0), QubitOrdering(s));
  ASSERT_EQ(r.bulk_widths.size(), 1u);
  EXPECT_EQ(r.bulk_widths.begin()->first, 0);
  EXPECT_EQ(r.max_bulk_width, 0);
  EXPECT_FALSE(r.periodic_flag);
}

TEST(Locality, SingleHoppingTermSpansTwoSites) {
  const LatticeShape s{4, 1, 1.0};
  FermionOperator hop(s);
  hop.add_term(1.0, 0, {Factor{FactorKind::Create, 1, 1, 0}, Factor{FactorKind::Annihilate, 2, 1, 1}});
  hop += hop.adjoint();
  const auto r = locality_report(jw_map(hop), QubitOrdering(s));
  EXPECT_EQ(r.max_bulk_width, 4);
  EXPECT_EQ(r.max_pair_width, 4);
  EXPECT_EQ(r.wrap_terms, 0u);
}

TEST(Locality, MappedHamiltonianWindows) {
  for (int N : {1, 2})
    for (int n = 2; n <= 6; ++n) {
      const auto cfg = lattice(n, N, 0.7);
      const QubitOrdering ord(cfg.shape());
      const auto r = locality_report(map_hamiltonian(cfg), ord);
      EXPECT_LE(r.max_pair_width, 4 * N);
      EXPECT_LE(r.max_onsite_width, 2 * N);
      EXPECT_LE(r.max_bulk_width, 4 * N);
      EXPECT_EQ(r.periodic_flag, n > 2) << "n=" << n;
      for (const auto& [w, count] : r.wrap_widths) EXPECT_LE(w, 2 * N * n);
      const auto rg = locality_report(jw_map(build_hg(cfg), ord), ord);
      EXPECT_LE(rg.max_bulk_width, 2 * N);
      EXPECT_EQ(rg.pair_terms, 0u);
      EXPECT_EQ(rg.wrap_terms, 0u);
    }
}
