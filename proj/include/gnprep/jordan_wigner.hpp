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

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "gnprep/core.hpp"
#include "gnprep/lattice_model.hpp"
#include "gnprep/operator_algebra.hpp"

namespace gnprep {

enum class OrderingScheme { SiteSpeciesSpinor, SiteSpinorSpecies };

/// Bijection from lattice modes (site, species, spinor) to qubit indices.
/// Each site occupies a contiguous block of 2N qubits in both schemes.
class QubitOrdering {
 public:
  QubitOrdering(LatticeShape shape, OrderingScheme scheme = OrderingScheme::SiteSpeciesSpinor)
      : shape_(shape), scheme_(scheme), qubit_of_mode_(static_cast<std::size_t>(shape.modes())) {
    for (int x = 0; x < shape.n; ++x)
      for (int j = 1; j <= shape.N; ++j)
        for (int al = 0; al < 2; ++al) {
          const int mode = detail::mode_of(shape, Factor{FactorKind::Annihilate, x, j, al});
          const int q = scheme == OrderingScheme::SiteSpeciesSpinor ? 2 * shape.N * x + 2 * (j - 1) + al
                                                                    : 2 * shape.N * x + shape.N * al + (j - 1);
          qubit_of_mode_[static_cast<std::size_t>(mode)] = q;
        }
    std::vector<int> seen(qubit_of_mode_.size(), 0);
    for (int q : qubit_of_mode_) {
      if (q < 0 || q >= shape.modes() || seen[static_cast<std::size_t>(q)]++)
        throw ShapeError("qubit ordering is not a bijection");
    }
  }

  const LatticeShape& shape() const { return shape_; }
  OrderingScheme scheme() const { return scheme_; }
  int qubits() const { return shape_.modes(); }
  int qubits_per_site() const { return 2 * shape_.N; }

  int index(int site, int species, int spinor) const {
    if (site < 0 || site >= shape_.n || species < 1 || species > shape_.N || spinor < 0 || spinor > 1)
      throw ShapeError("mode index out of range");
    return qubit_of_mode_[static_cast<std::size_t>(
        detail::mode_of(shape_, Factor{FactorKind::Annihilate, site, species, spinor}))];
  }
  int site_of_qubit(int q) const { return q / qubits_per_site(); }

 private:
  LatticeShape shape_;
  OrderingScheme scheme_;
  std::vector<int> qubit_of_mode_;
};

/// Image of a single ladder factor, without the -1/sqrt(a) prefactor:
/// Z on every earlier qubit, then |0><1| (annihilate) or |1><0| (create).
inline SpinOperator jw_factor(const Factor& f, const QubitOrdering& ord) {
  const int nq = ord.qubits();
  const int q = ord.index(f.site, f.species, f.spinor);
  std::vector<Pauli> lx(static_cast<std::size_t>(nq), Pauli::I);
  for (int k = 0; k < q; ++k) lx[static_cast<std::size_t>(k)] = Pauli::Z;
  std::vector<Pauli> ly = lx;
  lx[static_cast<std::size_t>(q)] = Pauli::X;
  ly[static_cast<std::size_t>(q)] = Pauli::Y;
  const cplx yc = f.kind == FactorKind::Annihilate ? 0.5 * kI : -0.5 * kI;
  SpinOperator op(nq);
  op.add(PauliString{0.5, std::move(lx)});
  op.add(PauliString{yc, std::move(ly)});
  return op;
}

/// psi_{j,alpha}(x) -> (-1/sqrt a) Z...Z a^-, psi^dag -> (-1/sqrt a) Z...Z a^+.
inline SpinOperator jw_map(const FermionOperator& op, const QubitOrdering& ord) {
  if (!(op.shape() == ord.shape())) throw ShapeError("operator and qubit ordering disagree on lattice shape");
  const double a = op.shape().a;
  SpinOperator out(ord.qubits());
  for (const auto& [key, c] : op.terms()) {
    const double k = static_cast<double>(key.factors.size());
    const double sign = (key.factors.size() % 2) ? -1.0 : 1.0;
    SpinOperator term = SpinOperator::identity(ord.qubits(), c * sign * std::pow(a, key.a_power - 0.5 * k));
    for (const auto& f : key.factors) term = term * jw_factor(f, ord);
    out += term;
  }
  return out;
}

inline SpinOperator jw_map(const FermionOperator& op) { return jw_map(op, QubitOrdering(op.shape())); }

inline OperatorMatrix to_matrix(const FermionOperator& op, int cap = kDefaultQubitCap) {
  check_qubit_cap(op.shape().modes(), cap);
  return to_matrix(jw_map(op), cap);
}

/// Maps H_0, H_g and H_W separately and sums the images.
inline SpinOperator map_hamiltonian(const LatticeConfig& cfg, const GammaConvention& g = GammaConvention::standard(),
                                    OrderingScheme scheme = OrderingScheme::SiteSpeciesSpinor) {
  const QubitOrdering ord(cfg.shape(), scheme);
  SpinOperator h = jw_map(build_h0(cfg, g), ord);
  h += jw_map(build_hg(cfg, g), ord);
  h += jw_map(build_hw(cfg, g), ord);
  return h;
}

enum class TermClass { Identity, OnSite, NearestNeighbor, Wrap };

struct LocalityReport {
  std::map<int, std::size_t> bulk_widths;  // width -> count, identity at width 0
  std::map<int, std::size_t> wrap_widths;
  int max_bulk_width = 0;
  int max_onsite_width = 0;
  int max_pair_width = 0;
  std::size_t onsite_terms = 0;
  std::size_t pair_terms = 0;
  std::size_t wrap_terms = 0;
  bool periodic_flag = false;  // true when any wrap-around term is present
};

/// Classifies a string by the set of sites it touches.
inline TermClass classify_string(const PauliString& p, const QubitOrdering& ord) {
  std::set<int> sites;
  for (int q : p.support()) sites.insert(ord.site_of_qubit(q));
  if (sites.empty()) return TermClass::Identity;
  if (sites.size() == 1) return TermClass::OnSite;
  if (sites.size() == 2 && *sites.rbegin() - *sites.begin() == 1) return TermClass::NearestNeighbor;
  return TermClass::Wrap;
}

inline LocalityReport locality_report(const SpinOperator& op, const QubitOrdering& ord) {
  if (op.qubits() != ord.qubits()) throw ShapeError("operator and ordering disagree on qubit count");
  LocalityReport r;
  for (const auto& p : op.strings()) {
    const int w = p.window_width();
    switch (classify_string(p, ord)) {
      case TermClass::Identity: ++r.bulk_widths[0]; break;
      case TermClass::OnSite:
        ++r.bulk_widths[w];
        ++r.onsite_terms;
        r.max_onsite_width = std::max(r.max_onsite_width, w);
        r.max_bulk_width = std::max(r.max_bulk_width, w);
        break;
      case TermClass::NearestNeighbor:
        ++r.bulk_widths[w];
        ++r.pair_terms;
        r.max_pair_width = std::max(r.max_pair_width, w);
        r.max_bulk_width = std::max(r.max_bulk_width, w);
        break;
      case TermClass::Wrap:
        ++r.wrap_widths[w];
        ++r.wrap_terms;
        r.periodic_flag = true;
        break;
    }
  }
  return r;
}

}  // namespace gnprep
