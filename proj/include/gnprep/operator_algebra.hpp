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
#include <bit>
#include <cmath>
#include <compare>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gnprep/core.hpp"

namespace gnprep {

/// Coefficients at or below this magnitude are dropped from canonical forms.
inline constexpr double kCoefficientTolerance = 1e-14;

/// Lattice geometry shared by every fermion operator: n sites, N species,
/// two spinor components, spacing a.
struct LatticeShape {
  int n = 1;
  int N = 1;
  double a = 1.0;

  int modes() const { return 2 * N * n; }
  bool operator==(const LatticeShape&) const = default;
};

enum class FactorKind : std::uint8_t { Create, Annihilate };

/// One ladder factor psi_{species,spinor}(site) or its adjoint. Species are
/// 1-based, sites 0-based.
struct Factor {
  FactorKind kind = FactorKind::Annihilate;
  int site = 0;
  int species = 1;
  int spinor = 0;

  auto operator<=>(const Factor&) const = default;
};

namespace detail {

inline int mode_of(const LatticeShape& s, const Factor& f) {
  return 2 * s.N * f.site + 2 * (f.species - 1) + f.spinor;
}

// Creators ascending by (site, species, spinor), then annihilators descending.
// The adjoint of a canonical monomial is then canonical again.
inline std::pair<int, int> order_key(const LatticeShape& s, const Factor& f) {
  const int m = mode_of(s, f);
  return f.kind == FactorKind::Create ? std::pair{0, m} : std::pair{1, -m};
}

}  // namespace detail

/// Sum of normal-ordered monomials in lattice fermion fields. Each monomial
/// carries a complex coefficient times a^{a_power}; the a^{-1} produced by
/// every contraction is kept symbolic until the operator is realized.
class FermionOperator {
 public:
  struct Key {
    int a_power = 0;
    std::vector<Factor> factors;
    auto operator<=>(const Key&) const = default;
  };
  using TermMap = std::map<Key, cplx>;

  explicit FermionOperator(LatticeShape shape) : shape_(shape) {
    if (shape.n < 1 || shape.N < 1 || !(shape.a > 0.0))
      throw ShapeError("lattice shape needs n >= 1, N >= 1, a > 0");
  }

  static FermionOperator identity(LatticeShape shape, cplx c = 1.0) {
    FermionOperator op(shape);
    op.add_term(c, 0, {});
    return op;
  }
  static FermionOperator annihilator(LatticeShape shape, int site, int species, int spinor) {
    FermionOperator op(shape);
    op.add_term(1.0, 0, {Factor{FactorKind::Annihilate, site, species, spinor}});
    return op;
  }
  static FermionOperator creator(LatticeShape shape, int site, int species, int spinor) {
    FermionOperator op(shape);
    op.add_term(1.0, 0, {Factor{FactorKind::Create, site, species, spinor}});
    return op;
  }

  const LatticeShape& shape() const { return shape_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  /// Adds coeff * a^{a_power} * (product of factors), normal-ordering on the way in.
  void add_term(cplx coeff, int a_power, std::vector<Factor> factors) {
    for (const auto& f : factors) check_factor(f);
    accumulate(coeff, a_power, std::move(factors));
    prune();
  }

  FermionOperator& operator+=(const FermionOperator& o) {
    check_shape(o);
    for (const auto& [k, c] : o.terms_) terms_[k] += c;
    prune();
    return *this;
  }
  FermionOperator& operator-=(const FermionOperator& o) { return *this += o * cplx(-1.0); }
  FermionOperator& operator*=(cplx c) {
    for (auto& [k, v] : terms_) v *= c;
    prune();
    return *this;
  }

  friend FermionOperator operator+(FermionOperator a, const FermionOperator& b) { return a += b; }
  friend FermionOperator operator-(FermionOperator a, const FermionOperator& b) { return a -= b; }
  friend FermionOperator operator*(FermionOperator a, cplx c) { return a *= c; }
  friend FermionOperator operator*(cplx c, FermionOperator a) { return a *= c; }

  friend FermionOperator operator*(const FermionOperator& a, const FermionOperator& b) {
    a.check_shape(b);
    FermionOperator out(a.shape_);
    for (const auto& [ka, ca] : a.terms_) {
      for (const auto& [kb, cb] : b.terms_) {
        std::vector<Factor> f = ka.factors;
        f.insert(f.end(), kb.factors.begin(), kb.factors.end());
        out.accumulate(ca * cb, ka.a_power + kb.a_power, std::move(f));
      }
    }
    out.prune();
    return out;
  }

  FermionOperator adjoint() const {
    FermionOperator out(shape_);
    for (const auto& [k, c] : terms_) {
      std::vector<Factor> f(k.factors.rbegin(), k.factors.rend());
      for (auto& x : f)
        x.kind = x.kind == FactorKind::Create ? FactorKind::Annihilate : FactorKind::Create;
      out.accumulate(std::conj(c), k.a_power, std::move(f));
    }
    out.prune();
    return out;
  }

  /// Largest |coefficient * a^power| over all terms.
  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c) * std::pow(shape_.a, k.a_power));
    return m;
  }

  /// True when every realized coefficient is within tol of zero.
  bool approx_zero(double tol) const { return max_abs_coefficient() <= tol; }

  bool operator==(const FermionOperator& o) const {
    return shape_ == o.shape_ && terms_ == o.terms_;
  }

 private:
  void check_shape(const FermionOperator& o) const {
    if (!(shape_ == o.shape_)) throw ShapeError("fermion operators on different lattice shapes");
  }
  void check_factor(const Factor& f) const {
    if (f.site < 0 || f.site >= shape_.n || f.species < 1 || f.species > shape_.N ||
        (f.spinor != 0 && f.spinor != 1))
      throw ShapeError("factor index outside lattice shape");
  }

  void accumulate(cplx coeff, int a_power, std::vector<Factor> f) {
    if (coeff == cplx(0.0)) return;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
      const auto ki = detail::order_key(shape_, f[i]);
      const auto kj = detail::order_key(shape_, f[i + 1]);
      if (ki == kj) return;  // nilpotent: same ladder factor twice
      if (ki > kj) {
        if (f[i].kind != f[i + 1].kind &&
            detail::mode_of(shape_, f[i]) == detail::mode_of(shape_, f[i + 1])) {
          std::vector<Factor> g;
          g.reserve(f.size() - 2);
          g.insert(g.end(), f.begin(), f.begin() + static_cast<long>(i));
          g.insert(g.end(), f.begin() + static_cast<long>(i) + 2, f.end());
          accumulate(coeff, a_power - 1, std::move(g));
        }
        std::swap(f[i], f[i + 1]);
        accumulate(-coeff, a_power, std::move(f));
        return;
      }
    }
    terms_[Key{a_power, std::move(f)}] += coeff;
  }

  void prune() {
    std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) <= kCoefficientTolerance; });
  }

  LatticeShape shape_;
  TermMap terms_;
};

inline FermionOperator anticommutator(const FermionOperator& a, const FermionOperator& b) {
  return a * b + b * a;
}

// ---------------------------------------------------------------------------
// Pauli strings

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
  }
  throw ConfigError(std::string("bad Pauli letter '") + c + "'");
}

/// Single-letter product: returns (phase, letter) with a*b = phase * letter.
inline std::pair<cplx, Pauli> multiply_letters(Pauli a, Pauli b) {
  if (a == Pauli::I) return {1.0, b};
  if (b == Pauli::I) return {1.0, a};
  if (a == b) return {1.0, Pauli::I};
  const int ia = static_cast<int>(a), ib = static_cast<int>(b);
  const int ic = 6 - ia - ib;  // the remaining letter among X=1, Y=2, Z=3
  // Cyclic XY -> iZ, YZ -> iX, ZX -> iY.
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {cyclic ? kI : -kI, static_cast<Pauli>(ic)};
}

/// Weighted tensor product of Pauli letters; letters[0] is the leftmost
/// (slowest-varying) tensor factor.
struct PauliString {
  cplx coeff = 1.0;
  std::vector<Pauli> letters;

  int qubits() const { return static_cast<int>(letters.size()); }

  std::string letter_string() const {
    std::string s;
    s.reserve(letters.size());
    for (auto p : letters) s.push_back(pauli_char(p));
    return s;
  }

  /// Qubits carrying a non-identity letter.
  std::vector<int> support() const {
    std::vector<int> out;
    for (int q = 0; q < qubits(); ++q)
      if (letters[q] != Pauli::I) out.push_back(q);
    return out;
  }

  /// max - min + 1 over the support, 0 for the identity.
  int window_width() const {
    const auto s = support();
    return s.empty() ? 0 : s.back() - s.front() + 1;
  }

  static PauliString parse(cplx coeff, const std::string& s) {
    PauliString p{coeff, {}};
    for (char c : s) p.letters.push_back(pauli_from_char(c));
    return p;
  }
};

inline PauliString operator*(const PauliString& a, const PauliString& b) {
  if (a.qubits() != b.qubits()) throw ShapeError("Pauli strings on different qubit counts");
  PauliString out{a.coeff * b.coeff, std::vector<Pauli>(a.letters.size())};
  for (std::size_t q = 0; q < a.letters.size(); ++q) {
    auto [ph, l] = multiply_letters(a.letters[q], b.letters[q]);
    out.coeff *= ph;
    out.letters[q] = l;
  }
  return out;
}

/// Bit masks of a Pauli string in the computational basis: qubit k maps to
/// bit (qubits-1-k). Acting on |b>: P|b> = phase * (-1)^{popcount(b & z)} |b ^ x>.
struct CompiledPauli {
  std::uint64_t xmask = 0;
  std::uint64_t zmask = 0;
  cplx phase = 1.0;  // coefficient times i^{#Y}
};

inline CompiledPauli compile_pauli(const PauliString& p) {
  CompiledPauli c;
  const int q = p.qubits();
  int ny = 0;
  for (int k = 0; k < q; ++k) {
    const std::uint64_t bit = pow2(q - 1 - k);
    switch (p.letters[k]) {
      case Pauli::I: break;
      case Pauli::X: c.xmask |= bit; break;
      case Pauli::Z: c.zmask |= bit; break;
      case Pauli::Y:
        c.xmask |= bit;
        c.zmask |= bit;
        ++ny;
        break;
    }
  }
  static const cplx ipow[4] = {1.0, kI, -1.0, -kI};
  c.phase = p.coeff * ipow[ny % 4];
  return c;
}

/// Canonical weighted sum of Pauli strings on a fixed register.
class SpinOperator {
 public:
  using TermMap = std::map<std::vector<Pauli>, cplx>;

  explicit SpinOperator(int qubits) : qubits_(qubits) {
    if (qubits < 0 || qubits > 63) throw ShapeError("qubit count out of range");
  }

  static SpinOperator identity(int qubits, cplx c = 1.0) {
    SpinOperator op(qubits);
    op.add(PauliString{c, std::vector<Pauli>(qubits, Pauli::I)});
    return op;
  }
  static SpinOperator single(int qubits, int qubit, Pauli p, cplx c = 1.0) {
    SpinOperator op(qubits);
    std::vector<Pauli> l(qubits, Pauli::I);
    l.at(qubit) = p;
    op.add(PauliString{c, std::move(l)});
    return op;
  }
  /// a+ = (X - iY)/2 = |1><0|.
  static SpinOperator raising(int qubits, int qubit) {
    return single(qubits, qubit, Pauli::X, 0.5) + single(qubits, qubit, Pauli::Y, -0.5 * kI);
  }
  /// a- = (X + iY)/2 = |0><1|.
  static SpinOperator lowering(int qubits, int qubit) {
    return single(qubits, qubit, Pauli::X, 0.5) + single(qubits, qubit, Pauli::Y, 0.5 * kI);
  }

  int qubits() const { return qubits_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  std::vector<PauliString> strings() const {
    std::vector<PauliString> out;
    out.reserve(terms_.size());
    for (const auto& [l, c] : terms_) out.push_back(PauliString{c, l});
    return out;
  }

  void add(const PauliString& p) {
    if (p.qubits() != qubits_) throw ShapeError("Pauli string does not match register size");
    auto& v = terms_[p.letters];
    v += p.coeff;
    if (std::abs(v) <= kCoefficientTolerance) terms_.erase(p.letters);
  }

  SpinOperator& operator+=(const SpinOperator& o) {
    check(o);
    for (const auto& [l, c] : o.terms_) add(PauliString{c, l});
    return *this;
  }
  SpinOperator& operator-=(const SpinOperator& o) { return *this += o * cplx(-1.0); }
  SpinOperator& operator*=(cplx c) {
    for (auto& [l, v] : terms_) v *= c;
    std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) <= kCoefficientTolerance; });
    return *this;
  }
  friend SpinOperator operator+(SpinOperator a, const SpinOperator& b) { return a += b; }
  friend SpinOperator operator-(SpinOperator a, const SpinOperator& b) { return a -= b; }
  friend SpinOperator operator*(SpinOperator a, cplx c) { return a *= c; }
  friend SpinOperator operator*(cplx c, SpinOperator a) { return a *= c; }

  friend SpinOperator operator*(const SpinOperator& a, const SpinOperator& b) {
    a.check(b);
    SpinOperator out(a.qubits_);
    for (const auto& [la, ca] : a.terms_)
      for (const auto& [lb, cb] : b.terms_) out.add(PauliString{ca, la} * PauliString{cb, lb});
    return out;
  }

  SpinOperator adjoint() const {
    SpinOperator out(qubits_);
    for (const auto& [l, c] : terms_) out.add(PauliString{std::conj(c), l});
    return out;
  }

  /// String-by-string comparison with the adjoint.
  bool is_hermitian(double tol = 1e-12) const {
    for (const auto& [l, c] : terms_)
      if (std::abs(c.imag()) > tol * std::max(1.0, std::abs(c))) return false;
    return true;
  }

  /// Sum of |coefficients|; an upper bound on the spectral norm.
  double coefficient_norm() const {
    double s = 0.0;
    for (const auto& [l, c] : terms_) s += std::abs(c);
    return s;
  }

  std::vector<CompiledPauli> compiled() const {
    std::vector<CompiledPauli> out;
    out.reserve(terms_.size());
    for (const auto& [l, c] : terms_) out.push_back(compile_pauli(PauliString{c, l}));
    return out;
  }

  bool operator==(const SpinOperator& o) const { return qubits_ == o.qubits_ && terms_ == o.terms_; }

 private:
  void check(const SpinOperator& o) const {
    if (qubits_ != o.qubits_) throw ShapeError("spin operators on different registers");
  }

  int qubits_;
  TermMap terms_;
};

// ---------------------------------------------------------------------------
// Matrix realization

inline void check_qubit_cap(int qubits, int cap) {
  if (qubits > cap)
    throw ResourceError(std::to_string(qubits) + " qubits exceeds the cap of " + std::to_string(cap));
}

/// Matrix-free application of a Pauli sum; works up to the 63-qubit mask limit
/// but memory caps it far earlier.
class PauliSumMap {
 public:
  explicit PauliSumMap(const SpinOperator& op) : qubits_(op.qubits()), terms_(op.compiled()) {}

  Eigen::Index dim() const { return static_cast<Eigen::Index>(pow2(qubits_)); }

  void apply(const StateVector& in, StateVector& out) const {
    const auto d = static_cast<std::uint64_t>(dim());
    out.setZero(dim());
    for (const auto& t : terms_) {
      for (std::uint64_t b = 0; b < d; ++b) {
        const double sign = (std::popcount(b & t.zmask) & 1) ? -1.0 : 1.0;
        out[static_cast<Eigen::Index>(b ^ t.xmask)] += t.phase * sign * in[static_cast<Eigen::Index>(b)];
      }
    }
  }

 private:
  int qubits_;
  std::vector<CompiledPauli> terms_;
};

inline SparseMatrix to_sparse(const SpinOperator& op, int cap = kDefaultQubitCap) {
  check_qubit_cap(op.qubits(), cap);
  const std::uint64_t d = pow2(op.qubits());
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(op.size() * d);
  for (const auto& t : op.compiled())
    for (std::uint64_t b = 0; b < d; ++b) {
      const double sign = (std::popcount(b & t.zmask) & 1) ? -1.0 : 1.0;
      trip.emplace_back(static_cast<int>(b ^ t.xmask), static_cast<int>(b), t.phase * sign);
    }
  SparseMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune(cplx(0.0), 0.0);
  return m;
}

inline DenseMatrix to_dense(const SpinOperator& op, int cap = kDenseQubitLimit) {
  check_qubit_cap(op.qubits(), cap);
  const std::uint64_t d = pow2(op.qubits());
  DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const auto& t : op.compiled())
    for (std::uint64_t b = 0; b < d; ++b) {
      const double sign = (std::popcount(b & t.zmask) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(b ^ t.xmask), static_cast<Eigen::Index>(b)) += t.phase * sign;
    }
  return m;
}

/// Dense at or below kDenseQubitLimit qubits, sparse above.
using OperatorMatrix = std::variant<DenseMatrix, SparseMatrix>;

inline OperatorMatrix to_matrix(const SpinOperator& op, int cap = kDefaultQubitCap) {
  check_qubit_cap(op.qubits(), cap);
  if (op.qubits() <= kDenseQubitLimit) return to_dense(op);
  return to_sparse(op, cap);
}

inline DenseMatrix as_dense(const OperatorMatrix& m) {
  if (const auto* d = std::get_if<DenseMatrix>(&m)) return *d;
  return DenseMatrix(std::get<SparseMatrix>(m));
}

// ---------------------------------------------------------------------------
// Text serialization (JSON)

inline nlohmann::json to_json(const FermionOperator& op) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [k, c] : op.terms()) {
    nlohmann::json f = nlohmann::json::array();
    for (const auto& x : k.factors)
      f.push_back({x.kind == FactorKind::Create ? "+" : "-", x.site, x.species, x.spinor});
    terms.push_back({{"re", c.real()}, {"im", c.imag()}, {"a_power", k.a_power}, {"factors", f}});
  }
  const auto& s = op.shape();
  return {{"kind", "fermion"}, {"shape", {{"n", s.n}, {"N", s.N}, {"a", s.a}}}, {"terms", terms}};
}

inline FermionOperator fermion_from_json(const nlohmann::json& j) {
  const auto& s = j.at("shape");
  FermionOperator op(LatticeShape{s.at("n").get<int>(), s.at("N").get<int>(), s.at("a").get<double>()});
  for (const auto& t : j.at("terms")) {
    std::vector<Factor> f;
    for (const auto& x : t.at("factors")) {
      const auto kind = x.at(0).get<std::string>() == "+" ? FactorKind::Create : FactorKind::Annihilate;
      f.push_back(Factor{kind, x.at(1).get<int>(), x.at(2).get<int>(), x.at(3).get<int>()});
    }
    op.add_term(cplx(t.at("re").get<double>(), t.at("im").get<double>()), t.at("a_power").get<int>(),
                std::move(f));
  }
  return op;
}

inline nlohmann::json to_json(const SpinOperator& op) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& p : op.strings())
    terms.push_back({{"re", p.coeff.real()}, {"im", p.coeff.imag()}, {"paulis", p.letter_string()}});
  return {{"kind", "spin"}, {"qubits", op.qubits()}, {"terms", terms}};
}

inline SpinOperator spin_from_json(const nlohmann::json& j) {
  SpinOperator op(j.at("qubits").get<int>());
  for (const auto& t : j.at("terms"))
    op.add(PauliString::parse(cplx(t.at("re").get<double>(), t.at("im").get<double>()),
                              t.at("paulis").get<std::string>()));
  return op;
}

}  // namespace gnprep
