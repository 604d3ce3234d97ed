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
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gnprep/core.hpp"
#include "gnprep/operator_algebra.hpp"

namespace gnprep {

// ---------------------------------------------------------------------------
// Matrix product states

enum class CanonicalForm { Left, Right };

/// Open-boundary MPS of qubits. Site s holds A[s][sigma], a Dl x Dr matrix
/// per physical value sigma; site 0 is the most significant qubit.
class MPS {
 public:
  using Site = std::array<DenseMatrix, 2>;

  MPS() = default;
  explicit MPS(std::vector<Site> sites) : sites_(std::move(sites)) { check(); }

  static MPS product(const std::vector<int>& bits) {
    std::vector<Site> s(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      s[i][0] = DenseMatrix::Zero(1, 1);
      s[i][1] = DenseMatrix::Zero(1, 1);
      s[i][bits[i] ? 1 : 0](0, 0) = 1.0;
    }
    MPS m(std::move(s));
    m.center_ = 0;
    return m;
  }

  /// Random normalized MPS with bond dimensions min(chi, 2^k, 2^(n-k)).
  static MPS random(int n, int chi, std::uint64_t seed) {
    if (n < 1 || chi < 1) throw ConfigError("random MPS needs n >= 1 and chi >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Site> s(static_cast<std::size_t>(n));
    auto dim = [&](int k) {
      const int cap = std::min(k, n - k);
      return cap >= 30 ? chi : std::min<int>(chi, 1 << cap);
    };
    for (int i = 0; i < n; ++i)
      for (int p = 0; p < 2; ++p) {
        DenseMatrix a(dim(i), dim(i + 1));
        for (Eigen::Index r = 0; r < a.rows(); ++r)
          for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = cplx(g(rng), g(rng));
        s[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] = a;
      }
    MPS m(std::move(s));
    m.canonicalize(CanonicalForm::Right);
    m.normalize();
    return m;
  }

  /// Exact (or truncated) MPS of a statevector by successive SVDs.
  static MPS from_statevector(const StateVector& psi, int n, int chi_max = 1 << 30, double cutoff = 0.0) {
    if (psi.size() != static_cast<Eigen::Index>(pow2(n))) throw ShapeError("statevector length is not 2^n");
    std::vector<Site> s(static_cast<std::size_t>(n));
    DenseMatrix rest = Eigen::Map<const DenseMatrix>(psi.data(), 1, psi.size());
    for (int i = 0; i < n - 1; ++i) {
      const Eigen::Index dl = rest.rows();
      const Eigen::Index tail = rest.cols() / 2;
      DenseMatrix m(2 * dl, tail);
      for (int p = 0; p < 2; ++p) m.middleRows(p * dl, dl) = rest.middleCols(p * tail, tail);
      Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      Eigen::Index keep = 0;
      while (keep < sv.size() && keep < chi_max && sv[keep] > cutoff * sv[0] && sv[keep] > 0.0) ++keep;
      keep = std::max<Eigen::Index>(keep, 1);
      for (int p = 0; p < 2; ++p) s[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] = svd.matrixU().block(p * dl, 0, dl, keep);
      rest = sv.head(keep).cast<cplx>().asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
    }
    const Eigen::Index dl = rest.rows();
    for (int p = 0; p < 2; ++p) s[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(p)] = rest.col(p);
    MPS out(std::move(s));
    out.center_ = n - 1;
    (void)dl;
    return out;
  }

  int sites() const { return static_cast<int>(sites_.size()); }
  const Site& site(int i) const { return sites_.at(static_cast<std::size_t>(i)); }
  Site& site(int i) { return sites_.at(static_cast<std::size_t>(i)); }
  int center() const { return center_; }
  void set_center(int c) { center_ = c; }

  /// Bond dimension between site k and k+1.
  int bond_dim(int k) const { return static_cast<int>(sites_.at(static_cast<std::size_t>(k) + 1)[0].rows()); }
  std::vector<int> bond_dims() const {
    std::vector<int> out;
    for (int k = 0; k + 1 < sites(); ++k) out.push_back(bond_dim(k));
    return out;
  }
  int max_bond() const {
    int m = 1;
    for (int d : bond_dims()) m = std::max(m, d);
    return m;
  }

  StateVector to_statevector() const {
    if (sites() > 30) throw ResourceError("statevector of more than 30 qubits");
    // rows: basis index of the processed prefix, cols: open right bond
    DenseMatrix acc = DenseMatrix::Ones(1, 1);
    for (const auto& s : sites_) {
      DenseMatrix next(acc.rows() * 2, s[0].cols());
      for (Eigen::Index r = 0; r < acc.rows(); ++r)
        for (int p = 0; p < 2; ++p) next.row(2 * r + p) = acc.row(r) * s[static_cast<std::size_t>(p)];
      acc = std::move(next);
    }
    return acc.col(0);
  }

  static cplx overlap(const MPS& a, const MPS& b) {
    if (a.sites() != b.sites()) throw ShapeError("MPS lengths differ");
    DenseMatrix e = DenseMatrix::Ones(1, 1);
    for (int i = 0; i < a.sites(); ++i) {
      DenseMatrix next = DenseMatrix::Zero(a.site(i)[0].cols(), b.site(i)[0].cols());
      for (int p = 0; p < 2; ++p) next.noalias() += a.site(i)[static_cast<std::size_t>(p)].adjoint() * e * b.site(i)[static_cast<std::size_t>(p)];
      e = std::move(next);
    }
    return e(0, 0);
  }

  double norm() const { return std::sqrt(std::max(0.0, overlap(*this, *this).real())); }

  void normalize() {
    const double nrm = norm();
    if (!(nrm > 0.0)) throw DegenerateInputError("MPS has zero norm");
    const auto c = static_cast<std::size_t>(std::clamp(center_, 0, sites() - 1));
    for (auto& m : sites_[c]) m /= nrm;
  }

  /// Successive SVDs; the state is unchanged and the center moves to the
  /// opposite end. Schmidt values are refreshed as a side effect.
  void canonicalize(CanonicalForm form) {
    const int n = sites();
    schmidt_.assign(static_cast<std::size_t>(std::max(n - 1, 0)), Eigen::VectorXd());
    if (form == CanonicalForm::Left) {
      for (int i = 0; i + 1 < n; ++i) split_right(i);
      center_ = n - 1;
    } else {
      for (int i = n - 1; i > 0; --i) split_left(i);
      center_ = 0;
    }
  }

  /// Schmidt values at every cut, descending and normalized to unit squares.
  const std::vector<Eigen::VectorXd>& schmidt_values() {
    canonicalize(CanonicalForm::Right);
    canonicalize(CanonicalForm::Left);
    const double nrm = norm();
    for (auto& s : schmidt_) s /= nrm;
    return schmidt_;
  }
  std::vector<Eigen::VectorXd> schmidt_values() const {
    MPS copy(*this);
    return copy.schmidt_values();
  }
  const std::vector<Eigen::VectorXd>& cached_schmidt() const { return schmidt_; }

  double left_residual(int i) const {
    const auto& s = site(i);
    const DenseMatrix g = s[0].adjoint() * s[0] + s[1].adjoint() * s[1];
    return (g - DenseMatrix::Identity(g.rows(), g.cols())).norm();
  }
  double right_residual(int i) const {
    const auto& s = site(i);
    const DenseMatrix g = s[0] * s[0].adjoint() + s[1] * s[1].adjoint();
    return (g - DenseMatrix::Identity(g.rows(), g.cols())).norm();
  }
  /// Largest isometry defect: left-canonical before the center, right after.
  double canonical_residual() const {
    double r = 0.0;
    for (int i = 0; i < sites(); ++i) {
      if (i < center_) r = std::max(r, left_residual(i));
      if (i > center_) r = std::max(r, right_residual(i));
    }
    return r;
  }

  void save(std::ostream& os) const;
  static MPS load(std::istream& is);

 private:
  void check() const {
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const auto& s = sites_[i];
      if (s[0].rows() != s[1].rows() || s[0].cols() != s[1].cols()) throw ShapeError("physical slices differ in shape");
      if (i + 1 < sites_.size() && s[0].cols() != sites_[i + 1][0].rows()) throw ShapeError("bond dimensions do not chain");
    }
    if (!sites_.empty() && (sites_.front()[0].rows() != 1 || sites_.back()[0].cols() != 1))
      throw ShapeError("open MPS must have unit boundary bonds");
  }

  // M = [A0; A1] (2Dl x Dr) = U S V^dag, A <- U, next site <- S V^dag A_next.
  void split_right(int i) {
    auto& s = sites_[static_cast<std::size_t>(i)];
    const Eigen::Index dl = s[0].rows(), dr = s[0].cols();
    DenseMatrix m(2 * dl, dr);
    m.topRows(dl) = s[0];
    m.bottomRows(dl) = s[1];
    Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index k = svd.singularValues().size();
    s[0] = svd.matrixU().topRows(dl);
    s[1] = svd.matrixU().bottomRows(dl);
    const DenseMatrix sv = svd.singularValues().cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
    auto& nx = sites_[static_cast<std::size_t>(i) + 1];
    for (auto& a : nx) a = sv * a;
    schmidt_[static_cast<std::size_t>(i)] = svd.singularValues().head(k);
  }

  // M = [A0 A1] (Dl x 2Dr) = U S V^dag, A <- V^dag, previous site <- A_prev U S.
  void split_left(int i) {
    auto& s = sites_[static_cast<std::size_t>(i)];
    const Eigen::Index dl = s[0].rows(), dr = s[0].cols();
    DenseMatrix m(dl, 2 * dr);
    m.leftCols(dr) = s[0];
    m.rightCols(dr) = s[1];
    Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const DenseMatrix vh = svd.matrixV().adjoint();
    s[0] = vh.leftCols(dr);
    s[1] = vh.rightCols(dr);
    const DenseMatrix us = svd.matrixU() * svd.singularValues().cast<cplx>().asDiagonal();
    auto& pv = sites_[static_cast<std::size_t>(i) - 1];
    for (auto& a : pv) a = a * us;
    schmidt_[static_cast<std::size_t>(i) - 1] = svd.singularValues();
  }

  std::vector<Site> sites_;
  int center_ = 0;
  std::vector<Eigen::VectorXd> schmidt_;
};

namespace detail {

inline constexpr char kMpsMagic[8] = {'G', 'N', 'P', 'M', 'P', 'S', '1', '\0'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated MPS file");
  return v;
}

}  // namespace detail

/// Layout: magic, site count, center, then per site (Dl, Dr, two row-major
/// complex payloads), then per cut the Schmidt table (count, values).
inline void MPS::save(std::ostream& os) const {
  os.write(detail::kMpsMagic, sizeof(detail::kMpsMagic));
  detail::put<std::int64_t>(os, sites());
  detail::put<std::int64_t>(os, center_);
  for (const auto& s : sites_) {
    detail::put<std::int64_t>(os, s[0].rows());
    detail::put<std::int64_t>(os, s[0].cols());
    for (const auto& a : s)
      for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
          detail::put<double>(os, a(r, c).real());
          detail::put<double>(os, a(r, c).imag());
        }
  }
  detail::put<std::int64_t>(os, static_cast<std::int64_t>(schmidt_.size()));
  for (const auto& v : schmidt_) {
    detail::put<std::int64_t>(os, v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) detail::put<double>(os, v[i]);
  }
}

inline MPS MPS::load(std::istream& is) {
  char magic[sizeof(detail::kMpsMagic)];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + sizeof(magic), detail::kMpsMagic)) throw ConfigError("not an MPS file");
  const auto n = detail::get<std::int64_t>(is);
  const auto center = detail::get<std::int64_t>(is);
  if (n < 0 || n > 4096) throw ConfigError("corrupt MPS header");
  std::vector<Site> sites(static_cast<std::size_t>(n));
  for (auto& s : sites) {
    const auto dl = detail::get<std::int64_t>(is), dr = detail::get<std::int64_t>(is);
    if (dl < 1 || dr < 1 || dl > 1 << 16 || dr > 1 << 16) throw ConfigError("corrupt MPS bond dimension");
    for (auto& a : s) {
      a.resize(dl, dr);
      for (Eigen::Index r = 0; r < dl; ++r)
        for (Eigen::Index c = 0; c < dr; ++c) {
          const double re = detail::get<double>(is);
          a(r, c) = cplx(re, detail::get<double>(is));
        }
    }
  }
  MPS m(std::move(sites));
  m.center_ = static_cast<int>(center);
  const auto cuts = detail::get<std::int64_t>(is);
  for (std::int64_t k = 0; k < cuts; ++k) {
    const auto len = detail::get<std::int64_t>(is);
    Eigen::VectorXd v(len);
    for (Eigen::Index i = 0; i < len; ++i) v[i] = detail::get<double>(is);
    m.schmidt_.push_back(v);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Entanglement diagnostics

inline double entanglement_entropy(const Eigen::VectorXd& schmidt) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < schmidt.size(); ++i) {
    const double p = schmidt[i] * schmidt[i];
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

/// Von Neumann entropy (natural log) across the middle cut.
inline double half_chain_entropy(const MPS& m) {
  if (m.sites() < 2) return 0.0;
  const auto sv = m.schmidt_values();
  return entanglement_entropy(sv[static_cast<std::size_t>(m.sites() / 2 - 1)]);
}

enum class SchmidtConvention {
  Probabilities,  // lambda_j = reduced density matrix eigenvalues (squares)
  Amplitudes      // lambda_j = singular values
};

/// Discarded Schmidt weight beyond rank chi at the middle cut.
inline double truncation_weight(const Eigen::VectorXd& schmidt, int chi,
                                SchmidtConvention conv = SchmidtConvention::Probabilities) {
  if (chi < 0) throw ConfigError("chi must be >= 0");
  double f = 0.0;
  for (Eigen::Index j = chi; j < schmidt.size(); ++j)
    f += conv == SchmidtConvention::Probabilities ? schmidt[j] * schmidt[j] : schmidt[j];
  return f;
}

inline double truncation_weight(const MPS& m, int chi, SchmidtConvention conv = SchmidtConvention::Probabilities) {
  if (m.sites() < 2) return 0.0;
  const auto sv = m.schmidt_values();
  return truncation_weight(sv[static_cast<std::size_t>(m.sites() / 2 - 1)], chi, conv);
}

// ---------------------------------------------------------------------------
// Matrix product operators

struct MpoEntry {
  int left = 0;
  int right = 0;
  Eigen::Matrix2cd op;
};

/// Site s carries entries between bond spaces dims[s] and dims[s+1]; the
/// boundary spaces are one-dimensional.
struct Mpo {
  std::vector<int> dims;
  std::vector<std::vector<MpoEntry>> sites;

  int size() const { return static_cast<int>(sites.size()); }
  int max_bond() const { return *std::max_element(dims.begin(), dims.end()); }

  DenseMatrix to_dense() const {
    const int n = size();
    if (n > 12) throw ResourceError("dense MPO contraction limited to 12 sites");
    // acc[b] is the operator on the processed prefix ending in bond state b.
    std::vector<DenseMatrix> acc(static_cast<std::size_t>(dims[0]), DenseMatrix::Ones(1, 1));
    for (int s = 0; s < n; ++s) {
      const Eigen::Index d = acc[0].rows() * 2;
      std::vector<DenseMatrix> next(static_cast<std::size_t>(dims[static_cast<std::size_t>(s) + 1]), DenseMatrix::Zero(d, d));
      for (const auto& e : sites[static_cast<std::size_t>(s)]) {
        const auto& a = acc[static_cast<std::size_t>(e.left)];
        auto& out = next[static_cast<std::size_t>(e.right)];
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c)
            if (e.op(r, c) != cplx(0.0))
              for (Eigen::Index i = 0; i < a.rows(); ++i)
                for (Eigen::Index j = 0; j < a.cols(); ++j) out(2 * i + r, 2 * j + c) += a(i, j) * e.op(r, c);
      }
      acc = std::move(next);
    }
    return acc[0];
  }
};

namespace detail {

inline Eigen::Matrix2cd pauli_matrix(Pauli p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -kI, kI, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

}  // namespace detail

/// Finite-state automaton MPO. Bonds left of the middle label a running
/// term by its prefix, bonds to the right by its suffix, so shared prefixes
/// and suffixes share bond states. Each coefficient sits on the single
/// transition from the prefix side to the suffix side.
inline Mpo build_mpo(const SpinOperator& h) {
  const int n = h.qubits();
  if (n < 1) throw ShapeError("MPO needs at least one site");
  const int mid = n / 2;
  enum : int { kIdle = 0, kDone = 1 };
  std::vector<std::map<std::string, int>> keys(static_cast<std::size_t>(n) + 1);
  auto state = [&](const std::vector<Pauli>& l, int lo, int hi, int k) -> int {
    // bond k lies between sites k and k+1; k = -1 and k = n-1 are the ends
    if (k < lo) return kIdle;
    if (k >= hi) return kDone;
    std::string key;
    if (k < mid) {
      key = "P" + std::to_string(lo) + ":";
      for (int q = lo; q <= k; ++q) key.push_back(pauli_char(l[static_cast<std::size_t>(q)]));
    } else {
      key = "S" + std::to_string(hi) + ":";
      for (int q = k + 1; q <= hi; ++q) key.push_back(pauli_char(l[static_cast<std::size_t>(q)]));
    }
    auto& m = keys[static_cast<std::size_t>(k) + 1];
    auto it = m.find(key);
    if (it != m.end()) return it->second;
    const int id = 2 + static_cast<int>(m.size());
    m.emplace(key, id);
    return id;
  };
  auto is_prefix_side = [&](int k, int st) { return st == kIdle || (st >= 2 && k < mid); };
  auto is_suffix_side = [&](int k, int st) { return st == kDone || (st >= 2 && k >= mid); };

  std::vector<std::map<std::pair<int, int>, Eigen::Matrix2cd>> carry(static_cast<std::size_t>(n));
  std::vector<std::map<std::pair<int, int>, Pauli>> fixed(static_cast<std::size_t>(n));
  for (const auto& p : h.strings()) {
    const auto sup = p.support();
    const int lo = sup.empty() ? 0 : sup.front();
    const int hi = sup.empty() ? 0 : sup.back();
    for (int s = 0; s < n; ++s) {
      const int a = state(p.letters, lo, hi, s - 1);
      const int b = state(p.letters, lo, hi, s);
      const Pauli letter = p.letters[static_cast<std::size_t>(s)];
      if (is_prefix_side(s - 1, a) && is_suffix_side(s, b)) {
        auto [it, fresh] = carry[static_cast<std::size_t>(s)].try_emplace({a, b}, Eigen::Matrix2cd::Zero());
        it->second += p.coeff * detail::pauli_matrix(letter);
      } else {
        auto [it, fresh] = fixed[static_cast<std::size_t>(s)].try_emplace({a, b}, letter);
        if (it->second != letter) throw ShapeError("inconsistent MPO automaton transition");
      }
    }
  }
  Mpo mpo;
  mpo.dims.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int k = 0; k <= n; ++k) mpo.dims[static_cast<std::size_t>(k)] = 2 + static_cast<int>(keys[static_cast<std::size_t>(k)].size());
  mpo.sites.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    auto& es = mpo.sites[static_cast<std::size_t>(s)];
    es.push_back({kIdle, kIdle, Eigen::Matrix2cd::Identity()});
    es.push_back({kDone, kDone, Eigen::Matrix2cd::Identity()});
    for (const auto& [ab, m] : carry[static_cast<std::size_t>(s)]) es.push_back({ab.first, ab.second, m});
    for (const auto& [ab, l] : fixed[static_cast<std::size_t>(s)]) {
      if ((ab.first == kIdle && ab.second == kIdle) || (ab.first == kDone && ab.second == kDone)) continue;
      es.push_back({ab.first, ab.second, detail::pauli_matrix(l)});
    }
  }
  // Collapse the one-dimensional boundary spaces: left end starts idle,
  // right end must be done.
  auto restrict = [&](int s, bool left_end) {
    auto& es = mpo.sites[static_cast<std::size_t>(s)];
    std::vector<MpoEntry> kept;
    for (auto e : es) {
      if (left_end) {
        if (e.left != kIdle) continue;
        e.left = 0;
      } else {
        if (e.right != kDone) continue;
        e.right = 0;
      }
      kept.push_back(e);
    }
    es = std::move(kept);
  };
  restrict(0, true);
  restrict(n - 1, false);
  mpo.dims.front() = 1;
  mpo.dims.back() = 1;
  return mpo;
}

/// <psi|H|psi> for a normalized or unnormalized MPS.
inline cplx expectation(const MPS& m, const Mpo& w) {
  if (m.sites() != w.size()) throw ShapeError("MPS and MPO lengths differ");
  std::vector<DenseMatrix> env(1, DenseMatrix::Ones(1, 1));
  for (int s = 0; s < m.sites(); ++s) {
    const auto& a = m.site(s);
    std::vector<DenseMatrix> next(static_cast<std::size_t>(w.dims[static_cast<std::size_t>(s) + 1]),
                                  DenseMatrix::Zero(a[0].cols(), a[0].cols()));
    for (const auto& e : w.sites[static_cast<std::size_t>(s)]) {
      const auto& l = env[static_cast<std::size_t>(e.left)];
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          if (e.op(r, c) != cplx(0.0))
            next[static_cast<std::size_t>(e.right)].noalias() += e.op(r, c) * (a[static_cast<std::size_t>(r)].adjoint() * l * a[static_cast<std::size_t>(c)]);
    }
    env = std::move(next);
  }
  return env[0](0, 0);
}

// ---------------------------------------------------------------------------
// Two-site DMRG

struct DmrgOptions {
  int chi_max = 64;
  int max_sweeps = 40;
  double tol = 1e-9;
  double svd_cutoff = 1e-14;
  int chi_init = 8;
  int krylov = 40;
  double local_tol = 1e-12;
  std::uint64_t seed = 12345;
};

struct DmrgResult {
  MPS state;
  double energy = 0.0;
  std::vector<double> sweep_energies;
  double max_discarded = 0.0;
  bool converged = false;
  std::string message;
};

namespace detail {

// Lowest eigenpair of a Hermitian operator by restarted Lanczos with full
// reorthogonalization, started from v.
template <class Apply>
double lowest_eigenpair(const Apply& apply, StateVector& v, int krylov, double tol, int restarts = 50) {
  const Eigen::Index dim = v.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(krylov, dim));
  if (v.norm() == 0.0) v.setOnes();
  v.normalize();
  double theta = 0.0;
  StateVector w(dim);
  for (int rs = 0; rs < restarts; ++rs) {
    std::vector<StateVector> q{v};
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m_max, m_max);
    int m = 0;
    for (; m < m_max; ++m) {
      apply(q[static_cast<std::size_t>(m)], w);
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= m; ++j) {
          const cplx c = q[static_cast<std::size_t>(j)].dot(w);
          if (pass == 0) t(j, m) += c.real();
          w -= c * q[static_cast<std::size_t>(j)];
        }
      const double b = w.norm();
      if (m + 1 == m_max || b < 1e-13) {
        ++m;
        break;
      }
      q.push_back(w / b);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(m, m).selfadjointView<Eigen::Upper>());
    theta = es.eigenvalues()[0];
    StateVector x = StateVector::Zero(dim);
    for (int j = 0; j < m; ++j) x += es.eigenvectors()(j, 0) * q[static_cast<std::size_t>(j)];
    x.normalize();
    apply(x, w);
    const double res = (w - theta * x).norm();
    v = x;
    if (res <= tol * std::max(1.0, std::abs(theta)) || m == dim) break;
  }
  return theta;
}

class DmrgWorkspace {
 public:
  DmrgWorkspace(const Mpo& w, MPS& psi) : w_(w), psi_(psi), n_(psi.sites()) {
    left_.resize(static_cast<std::size_t>(n_) + 1);
    right_.resize(static_cast<std::size_t>(n_) + 1);
    left_[0] = {DenseMatrix::Ones(1, 1)};
    right_[static_cast<std::size_t>(n_)] = {DenseMatrix::Ones(1, 1)};
    for (int s = n_ - 1; s >= 2; --s) update_right(s);
  }

  // left_[s]: environment of sites < s; right_[s]: of sites >= s.
  void update_left(int s) {
    const auto& a = psi_.site(s);
    const auto& l = left_[static_cast<std::size_t>(s)];
    std::vector<DenseMatrix> next(static_cast<std::size_t>(w_.dims[static_cast<std::size_t>(s) + 1]),
                                  DenseMatrix::Zero(a[0].cols(), a[0].cols()));
    std::vector<std::array<DenseMatrix, 2>> la(l.size());
    for (const auto& e : w_.sites[static_cast<std::size_t>(s)])
      if (la[static_cast<std::size_t>(e.left)][0].size() == 0)
        for (int c = 0; c < 2; ++c) la[static_cast<std::size_t>(e.left)][static_cast<std::size_t>(c)] = l[static_cast<std::size_t>(e.left)] * a[static_cast<std::size_t>(c)];
    for (const auto& e : w_.sites[static_cast<std::size_t>(s)])
      for (int r = 0; r < 2; ++r) {
        DenseMatrix sum = DenseMatrix::Zero(a[0].rows(), a[0].cols());
        bool any = false;
        for (int c = 0; c < 2; ++c)
          if (e.op(r, c) != cplx(0.0)) {
            sum += e.op(r, c) * la[static_cast<std::size_t>(e.left)][static_cast<std::size_t>(c)];
            any = true;
          }
        if (any) next[static_cast<std::size_t>(e.right)].noalias() += a[static_cast<std::size_t>(r)].adjoint() * sum;
      }
    left_[static_cast<std::size_t>(s) + 1] = std::move(next);
  }

  void update_right(int s) {
    const auto& b = psi_.site(s);
    const auto& r = right_[static_cast<std::size_t>(s) + 1];
    std::vector<DenseMatrix> next(static_cast<std::size_t>(w_.dims[static_cast<std::size_t>(s)]),
                                  DenseMatrix::Zero(b[0].rows(), b[0].rows()));
    std::vector<std::array<DenseMatrix, 2>> br(r.size());
    for (const auto& e : w_.sites[static_cast<std::size_t>(s)])
      if (br[static_cast<std::size_t>(e.right)][0].size() == 0)
        for (int c = 0; c < 2; ++c) br[static_cast<std::size_t>(e.right)][static_cast<std::size_t>(c)] = b[static_cast<std::size_t>(c)] * r[static_cast<std::size_t>(e.right)];
    for (const auto& e : w_.sites[static_cast<std::size_t>(s)])
      for (int rr = 0; rr < 2; ++rr) {
        DenseMatrix sum = DenseMatrix::Zero(b[0].rows(), b[0].cols());
        bool any = false;
        for (int c = 0; c < 2; ++c)
          if (e.op(rr, c) != cplx(0.0)) {
            sum += e.op(rr, c) * br[static_cast<std::size_t>(e.right)][static_cast<std::size_t>(c)];
            any = true;
          }
        if (any) next[static_cast<std::size_t>(e.left)].noalias() += sum * b[static_cast<std::size_t>(rr)].adjoint();
      }
    right_[static_cast<std::size_t>(s)] = std::move(next);
  }

  // Two-site effective Hamiltonian on theta stored as blocks (s1, s2) of
  // size Dl x Dr, flattened block-major.
  void apply_two_site(int s, Eigen::Index dl, Eigen::Index dr, const StateVector& in, StateVector& out) const {
    const auto& l = left_[static_cast<std::size_t>(s)];
    const auto& r = right_[static_cast<std::size_t>(s) + 2];
    const auto& w1 = w_.sites[static_cast<std::size_t>(s)];
    const auto& w2 = w_.sites[static_cast<std::size_t>(s) + 1];
    const Eigen::Index blk = dl * dr;
    auto theta = [&](int a, int b) { return Eigen::Map<const DenseMatrix>(in.data() + (2 * a + b) * blk, dl, dr); };
    // L[a] theta^{s1 s2}
    std::vector<std::array<DenseMatrix, 4>> lt(l.size());
    for (const auto& e : w1) {
      auto& slot = lt[static_cast<std::size_t>(e.left)];
      if (slot[0].size() == 0)
        for (int k = 0; k < 4; ++k) slot[static_cast<std::size_t>(k)] = l[static_cast<std::size_t>(e.left)] * theta(k / 2, k % 2);
    }
    // Y[b]^{t1, s2} = sum op1(t1, s1) L[a] theta^{s1 s2}
    const auto mid = static_cast<std::size_t>(w_.dims[static_cast<std::size_t>(s) + 1]);
    std::vector<std::array<DenseMatrix, 4>> y(mid);
    for (const auto& e : w1)
      for (int t1 = 0; t1 < 2; ++t1)
        for (int s1 = 0; s1 < 2; ++s1) {
          const cplx c = e.op(t1, s1);
          if (c == cplx(0.0)) continue;
          auto& slot = y[static_cast<std::size_t>(e.right)];
          for (int s2 = 0; s2 < 2; ++s2) {
            auto& m = slot[static_cast<std::size_t>(2 * t1 + s2)];
            if (m.size() == 0) m = DenseMatrix::Zero(dl, dr);
            m += c * lt[static_cast<std::size_t>(e.left)][static_cast<std::size_t>(2 * s1 + s2)];
          }
        }
    // Z[c]^{t1 t2} = sum op2(t2, s2) Y[b]^{t1 s2}, then out += Z[c] R[c]
    std::vector<std::array<DenseMatrix, 4>> z(r.size());
    for (const auto& e : w2) {
      const auto& yb = y[static_cast<std::size_t>(e.left)];
      if (yb[0].size() == 0 && yb[1].size() == 0 && yb[2].size() == 0 && yb[3].size() == 0) continue;
      for (int t2 = 0; t2 < 2; ++t2)
        for (int s2 = 0; s2 < 2; ++s2) {
          const cplx c = e.op(t2, s2);
          if (c == cplx(0.0)) continue;
          for (int t1 = 0; t1 < 2; ++t1) {
            const auto& src = yb[static_cast<std::size_t>(2 * t1 + s2)];
            if (src.size() == 0) continue;
            auto& m = z[static_cast<std::size_t>(e.right)][static_cast<std::size_t>(2 * t1 + t2)];
            if (m.size() == 0) m = DenseMatrix::Zero(dl, dr);
            m += c * src;
          }
        }
    }
    out.setZero(in.size());
    for (std::size_t c = 0; c < z.size(); ++c)
      for (int k = 0; k < 4; ++k)
        if (z[c][static_cast<std::size_t>(k)].size() != 0)
          Eigen::Map<DenseMatrix>(out.data() + k * blk, dl, dr).noalias() += z[c][static_cast<std::size_t>(k)] * r[c];
  }

 private:
  const Mpo& w_;
  MPS& psi_;
  int n_;
  std::vector<std::vector<DenseMatrix>> left_, right_;
};

}  // namespace detail

inline DmrgResult dmrg_ground_state(const SpinOperator& h, const DmrgOptions& opt = {}) {
  if (!h.is_hermitian()) throw NotHermitianError("DMRG needs a Hermitian Hamiltonian");
  if (opt.chi_max < 1 || opt.max_sweeps < 1) throw ConfigError("chi_max and max_sweeps must be >= 1");
  const int n = h.qubits();
  const Mpo w = build_mpo(h);
  DmrgResult res;
  if (n == 1) {
    const DenseMatrix m = w.to_dense();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m);
    StateVector v = es.eigenvectors().col(0);
    res.state = MPS::from_statevector(v, 1);
    res.energy = es.eigenvalues()[0];
    res.sweep_energies = {res.energy};
    res.converged = true;
    return res;
  }
  MPS psi = MPS::random(n, std::min(opt.chi_init, opt.chi_max), opt.seed);
  detail::DmrgWorkspace ws(w, psi);
  double last = std::numeric_limits<double>::infinity();
  auto optimize = [&](int s, bool moving_right) {
    auto& a = psi.site(s);
    auto& b = psi.site(s + 1);
    const Eigen::Index dl = a[0].rows(), dr = b[0].cols();
    const Eigen::Index blk = dl * dr;
    StateVector theta(4 * blk);
    for (int k = 0; k < 4; ++k)
      Eigen::Map<DenseMatrix>(theta.data() + k * blk, dl, dr) = a[static_cast<std::size_t>(k / 2)] * b[static_cast<std::size_t>(k % 2)];
    auto apply = [&](const StateVector& in, StateVector& out) { ws.apply_two_site(s, dl, dr, in, out); };
    const double e = detail::lowest_eigenpair(apply, theta, opt.krylov, opt.local_tol);
    // M[(s1, alpha), (s2, beta)]
    DenseMatrix m(2 * dl, 2 * dr);
    for (int k = 0; k < 4; ++k)
      m.block((k / 2) * dl, (k % 2) * dr, dl, dr) = Eigen::Map<const DenseMatrix>(theta.data() + k * blk, dl, dr);
    Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < sv.size() && keep < opt.chi_max && sv[keep] > opt.svd_cutoff * sv[0]) ++keep;
    keep = std::max<Eigen::Index>(keep, 1);
    const double total = sv.squaredNorm();
    res.max_discarded = std::max(res.max_discarded, (total - sv.head(keep).squaredNorm()) / total);
    const Eigen::VectorXd kept = sv.head(keep) / sv.head(keep).norm();
    DenseMatrix u = svd.matrixU().leftCols(keep);
    DenseMatrix vh = svd.matrixV().leftCols(keep).adjoint();
    if (moving_right)
      vh = kept.cast<cplx>().asDiagonal() * vh;
    else
      u = u * kept.cast<cplx>().asDiagonal();
    for (int p = 0; p < 2; ++p) {
      a[static_cast<std::size_t>(p)] = u.middleRows(p * dl, dl);
      b[static_cast<std::size_t>(p)] = vh.middleCols(p * dr, dr);
    }
    return e;
  };
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double e = 0.0;
    for (int s = 0; s + 1 < n; ++s) {
      e = optimize(s, true);
      if (s + 2 < n) ws.update_left(s);
    }
    for (int s = n - 2; s >= 0; --s) {
      e = optimize(s, false);
      if (s > 0) ws.update_right(s + 1);
    }
    psi.set_center(0);
    res.sweep_energies.push_back(e);
    if (std::abs(e - last) < opt.tol) {
      res.converged = true;
      break;
    }
    last = e;
  }
  psi.normalize();
  res.energy = expectation(psi, w).real();
  res.state = std::move(psi);
  if (!res.converged)
    res.message = "energy change did not fall below " + std::to_string(opt.tol) + " within " +
                  std::to_string(opt.max_sweeps) + " sweeps at chi_max = " + std::to_string(opt.chi_max);
  return res;
}

// ---------------------------------------------------------------------------
// Bond-dimension and cost scaling

struct ScalingModel {
  int N = 1;
  double ma = 0.1;    // m a, dimensionless
  double eps = 1e-3;  // target precision
  double c = 1.0;     // central charge per species
  std::optional<double> k_override;

  void validate() const {
    if (N < 0) throw ConfigError("species count must be >= 0");
    if (!(ma > 0.0 && ma < 1.0)) throw ConfigError("m a must lie in (0, 1)");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("precision must lie in (0, 1)");
  }
  double entropy() const { return N * c / 6.0 * std::log(1.0 / ma); }
  double k() const {
    if (k_override) return *k_override;
    return std::exp(std::sqrt(2.0 * entropy() * std::log(1.0 / eps)));
  }
};

inline int predict_chi(const ScalingModel& m) {
  m.validate();
  return std::max(1, static_cast<int>(std::ceil(m.k() * std::exp(m.entropy()) - 1e-12)));
}

/// chi ~ eps^-(N/6 + sqrt(N/3)) when eps ~ m a.
inline double chi_exponent(int N) { return N / 6.0 + std::sqrt(N / 3.0); }

struct CostEstimate {
  double cost = 0.0;      // n chi^3
  double exponent = 0.0;  // eps exponent, negative
};

inline CostEstimate dmrg_cost_model(const ScalingModel& m, int n) {
  if (n < 1) throw ConfigError("site count must be >= 1");
  const double chi = predict_chi(m);
  return {n * chi * chi * chi, -(m.N / 2.0 + 1.0 + std::sqrt(3.0 * m.N))};
}

struct EntropyFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms
  double reference_slope = 1.0 / 6.0;
};

/// Least-squares fit of S against ln(1/(m a)).
inline EntropyFit entropy_scaling_check(const std::vector<std::pair<double, double>>& runs, int N = 1) {
  if (runs.size() < 3) throw DegenerateInputError("entropy fit needs at least three runs");
  const double n = static_cast<double>(runs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [ma, s] : runs) {
    if (!(ma > 0.0)) throw ConfigError("m a must be > 0");
    const double x = std::log(1.0 / ma);
    sx += x;
    sy += s;
    sxx += x * x;
    sxy += x * s;
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) <= 1e-14 * std::max(1.0, n * sxx)) throw DegenerateInputError("all runs share the same m a");
  EntropyFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double r2 = 0.0;
  for (const auto& [ma, s] : runs) {
    const double d = s - (f.intercept + f.slope * std::log(1.0 / ma));
    r2 += d * d;
  }
  f.residual = std::sqrt(r2 / n);
  f.reference_slope = N / 6.0;
  return f;
}

}  // namespace gnprep
