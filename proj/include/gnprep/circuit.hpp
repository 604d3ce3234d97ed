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

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "gnprep/core.hpp"
#include "gnprep/mps.hpp"

namespace gnprep {

/// V[(sigma, beta), alpha] = B^sigma_{alpha beta} for a right-canonical site.
struct Isometry {
  int site = 0;
  DenseMatrix matrix;

  double residual() const {
    return (matrix.adjoint() * matrix - DenseMatrix::Identity(matrix.cols(), matrix.cols())).norm();
  }
};

struct Gate {
  int site = 0;
  std::vector<int> window;  // contiguous qubits, most significant first
  DenseMatrix unitary;
  int fixed_columns = 0;
  long two_level = 0;

  double unitarity_residual() const {
    return (unitary.adjoint() * unitary - DenseMatrix::Identity(unitary.rows(), unitary.cols())).norm();
  }
};

struct CircuitDescription {
  int qubits = 0;
  int chi = 1;
  std::vector<Gate> gates;

  long two_level_count() const {
    long c = 0;
    for (const auto& g : gates) c += g.two_level;
    return c;
  }
  /// Measured constant in count <= C n chi^2.
  double gate_constant() const {
    return qubits == 0 ? 0.0 : static_cast<double>(two_level_count()) / (static_cast<double>(qubits) * chi * chi);
  }
};

inline MPS canonicalize(MPS m, CanonicalForm form) {
  m.canonicalize(form);
  return m;
}

inline int bits_for(int dim) {
  int k = 0;
  while ((1 << k) < dim) ++k;
  return k;
}

inline std::vector<Isometry> isometries(const MPS& right_canonical) {
  std::vector<Isometry> out;
  for (int i = 0; i < right_canonical.sites(); ++i) {
    const auto& b = right_canonical.site(i);
    const Eigen::Index dl = b[0].rows(), dr = b[0].cols();
    Isometry v;
    v.site = i;
    v.matrix.resize(2 * dr, dl);
    for (int p = 0; p < 2; ++p) v.matrix.middleRows(p * dr, dr) = b[static_cast<std::size_t>(p)].transpose();
    out.push_back(std::move(v));
  }
  return out;
}

/// Fills every column outside `fixed` with an orthonormal complement built by
/// Gram-Schmidt over the standard basis. Each new column has its first
/// nonzero entry real and positive.
inline DenseMatrix complete_unitary(const DenseMatrix& partial, const std::vector<bool>& fixed) {
  const Eigen::Index d = partial.rows();
  DenseMatrix u = partial;
  std::vector<StateVector> basis;
  for (Eigen::Index c = 0; c < d; ++c)
    if (fixed[static_cast<std::size_t>(c)]) basis.push_back(u.col(c));
  Eigen::Index candidate = 0;
  for (Eigen::Index c = 0; c < d; ++c) {
    if (fixed[static_cast<std::size_t>(c)]) continue;
    StateVector v;
    for (;; ++candidate) {
      if (candidate >= d) throw ConvergenceError("unitary completion ran out of candidates");
      v = StateVector::Zero(d);
      v[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) v -= b.dot(v) * b;
      if (v.norm() > 1e-8) break;
    }
    ++candidate;
    v.normalize();
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::abs(v[i]) > 1e-12) {
        v *= std::abs(v[i]) / v[i];
        v[i] = std::abs(v[i]);
        break;
      }
    basis.push_back(v);
    u.col(c) = v;
  }
  return u;
}

/// Sequential preparation from |0...0>: the gate for site i acts on qubits
/// i .. i + ceil(log2 chi_i), reading the left bond from its leading qubits
/// and writing the physical qubit followed by the right bond. Bonds that are
/// not powers of two are padded with unused basis states.
inline CircuitDescription compile(const MPS& input) {
  MPS m = canonicalize(input, CanonicalForm::Right);
  m.normalize();
  const int n = m.sites();
  CircuitDescription c;
  c.qubits = n;
  c.chi = m.max_bond();
  for (const auto& v : isometries(m)) {
    const int i = v.site;
    const int chi_l = static_cast<int>(m.site(i)[0].rows());
    const int chi_r = static_cast<int>(m.site(i)[0].cols());
    const int k_l = bits_for(chi_l), k_r = bits_for(chi_r);
    const int w = k_r + 1;
    if (i + w > n) throw ShapeError("bond dimension does not fit in the remaining register");
    if (k_l > w) throw ShapeError("left bond does not fit in the gate window");
    const Eigen::Index dim = Eigen::Index(1) << w;
    DenseMatrix partial = DenseMatrix::Zero(dim, dim);
    std::vector<bool> fixed(static_cast<std::size_t>(dim), false);
    for (int a = 0; a < chi_l; ++a) {
      const Eigen::Index col = Eigen::Index(a) << (w - k_l);
      fixed[static_cast<std::size_t>(col)] = true;
      for (int s = 0; s < 2; ++s)
        for (int b = 0; b < chi_r; ++b) partial((Eigen::Index(s) << k_r) + b, col) = v.matrix(s * chi_r + b, a);
    }
    Gate g;
    g.site = i;
    for (int q = i; q < i + w; ++q) g.window.push_back(q);
    g.unitary = complete_unitary(partial, fixed);
    g.fixed_columns = chi_l;
    // Givens rotations needed to fix chi_l columns of a dim x dim unitary.
    for (int col = 0; col < chi_l; ++col) g.two_level += static_cast<long>(dim - 1 - col);
    c.gates.push_back(std::move(g));
  }
  return c;
}

inline void apply_gate(StateVector& psi, int qubits, const Gate& g) {
  const int w = static_cast<int>(g.window.size());
  if (w == 0) return;
  const int q0 = g.window.front();
  if (q0 < 0 || q0 + w > qubits) throw ShapeError("gate window outside the register");
  const Eigen::Index dim = Eigen::Index(1) << w;
  const Eigen::Index low = Eigen::Index(1) << (qubits - q0 - w);
  const Eigen::Index high = Eigen::Index(1) << q0;
  StateVector in(dim), out(dim);
  for (Eigen::Index h = 0; h < high; ++h)
    for (Eigen::Index l = 0; l < low; ++l) {
      const Eigen::Index base = h * dim * low + l;
      for (Eigen::Index j = 0; j < dim; ++j) in[j] = psi[base + j * low];
      out.noalias() = g.unitary * in;
      for (Eigen::Index j = 0; j < dim; ++j) psi[base + j * low] = out[j];
    }
}

inline StateVector simulate_circuit(const CircuitDescription& c) {
  check_qubit_cap(c.qubits, kDefaultQubitCap);
  StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(pow2(c.qubits)));
  psi[0] = 1.0;
  for (const auto& g : c.gates) apply_gate(psi, c.qubits, g);
  return psi;
}

inline StateVector mps_to_statevector(const MPS& m) { return m.to_statevector(); }

inline double fidelity(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw ShapeError("state dimensions differ");
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0 && nb > 0.0)) throw DegenerateInputError("fidelity of a zero vector");
  return std::min(1.0, std::abs(a.dot(b)) / (na * nb));
}

inline double fidelity(const StateVector& a, const MPS& b) {
  const MPS bra = MPS::from_statevector(a, b.sites());
  const double nb = b.norm();
  return std::min(1.0, std::abs(MPS::overlap(bra, b)) / (a.norm() * nb));
}

inline nlohmann::json to_json(const CircuitDescription& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& g : c.gates) {
    nlohmann::json m = nlohmann::json::array();
    for (Eigen::Index r = 0; r < g.unitary.rows(); ++r)
      for (Eigen::Index k = 0; k < g.unitary.cols(); ++k) m.push_back({g.unitary(r, k).real(), g.unitary(r, k).imag()});
    gates.push_back({{"site", g.site}, {"window", g.window}, {"matrix", m}, {"two_level", g.two_level}});
  }
  return {{"qubits", c.qubits}, {"chi", c.chi}, {"two_level_count", c.two_level_count()}, {"gates", gates}};
}

inline CircuitDescription circuit_from_json(const nlohmann::json& j) {
  CircuitDescription c;
  c.qubits = j.at("qubits").get<int>();
  c.chi = j.value("chi", 1);
  for (const auto& jg : j.at("gates")) {
    Gate g;
    g.site = jg.value("site", 0);
    g.window = jg.at("window").get<std::vector<int>>();
    for (std::size_t i = 1; i < g.window.size(); ++i)
      if (g.window[i] != g.window[i - 1] + 1) throw ConfigError("gate window must be contiguous");
    const Eigen::Index dim = Eigen::Index(1) << g.window.size();
    const auto& m = jg.at("matrix");
    if (static_cast<Eigen::Index>(m.size()) != dim * dim) throw ShapeError("gate matrix does not match its window");
    g.unitary.resize(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index k = 0; k < dim; ++k) {
        const auto& e = m[static_cast<std::size_t>(r * dim + k)];
        g.unitary(r, k) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
      }
    g.two_level = jg.value("two_level", 0L);
    c.gates.push_back(std::move(g));
  }
  return c;
}

}  // namespace gnprep
