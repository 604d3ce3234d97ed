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
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "gnprep/core.hpp"
#include "gnprep/operator_algebra.hpp"

namespace gnprep {

/// Lowest eigenpairs of a Hamiltonian, ascending. Columns of `vectors` are
/// the eigenvectors of the corresponding energies.
struct Spectrum {
  Eigen::VectorXd energies;
  DenseMatrix vectors;

  int size() const { return static_cast<int>(energies.size()); }
  double gap() const {
    if (size() < 2) throw ShapeError("gap needs at least two levels");
    return energies[1] - energies[0];
  }
  /// omega_{ij} = E_i - E_j.
  double omega(int i, int j) const { return energies[i] - energies[j]; }
  /// The interacting particle mass read off the spectrum: E_1 - E_0.
  double renormalized_mass() const { return gap(); }

  Spectrum shifted(double c) const {
    Spectrum s = *this;
    s.energies.array() += c;
    return s;
  }
};

struct EigensolveOptions {
  int qubit_cap = kDefaultQubitCap;
  double tol = 1e-10;          // Lanczos residual target relative to the norm bound
  int max_krylov = 120;
  int max_restarts = 200;
  std::uint64_t seed = 20240611;
  bool force_sparse = false;
};

namespace detail {

// Sign/phase gauge: the largest-modulus entry (first one on ties) is made real positive.
inline void fix_phase(Eigen::Ref<StateVector> v) {
  Eigen::Index best = 0;
  double mx = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > mx * (1.0 + 1e-9) + 1e-14) {
      mx = m;
      best = i;
    }
  }
  if (mx > 0.0) v *= std::conj(v[best]) / std::abs(v[best]);
}

inline Eigen::Index first_significant(const StateVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 1e-8) return i;
  return v.size();
}

// Orders eigenpairs by energy, then degenerate ones by first significant
// amplitude index.
inline Spectrum sorted_spectrum(std::vector<std::pair<double, StateVector>> pairs, int keep) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i + 1;
    while (j < pairs.size() && pairs[j].first - pairs[i].first <= 1e-10 * std::max(1.0, std::abs(pairs[i].first))) ++j;
    std::vector<double> e;
    for (std::size_t c = i; c < j; ++c) e.push_back(pairs[c].first);
    std::stable_sort(pairs.begin() + static_cast<long>(i), pairs.begin() + static_cast<long>(j),
                     [](const auto& x, const auto& y) { return first_significant(x.second) < first_significant(y.second); });
    for (std::size_t c = i; c < j; ++c) pairs[c].first = e[c - i];
    i = j;
  }
  const std::size_t k = keep <= 0 ? pairs.size() : std::min(pairs.size(), static_cast<std::size_t>(keep));
  Spectrum s;
  s.energies.resize(static_cast<Eigen::Index>(k));
  s.vectors.resize(pairs.empty() ? 0 : pairs[0].second.size(), static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    s.energies[static_cast<Eigen::Index>(c)] = pairs[c].first;
    s.vectors.col(static_cast<Eigen::Index>(c)) = pairs[c].second;
  }
  return s;
}

}  // namespace detail

/// Connected components of the nonzero pattern of a square matrix.
inline std::vector<std::vector<Eigen::Index>> matrix_blocks(const DenseMatrix& h, double tol = 0.0) {
  const Eigen::Index d = h.rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(d));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  std::function<Eigen::Index(Eigen::Index)> find = [&](Eigen::Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (std::abs(h(i, j)) > tol) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }
  std::vector<std::vector<Eigen::Index>> out;
  std::vector<long> slot(static_cast<std::size_t>(d), -1);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto r = find(i);
    if (slot[static_cast<std::size_t>(r)] < 0) {
      slot[static_cast<std::size_t>(r)] = static_cast<long>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(i);
  }
  return out;
}

/// Full diagonalization of a Hermitian matrix, block by block.
inline Spectrum eigensolve_dense(const DenseMatrix& h, int k = 0) {
  if (h.rows() != h.cols()) throw ShapeError("eigensolve needs a square matrix");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw NotHermitianError("matrix is not Hermitian");
  std::vector<std::pair<double, StateVector>> pairs;
  pairs.reserve(static_cast<std::size_t>(h.rows()));
  for (const auto& block : matrix_blocks(h)) {
    const auto m = static_cast<Eigen::Index>(block.size());
    DenseMatrix sub(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = h(block[static_cast<std::size_t>(i)], block[static_cast<std::size_t>(j)]);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(sub);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    for (Eigen::Index c = 0; c < m; ++c) {
      StateVector v = StateVector::Zero(h.rows());
      for (Eigen::Index i = 0; i < m; ++i) v[block[static_cast<std::size_t>(i)]] = es.eigenvectors()(i, c);
      detail::fix_phase(v);
      pairs.emplace_back(es.eigenvalues()[c], std::move(v));
    }
  }
  return detail::sorted_spectrum(std::move(pairs), k);
}

/// k lowest eigenpairs by Lanczos with full reorthogonalization, locking one
/// converged pair per run and deflating it from every later Krylov space.
template <class Apply>
Spectrum lanczos_lowest(const Apply& apply, Eigen::Index dim, int k, double norm_bound,
                        const EigensolveOptions& opt = {}) {
  if (k < 1 || k > dim) throw ShapeError("requested level count outside 1..dim");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::vector<StateVector> locked;
  std::vector<double> values;
  const double target = opt.tol * std::max(1.0, norm_bound);
  const Eigen::Index m_max = std::min<Eigen::Index>(dim, opt.max_krylov);

  auto deflate = [&](StateVector& v, const std::vector<StateVector>& basis) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b * b.dot(v);
  };
  // Both sets in every pass, so removing Krylov components cannot
  // reintroduce locked ones.
  auto deflate_both = [&](StateVector& v, const std::vector<StateVector>& krylov) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : locked) v -= b * b.dot(v);
      for (const auto& b : krylov) v -= b * b.dot(v);
    }
  };

  StateVector hv;
  for (int level = 0; level < k; ++level) {
    StateVector start(dim);
    for (auto& c : start) c = cplx(gauss(rng), gauss(rng));
    deflate(start, locked);
    start.normalize();
    bool converged = false;
    double theta = 0.0;
    StateVector ritz;
    for (int restart = 0; restart < opt.max_restarts && !converged; ++restart) {
      const Eigen::Index room = std::min<Eigen::Index>(m_max, dim - static_cast<Eigen::Index>(locked.size()));
      std::vector<StateVector> q{start};
      DenseMatrix t = DenseMatrix::Zero(room, room);
      for (Eigen::Index j = 0; j < room; ++j) {
        apply(q.back(), hv);
        // Rayleigh-Ritz column: exact projection even when the three-term
        // recurrence has drifted.
        for (Eigen::Index i = 0; i <= j; ++i) {
          t(i, j) = q[static_cast<std::size_t>(i)].dot(hv);
          t(j, i) = std::conj(t(i, j));
        }
        t(j, j) = t(j, j).real();
        if (j + 1 == room) break;
        deflate_both(hv, q);
        const double b = hv.norm();
        if (b < 1e-9 * std::max(1.0, norm_bound)) {
          // invariant subspace reached: continue from a fresh orthogonal direction
          for (auto& c : hv) c = cplx(gauss(rng), gauss(rng));
          deflate_both(hv, q);
          hv.normalize();
          q.push_back(hv);
          continue;
        }
        q.push_back(hv / b);
      }
      const auto m = static_cast<Eigen::Index>(q.size());
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(t.topLeftCorner(m, m));
      ritz = StateVector::Zero(dim);
      for (Eigen::Index i = 0; i < m; ++i) ritz += q[static_cast<std::size_t>(i)] * es.eigenvectors()(i, 0);
      deflate(ritz, locked);
      ritz.normalize();
      apply(ritz, hv);
      theta = ritz.dot(hv).real();
      hv -= theta * ritz;
      deflate(hv, locked);
      const double res = hv.norm();
      converged = res <= target;
      start = ritz;
    }
    if (!converged) throw ConvergenceError("Lanczos did not converge for level " + std::to_string(level));
    detail::fix_phase(ritz);
    locked.push_back(ritz);
    values.push_back(theta);
  }
  std::vector<std::pair<double, StateVector>> pairs;
  for (std::size_t i = 0; i < values.size(); ++i) pairs.emplace_back(values[i], locked[i]);
  return detail::sorted_spectrum(std::move(pairs), k);
}

/// k lowest levels of a Hermitian Pauli sum (k <= 0: all, dense path only).
inline Spectrum eigensolve(const SpinOperator& h, int k, const EigensolveOptions& opt = {}) {
  check_qubit_cap(h.qubits(), opt.qubit_cap);
  if (!h.is_hermitian()) throw NotHermitianError("Pauli sum has non-real coefficients");
  if (h.qubits() <= kDenseQubitLimit && !opt.force_sparse) return eigensolve_dense(to_dense(h), k);
  const Eigen::Index dim = static_cast<Eigen::Index>(pow2(h.qubits()));
  if (k <= 0) throw ResourceError("full spectrum requested above the dense limit");
  const SparseMatrix m = to_sparse(h, opt.qubit_cap);
  auto apply = [&m](const StateVector& in, StateVector& out) { out = m * in; };
  return lanczos_lowest(apply, dim, k, h.coefficient_norm(), opt);
}

/// max_i ||H v_i - E_i v_i|| over the reported pairs.
inline double max_residual(const SpinOperator& h, const Spectrum& s) {
  const PauliSumMap map(h);
  double worst = 0.0;
  StateVector hv;
  for (int i = 0; i < s.size(); ++i) {
    map.apply(s.vectors.col(i), hv);
    worst = std::max(worst, (hv - s.energies[i] * s.vectors.col(i)).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Detuning

/// delta = min over mu < nu <= eta, sign k of |(-1)^k omega + E_mu - E_eta|.
inline double detuning(const Eigen::VectorXd& e, double omega, int nu, double collision_tol = 1e-12) {
  if (nu < 1 || nu >= e.size()) throw ShapeError("detuning needs more than nu resolved levels");
  double best = std::numeric_limits<double>::infinity();
  for (int mu = 0; mu < nu; ++mu)
    for (Eigen::Index eta = nu; eta < e.size(); ++eta)
      for (double s : {-1.0, 1.0}) best = std::min(best, std::abs(s * omega + e[mu] - e[eta]));
  if (best <= collision_tol * std::max(1.0, std::abs(omega)))
    throw ResonanceCollisionError("detuning vanishes: a driven transition is resonant with an unwanted level");
  return best;
}

inline double detuning(const Spectrum& s, double omega, int nu) { return detuning(s.energies, omega, nu); }

/// As detuning(), but only pairs (mu, eta) with |W_{mu eta}| > coupling_tol
/// in the eigenbasis take part.
inline double coupled_detuning(const Eigen::VectorXd& e, const DenseMatrix& w_eig, double omega, int nu,
                               double coupling_tol = 1e-10, double collision_tol = 1e-12) {
  if (nu < 1 || nu >= e.size()) throw ShapeError("detuning needs more than nu resolved levels");
  if (w_eig.rows() != e.size() || w_eig.cols() != e.size()) throw ShapeError("drive matrix does not match spectrum");
  double best = std::numeric_limits<double>::infinity();
  for (int mu = 0; mu < nu; ++mu)
    for (Eigen::Index eta = nu; eta < e.size(); ++eta) {
      if (std::abs(w_eig(mu, eta)) <= coupling_tol) continue;
      for (double s : {-1.0, 1.0}) best = std::min(best, std::abs(s * omega + e[mu] - e[eta]));
    }
  if (best <= collision_tol * std::max(1.0, std::abs(omega)))
    throw ResonanceCollisionError("coupled detuning vanishes");
  return best;
}

// ---------------------------------------------------------------------------
// Time evolution

struct EvolutionOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double initial_step = 1e-3;
  double min_step = 1e-13;
  std::size_t max_steps = 200'000'000;
  double error_budget = 1e-8;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<std::vector<double>> overlaps;  // |<target_k|psi(t)>|^2 per time
  std::vector<double> norms;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double error_estimate = 0.0;  // accumulated local tolerance, a crude global bound
  double error_budget = 0.0;

  const StateVector& final_state() const { return states.back(); }
  bool within_budget() const { return error_estimate <= error_budget; }

  void write_csv(std::ostream& os) const {
    os << "t[1/energy]";
    const std::size_t nt = overlaps.empty() ? 0 : overlaps.front().size();
    for (std::size_t k = 0; k < nt; ++k) os << ",overlap_" << k << "[probability]";
    os << ",norm[1]\n";
    os.precision(15);
    for (std::size_t i = 0; i < times.size(); ++i) {
      os << times[i];
      for (double o : overlaps[i]) os << ',' << o;
      os << ',' << norms[i] << '\n';
    }
  }
};

namespace detail {

using OdeState = std::vector<cplx>;

inline StateVector to_eigen(const OdeState& x) {
  return Eigen::Map<const StateVector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

inline void record(EvolutionResult& r, double t, const StateVector& psi, const std::vector<StateVector>& targets) {
  r.times.push_back(t);
  r.states.push_back(psi);
  r.norms.push_back(psi.norm());
  std::vector<double> ov;
  for (const auto& tg : targets) ov.push_back(std::norm(tg.dot(psi)));
  r.overlaps.push_back(std::move(ov));
}

}  // namespace detail

/// Integrates i d/dt psi = H(t) psi with an adaptive Runge-Kutta-Fehlberg 7(8)
/// pair. `apply(t, psi, out)` must set out = H(t) psi.
template <class ApplyH>
EvolutionResult integrate_schrodinger(const ApplyH& apply, const StateVector& psi0, const std::vector<double>& grid,
                                      const std::vector<StateVector>& targets, const EvolutionOptions& opt = {}) {
  namespace ode = boost::numeric::odeint;
  if (grid.empty()) throw ConfigError("time grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] >= grid[i - 1])) throw ConfigError("time grid must be nondecreasing");
  for (const auto& tg : targets)
    if (tg.size() != psi0.size()) throw ShapeError("target state dimension mismatch");

  const auto dim = psi0.size();
  StateVector in(dim), out(dim);
  auto system = [&](const detail::OdeState& x, detail::OdeState& dxdt, double t) {
    in = Eigen::Map<const StateVector>(x.data(), dim);
    apply(t, in, out);
    dxdt.resize(x.size());
    Eigen::Map<StateVector>(dxdt.data(), dim) = -kI * out;
  };

  auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_fehlberg78<detail::OdeState>());
  detail::OdeState x(psi0.data(), psi0.data() + dim);
  EvolutionResult r;
  r.error_budget = opt.error_budget;
  double t = grid.front();
  double dt = opt.initial_step;
  detail::record(r, t, psi0, targets);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double t_next = grid[g];
    while (t < t_next) {
      const bool last = dt >= t_next - t;
      double h = last ? t_next - t : dt;
      const double before = t;
      const auto res = stepper.try_step(system, x, t, h);
      if (res == ode::success) {
        ++r.accepted_steps;
        r.error_estimate += opt.rel_tol;
        if (last) t = t_next;  // exact landing on the grid
        dt = last ? std::max(dt, h) : h;
      } else {
        ++r.rejected_steps;
        dt = h;
        if (dt < opt.min_step * std::max(1.0, std::abs(before)))
          throw StiffnessError("step size underflow at t = " + std::to_string(before));
      }
      if (r.accepted_steps + r.rejected_steps > opt.max_steps) throw StiffnessError("step budget exhausted");
    }
    detail::record(r, t, detail::to_eigen(x), targets);
  }
  return r;
}

/// H(t) = H0 + lambda cos(omega t) W on an explicit matrix representation.
template <class Mat>
EvolutionResult evolve_driven(const Mat& h0, const Mat& w, double lambda, double omega, const std::vector<double>& grid,
                              const StateVector& psi0, const std::vector<StateVector>& targets,
                              const EvolutionOptions& opt = {}) {
  if (h0.rows() != psi0.size() || w.rows() != psi0.size()) throw ShapeError("operator and state dimensions differ");
  StateVector tmp(psi0.size());
  auto apply = [&](double t, const StateVector& in, StateVector& out) {
    out.noalias() = h0 * in;
    tmp.noalias() = w * in;
    out += (lambda * std::cos(omega * t)) * tmp;
  };
  return integrate_schrodinger(apply, psi0, grid, targets, opt);
}

/// Pauli-sum front end; psi0 defaults to the ground state of H0.
inline EvolutionResult evolve_driven(const SpinOperator& h0, const SpinOperator& w, double lambda, double omega,
                                     const std::vector<double>& grid, std::vector<StateVector> targets = {},
                                     std::optional<StateVector> psi0 = std::nullopt, const EvolutionOptions& opt = {},
                                     int cap = kDefaultQubitCap) {
  if (h0.qubits() != w.qubits()) throw ShapeError("H0 and W act on different registers");
  check_qubit_cap(h0.qubits(), cap);
  if (!psi0) {
    EigensolveOptions eo;
    eo.qubit_cap = cap;
    psi0 = eigensolve(h0, 1, eo).vectors.col(0);
  }
  if (targets.empty()) targets.push_back(*psi0);
  const SparseMatrix mh = to_sparse(h0, cap), mw = to_sparse(w, cap);
  return evolve_driven(mh, mw, lambda, omega, grid, *psi0, targets, opt);
}

/// Evenly spaced grid of `points` times on [0, t_end].
inline std::vector<double> uniform_grid(double t_end, int points) {
  if (points < 2) return {0.0, t_end};
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = t_end * i / (points - 1);
  return g;
}

// ---------------------------------------------------------------------------
// Product formulas

struct TrotterResult {
  StateVector state;
  int order = 2;
  int steps = 1;
  double fidelity_vs_reference = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct HermitianExp {
  Eigen::VectorXd values;
  DenseMatrix vectors;
  explicit HermitianExp(const DenseMatrix& h) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }
  // psi <- exp(-i c H) psi
  void apply(double c, StateVector& psi) const {
    StateVector y = vectors.adjoint() * psi;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] *= std::exp(-kI * c * values[i]);
    psi.noalias() = vectors * y;
  }
};

}  // namespace detail

/// Product-formula evolution of H0 + lambda cos(omega t) W from psi0 over
/// [0, t]. Within each sub-step the drive enters through its exact time
/// average, so commuting H0 and W are integrated exactly.
inline TrotterResult evolve_trotter(const DenseMatrix& h0, const DenseMatrix& w, double lambda, double omega, double t,
                                    int order, int steps, const StateVector& psi0) {
  if (order != 1 && order != 2 && order != 4) throw ConfigError("Trotter order must be 1, 2 or 4");
  if (steps < 1) throw ConfigError("Trotter step count must be >= 1");
  if (h0.rows() != psi0.size() || w.rows() != psi0.size()) throw ShapeError("operator and state dimensions differ");
  const detail::HermitianExp eh(h0), ew(w);
  auto drive_integral = [&](double t0, double t1) {
    if (omega == 0.0) return lambda * (t1 - t0);
    return lambda * (std::sin(omega * t1) - std::sin(omega * t0)) / omega;
  };
  StateVector psi = psi0;
  auto s1 = [&](double t0, double tau) {
    eh.apply(tau, psi);
    ew.apply(drive_integral(t0, t0 + tau), psi);
  };
  auto s2 = [&](double t0, double tau) {
    eh.apply(0.5 * tau, psi);
    ew.apply(drive_integral(t0, t0 + tau), psi);
    eh.apply(0.5 * tau, psi);
  };
  const double p = 1.0 / (4.0 - std::cbrt(4.0));
  const double tau = t / steps;
  for (int k = 0; k < steps; ++k) {
    double t0 = k * tau;
    switch (order) {
      case 1: s1(t0, tau); break;
      case 2: s2(t0, tau); break;
      case 4:
        for (double f : {p, p, 1.0 - 4.0 * p, p, p}) {
          s2(t0, f * tau);
          t0 += f * tau;
        }
        break;
    }
  }
  TrotterResult r;
  r.state = psi;
  r.order = order;
  r.steps = steps;
  return r;
}

/// Runs evolve_trotter and fills its fidelity against an ODE reference.
inline TrotterResult evolve_trotter_checked(const DenseMatrix& h0, const DenseMatrix& w, double lambda, double omega,
                                            double t, int order, int steps, const StateVector& psi0) {
  auto r = evolve_trotter(h0, w, lambda, omega, t, order, steps, psi0);
  const auto ref = evolve_driven(h0, w, lambda, omega, {0.0, t}, psi0, {});
  r.fidelity_vs_reference = std::abs(ref.final_state().dot(r.state));
  return r;
}

inline TrotterResult evolve_trotter(const SpinOperator& h0, const SpinOperator& w, double lambda, double omega,
                                    double t, int order, int steps, const StateVector& psi0) {
  return evolve_trotter(to_dense(h0), to_dense(w), lambda, omega, t, order, steps, psi0);
}

}  // namespace gnprep
