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
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gnprep/bessel.hpp"
#include "gnprep/core.hpp"
#include "gnprep/exact_engine.hpp"
#include "gnprep/jordan_wigner.hpp"
#include "gnprep/lattice_model.hpp"

namespace gnprep {

// ---------------------------------------------------------------------------
// Resonant two-level system H = -(omega/2) Z + lambda cos(omega t) X

struct TwoLevelFloquet {
  double splitting = 1.0;  // equals omega at resonance
  double lambda = 0.0;
  double omega = 1.0;
  double theta = std::numbers::pi / 2;
  double eps0 = -0.5;
  double eps1 = -0.5;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double kappa = 0.0;
  int bessel_order = 0;

  double gap() const { return eps1 - eps0; }
  double ratio() const { return lambda / omega; }
};

inline TwoLevelFloquet floquet_solution(double lambda, double omega) {
  if (!(omega > 0.0)) throw ConfigError("drive frequency must be > 0");
  if (!(lambda >= 0.0)) throw ConfigError("drive strength must be >= 0");
  TwoLevelFloquet s;
  s.splitting = omega;
  s.lambda = lambda;
  s.omega = omega;
  const double x2 = 2.0 * lambda / omega;
  const double j0 = bessel_j(0, x2), j1 = bessel_j(1, x2);
  if (lambda > 0.0) {
    s.theta = std::atan2(j1, 1.0 - j0);
    s.kappa = std::sin(std::numbers::pi * omega / lambda);
  }
  const double root = std::hypot(omega - omega * j0, omega * j1);
  s.eps0 = 0.5 * (-omega - root);
  s.eps1 = 0.5 * (-omega + root);
  s.beta0 = std::sin(0.5 * s.theta);
  s.beta1 = std::cos(0.5 * s.theta);
  s.bessel_order = bessel_truncation_order(lambda / omega);
  return s;
}

enum class FloquetSum { Resummed, Direct };

/// Closed-form state at time t with psi(0) = (1, 0). Direct evaluates the
/// Bessel sums term by term; Resummed uses the Jacobi-Anger identities.
inline StateVector floquet_state(const TwoLevelFloquet& s, double t, FloquetSum mode = FloquetSum::Resummed) {
  const double x = s.lambda / s.omega;
  const double s2 = s.beta0 * s.beta0, c2 = s.beta1 * s.beta1;
  const double half_sin = 0.5 * std::sin(s.theta);
  const cplx e0 = std::exp(-kI * s.eps0 * t), e1 = std::exp(-kI * s.eps1 * t);
  const cplx mix = s2 * e0 + c2 * e1;
  const double wt = s.omega * t;
  StateVector psi(2);
  if (mode == FloquetSum::Resummed) {
    const double phase = x * std::sin(wt);
    const cplx rot = std::exp(-kI * wt);
    psi[0] = std::cos(phase) * mix + rot * kI * std::sin(phase) * half_sin * (e0 - e1);
    psi[1] = rot * std::cos(phase) * half_sin * (e1 - e0) - kI * std::sin(phase) * mix;
    return psi;
  }
  const int kmax = s.bessel_order / 2 + 2;
  const auto j = bessel_j_table(std::min(2 * kmax + 1, kBesselOrderCap), x);
  auto jn = [&](int n) {
    const int an = std::abs(n);
    if (an >= static_cast<int>(j.size())) return 0.0;
    const double v = j[static_cast<std::size_t>(an)];
    return (n < 0 && an % 2) ? -v : v;
  };
  cplx up = 0.0, dn = 0.0;
  for (int k = -kmax; k <= kmax; ++k) {
    up += std::exp(kI * (2.0 * k * wt)) * (half_sin * jn(2 * k + 1) * (e0 - e1) + jn(2 * k) * mix);
    dn += std::exp(kI * ((2.0 * k - 1.0) * wt)) * (half_sin * jn(2 * k) * (e1 - e0) - jn(2 * k - 1) * mix);
  }
  psi[0] = up;
  psi[1] = dn;
  return psi;
}

/// Exact two-level dynamics by the adaptive integrator, psi(0) = (1, 0).
inline EvolutionResult two_level_evolve(double lambda, double omega, const std::vector<double>& grid,
                                        const EvolutionOptions& opt = {}) {
  DenseMatrix h0 = DenseMatrix::Zero(2, 2), w = DenseMatrix::Zero(2, 2);
  h0(0, 0) = -0.5 * omega;
  h0(1, 1) = 0.5 * omega;
  w(0, 1) = w(1, 0) = 1.0;
  StateVector psi0 = StateVector::Zero(2);
  psi0[0] = 1.0;
  StateVector excited = StateVector::Zero(2);
  excited[1] = 1.0;
  return evolve_driven(h0, w, lambda, omega, grid, psi0, {psi0, excited}, opt);
}

/// 1 - |<1|psi(pi/lambda)>| from the integrator.
inline double two_level_infidelity(double lambda, double omega, const EvolutionOptions& opt = {}) {
  const auto r = two_level_evolve(lambda, omega, {0.0, std::numbers::pi / lambda}, opt);
  return 1.0 - std::abs(r.final_state()[1]);
}

inline double theorem2_bound(double lambda, double omega) {
  const double x = lambda / omega;
  return x * x / std::sqrt(3.0);
}

struct TunedWindow {
  double lower = 0.0;
  double upper = 0.0;
  bool tuned = false;  // omega = (n + 1/2) lambda
};

inline TunedWindow tuned_window(double lambda, double omega) {
  const double x = lambda / omega;
  TunedWindow w;
  w.lower = std::numbers::pi / 48.0 * x * x * x * x;
  w.upper = theorem2_bound(lambda, omega);
  const double q = omega / lambda - 0.5;
  w.tuned = std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
  return w;
}

/// Smallest c4 >= 0 with infidelity <= x^2/sqrt(3) + c4 x^4 on every sample.
inline double fit_quartic_excess(const std::vector<double>& ratios, const std::vector<double>& infidelities) {
  if (ratios.size() != infidelities.size() || ratios.empty()) throw ShapeError("fit needs matched nonempty samples");
  double c4 = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double x = ratios[i];
    c4 = std::max(c4, (infidelities[i] - x * x / std::sqrt(3.0)) / (x * x * x * x));
  }
  return c4;
}

// ---------------------------------------------------------------------------
// Few-level projection

/// Rotates each degenerate cluster of V so that its first column is the
/// normalized projection of W V[:,0] onto the cluster.
inline DenseMatrix bright_state_adapt(const Eigen::VectorXd& e, DenseMatrix v, const DenseMatrix& w,
                                      double tol = 1e-9) {
  const Eigen::Index d = e.size();
  const StateVector w0 = w * v.col(0);
  Eigen::Index i = 1;
  while (i < d) {
    Eigen::Index j = i;
    while (j < d && std::abs(e[j] - e[i]) < tol) ++j;
    const Eigen::Index m = j - i;
    if (m > 1) {
      const DenseMatrix block = v.middleCols(i, m);
      StateVector b = block.adjoint() * w0;
      if (b.norm() > 1e-12) {
        b.normalize();
        DenseMatrix aug(m, m + 1);
        aug.col(0) = b;
        aug.rightCols(m) = DenseMatrix::Identity(m, m);
        Eigen::HouseholderQR<DenseMatrix> qr(aug);
        DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(m, m);
        const cplx ov = q.col(0).dot(b);
        q.col(0) *= ov / std::abs(ov);
        v.middleCols(i, m) = block * q;
      }
    }
    i = j;
  }
  return v;
}

struct DiagonalFreeDrive {
  DenseMatrix w;
  double removed_diagonal = 0.0;  // max |W_jj| before removal
  double scale = 1.0;             // factor applied after removal
};

/// Zeroes the eigenbasis diagonal of W and renormalizes to unit spectral norm.
inline DiagonalFreeDrive remove_diagonal(DenseMatrix w_eig) {
  DiagonalFreeDrive out;
  out.removed_diagonal = w_eig.diagonal().cwiseAbs().maxCoeff();
  w_eig.diagonal().setZero();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(w_eig, Eigen::EigenvaluesOnly);
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(norm > 0.0)) throw DegenerateInputError("drive has no off-diagonal matrix elements");
  out.scale = 1.0 / norm;
  out.w = w_eig * out.scale;
  return out;
}

struct FewLevelOptions {
  bool coupled_detuning = true;
  double coupling_tol = 1e-10;
  EvolutionOptions evolution{};
};

struct FewLevelRun {
  int nu = 0;
  double lambda = 0.0;
  double omega = 0.0;
  double t = 0.0;
  double delta = 0.0;
  std::vector<double> times;
  std::vector<double> overlaps;
  std::vector<double> bounds;
  double diagonal_removed = 0.0;

  double overlap() const { return overlaps.back(); }
  double bound() const { return bounds.back(); }
  double margin() const { return overlap() - bound(); }
  double min_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size(); ++i) m = std::min(m, overlaps[i] - bounds[i]);
    return m;
  }
  bool vacuous() const { return bound() < 0.0; }
};

inline double theorem1_bound(int nu, double lambda, double t, double delta) {
  if (std::isinf(delta)) return 1.0;
  return 1.0 - (2.0 * nu * lambda + 3.0 * nu * lambda * lambda * t) / delta;
}

/// Full and nu-level projected dynamics in the H0 eigenbasis, both from the
/// ground level. `w_eig` must already be diagonal-free.
inline FewLevelRun few_level_evolve(const Eigen::VectorXd& e, const DenseMatrix& w_eig, double lambda, double omega,
                                    int nu, const std::vector<double>& grid, const FewLevelOptions& opt = {}) {
  const Eigen::Index d = e.size();
  if (w_eig.rows() != d || w_eig.cols() != d) throw ShapeError("drive matrix does not match spectrum");
  if (nu < 1 || nu > d) throw ShapeError("retained level count out of range");
  FewLevelRun run;
  run.nu = nu;
  run.lambda = lambda;
  run.omega = omega;
  run.t = grid.back();
  if (nu == d)
    run.delta = std::numeric_limits<double>::infinity();
  else
    run.delta = opt.coupled_detuning ? coupled_detuning(e, w_eig, omega, nu, opt.coupling_tol) : detuning(e, omega, nu);

  const DenseMatrix h_full = e.cast<cplx>().asDiagonal();
  StateVector psi0 = StateVector::Zero(d);
  psi0[0] = 1.0;
  const auto full = evolve_driven(h_full, w_eig, lambda, omega, grid, psi0, {}, opt.evolution);
  const DenseMatrix h_sub = h_full.topLeftCorner(nu, nu);
  const DenseMatrix w_sub = w_eig.topLeftCorner(nu, nu);
  const auto proj = evolve_driven(h_sub, w_sub, lambda, omega, grid, StateVector(psi0.head(nu)), {}, opt.evolution);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    run.times.push_back(full.times[i]);
    run.overlaps.push_back(std::norm(proj.states[i].dot(full.states[i].head(nu))));
    run.bounds.push_back(theorem1_bound(nu, lambda, full.times[i], run.delta));
  }
  return run;
}

struct EigenbasisDrive {
  Eigen::VectorXd energies;
  DenseMatrix vectors;
  DiagonalFreeDrive drive;
};

/// Diagonalizes H0 fully and expresses W in the bright-state adapted basis.
inline EigenbasisDrive eigenbasis_drive(const SpinOperator& h0, const SpinOperator& w, int cap = kDenseQubitLimit) {
  if (h0.qubits() != w.qubits()) throw ShapeError("H0 and W act on different registers");
  check_qubit_cap(h0.qubits(), std::min(cap, kDenseQubitLimit));
  const DenseMatrix h = to_dense(h0, cap);
  const DenseMatrix wm = to_dense(w, cap);
  auto spec = eigensolve_dense(h, 0);
  EigenbasisDrive out;
  out.energies = spec.energies;
  out.vectors = bright_state_adapt(spec.energies, spec.vectors, wm);
  out.drive = remove_diagonal(out.vectors.adjoint() * wm * out.vectors);
  return out;
}

inline FewLevelRun few_level_evolve(const SpinOperator& h0, const SpinOperator& w, double lambda, double omega, int nu,
                                    const std::vector<double>& grid, const FewLevelOptions& opt = {}) {
  const auto eb = eigenbasis_drive(h0, w);
  auto run = few_level_evolve(eb.energies, eb.drive.w, lambda, omega, nu, grid, opt);
  run.diagonal_removed = eb.drive.removed_diagonal;
  return run;
}

// ---------------------------------------------------------------------------
// Error composition and the excitation experiment

struct ComposedBound {
  double bound = 1.0;       // 1 - e1 - e2 - 2 sqrt(e1 e2)
  double simplified = 1.0;  // 1 - 4 max(e1, e2)
  double probability = 1.0; // max(bound, 0)^2
};

inline ComposedBound compose_total_error(double eps1, double eps2) {
  if (eps1 < 0.0 || eps2 < 0.0) throw ConfigError("error components must be nonnegative");
  ComposedBound c;
  c.bound = 1.0 - (eps1 + eps2) - 2.0 * std::sqrt(eps1 * eps2);
  c.simplified = 1.0 - 4.0 * std::max(eps1, eps2);
  const double b = std::max(c.bound, 0.0);
  c.probability = b * b;
  return c;
}

struct ExcitationOptions {
  int nu = 2;
  std::optional<double> omega;     // defaults to E1 - E0
  std::optional<double> duration;  // defaults to pi / (lambda |W_01|)
  std::optional<double> window;    // half-width around E1, defaults to delta/2
  double coupling_tol = 1e-10;
  EvolutionOptions evolution{};
  int qubit_cap = kDenseQubitLimit;
};

struct ExcitationSetup {
  Eigen::VectorXd energies;
  DenseMatrix w_eig;
  double gap = 0.0;        // E1 - E0
  double resonant_delta = 0.0;
  double w01 = 0.0;
  double diagonal_removed = 0.0;
  int nu = 2;
};

struct ExcitationReport {
  double lambda = 0.0;
  double omega = 0.0;
  double delta = 0.0;
  double t = 0.0;
  double w01 = 0.0;
  double probability = 0.0;  // P
  double failure = 1.0;      // 1 - P
  double lambda_over_delta = 0.0;
  double lambda2t_over_delta = 0.0;
  double lambda_over_omega_sq = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  ComposedBound composed;
  bool bound_vacuous = false;
  std::string warning;

  bool within_bound() const { return probability >= composed.probability; }
  bool above_composed() const { return probability >= composed.bound; }
};

inline ExcitationSetup prepare_excitation(const SpinOperator& h0, const SpinOperator& w, int nu = 2,
                                          double coupling_tol = 1e-10, int cap = kDenseQubitLimit) {
  const auto eb = eigenbasis_drive(h0, w, cap);
  ExcitationSetup s;
  s.energies = eb.energies;
  s.w_eig = eb.drive.w;
  s.diagonal_removed = eb.drive.removed_diagonal;
  s.nu = nu;
  if (s.energies.size() < 2) throw ShapeError("spectrum has a single level");
  s.gap = s.energies[1] - s.energies[0];
  s.w01 = std::abs(s.w_eig(0, 1));
  s.resonant_delta = coupled_detuning(s.energies, s.w_eig, s.gap, nu, coupling_tol);
  return s;
}

inline ExcitationSetup prepare_excitation(const LatticeConfig& cfg, const GammaConvention& g, const DriveConfig& drive,
                                          const ExcitationOptions& opt = {}) {
  const auto h = map_hamiltonian(cfg, g);
  const auto w = jw_map(build_drive_operator(cfg, drive));
  return prepare_excitation(h, w, opt.nu, opt.coupling_tol, opt.qubit_cap);
}

inline ExcitationReport run_excitation(const ExcitationSetup& s, double lambda, const ExcitationOptions& opt = {}) {
  if (!(lambda > 0.0)) throw ConfigError("drive strength must be > 0");
  ExcitationReport r;
  r.lambda = lambda;
  r.omega = opt.omega.value_or(s.gap);
  r.w01 = s.w01;
  try {
    r.delta = coupled_detuning(s.energies, s.w_eig, r.omega, s.nu, opt.coupling_tol);
  } catch (const ResonanceCollisionError&) {
    r.delta = 0.0;
    r.bound_vacuous = true;
    r.warning = "detuning vanishes at this drive frequency; bound is vacuous";
  }
  if (opt.duration)
    r.t = *opt.duration;
  else if (s.w01 > 1e-12)
    r.t = std::numbers::pi / (lambda * s.w01);
  else
    r.t = std::numbers::pi / lambda;
  if (r.delta > 0.0 && lambda >= r.delta) {
    r.bound_vacuous = true;
    r.warning = "drive strength is not below the detuning; bound is vacuous";
  }

  const Eigen::Index d = s.energies.size();
  const DenseMatrix h = s.energies.cast<cplx>().asDiagonal();
  StateVector psi0 = StateVector::Zero(d);
  psi0[0] = 1.0;
  const auto ev = evolve_driven(h, s.w_eig, lambda, r.omega, {0.0, r.t}, psi0, {}, opt.evolution);
  const StateVector& psi = ev.final_state();
  const double half = opt.window.value_or(0.5 * s.resonant_delta);
  const double target = s.energies[1];
  r.probability = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (std::abs(s.energies[i] - target) <= half) r.probability += std::norm(psi[i]);
  r.failure = 1.0 - r.probability;

  const double nu = s.nu;
  const double lam_eff = lambda * std::max(s.w01, 1e-300);
  if (r.delta > 0.0) {
    r.lambda_over_delta = lambda / r.delta;
    r.lambda2t_over_delta = lambda * lambda * r.t / r.delta;
    r.eps1 = (2.0 * nu * lambda + 3.0 * nu * lambda * lambda * r.t) / (2.0 * r.delta);
  } else {
    r.lambda_over_delta = r.lambda2t_over_delta = r.eps1 = std::numeric_limits<double>::infinity();
  }
  r.lambda_over_omega_sq = (lambda / r.omega) * (lambda / r.omega);
  r.eps2 = theorem2_bound(lam_eff, r.omega);
  if (std::isfinite(r.eps1))
    r.composed = compose_total_error(r.eps1, r.eps2);
  else
    r.composed = ComposedBound{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
  return r;
}

inline ExcitationReport excite_wavepacket(const LatticeConfig& cfg, const GammaConvention& g, const DriveConfig& drive,
                                          ExcitationOptions opt = {}) {
  const auto setup = prepare_excitation(cfg, g, drive, opt);
  if (!opt.duration && drive.duration) opt.duration = drive.duration;
  return run_excitation(setup, drive.lambda, opt);
}

}  // namespace gnprep
