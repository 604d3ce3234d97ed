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
#include <vector>

#include "gnprep/core.hpp"
#include "gnprep/operator_algebra.hpp"

namespace gnprep {

enum class Boundary { Periodic, Open };

/// Discretized massive Gross-Neveu model on a ring of n sites.
struct LatticeConfig {
  int n = 4;          // sites
  double a = 1.0;     // spacing (length)
  int N = 1;          // species
  double m0 = 1.0;    // bare mass (energy)
  double g0 = 0.0;    // coupling (dimensionless)
  double r = 1.0;     // Wilson parameter
  Boundary boundary = Boundary::Periodic;

  double length() const { return n * a; }
  LatticeShape shape() const { return LatticeShape{n, N, a}; }
  int qubits() const { return 2 * N * n; }

  void validate() const {
    if (n < 2) throw ConfigError("n must be >= 2");
    if (!(a > 0.0)) throw ConfigError("lattice spacing a must be > 0");
    if (N < 1) throw ConfigError("species count N must be >= 1");
    if (!(m0 > 0.0)) throw ConfigError("bare mass m0 must be > 0 (gapped regime)");
    if (!(g0 >= 0.0)) throw ConfigError("coupling g0 must be >= 0");
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("Wilson parameter must satisfy 0 < r <= 1");
    if (boundary != Boundary::Periodic) throw ConfigError("only periodic boundaries are supported");
  }
};

/// Two-dimensional Dirac matrices.
struct GammaConvention {
  Eigen::Matrix2cd gamma0;
  Eigen::Matrix2cd gamma1;

  /// gamma0 = Z, gamma1 = iY.
  static GammaConvention standard() {
    GammaConvention g;
    g.gamma0 << 1.0, 0.0, 0.0, -1.0;
    g.gamma1 << 0.0, 1.0, -1.0, 0.0;
    return g;
  }

  void validate(double tol = 1e-12) const {
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    if ((gamma0 * gamma0 - id).norm() > tol) throw ConfigError("gamma0^2 != I");
    if ((gamma1 * gamma1 + id).norm() > tol) throw ConfigError("gamma1^2 != -I");
    if ((gamma0 * gamma1 + gamma1 * gamma0).norm() > tol) throw ConfigError("{gamma0, gamma1} != 0");
  }
};

enum class EnvelopeShape { Gaussian, Constant, Custom };

/// Sinusoidal source term lambda cos(omega t) W with W built from an envelope
/// f(x) on one species/spinor component.
struct DriveConfig {
  double lambda = 0.01;
  double omega = 1.0;
  double p = 0.0;       // packet momentum (1/length)
  double sigma = 1.0;   // envelope width (length)
  double x0 = 0.0;      // packet center (length)
  int species = 1;
  int spinor = 0;
  std::optional<double> duration;  // unset: pi-time chosen by the caller
  EnvelopeShape envelope = EnvelopeShape::Gaussian;
  std::vector<cplx> samples;        // used when envelope == Custom

  void validate(const LatticeConfig& cfg) const {
    if (!(lambda > 0.0)) throw ConfigError("drive strength lambda must be > 0");
    if (!(omega > 0.0)) throw ConfigError("drive frequency omega must be > 0");
    if (envelope == EnvelopeShape::Gaussian && !(sigma >= cfg.a))
      throw ConfigError("envelope width sigma must be >= a");
    if (species < 1 || species > cfg.N) throw ConfigError("drive species out of range");
    if (spinor != 0 && spinor != 1) throw ConfigError("drive spinor must be 0 or 1");
    if (envelope == EnvelopeShape::Custom && static_cast<int>(samples.size()) != cfg.n)
      throw ConfigError("custom envelope needs one sample per site");
    if (duration && !(*duration > 0.0)) throw ConfigError("drive duration must be > 0");
  }
};

namespace detail {

inline int wrap_site(int x, int n) { return ((x % n) + n) % n; }

// a^{a_power} * coeff * psi^dag_{j,ap}(x) psi_{j,b}(y)
inline void add_bilinear(FermionOperator& op, cplx coeff, int a_power, int x, int j, int ap, int y, int b) {
  if (coeff == cplx(0.0)) return;
  op.add_term(coeff, a_power,
              {Factor{FactorKind::Create, x, j, ap}, Factor{FactorKind::Annihilate, y, j, b}});
}

}  // namespace detail

/// psibar_{j,alpha}(x) = sum_{alpha'} psi^dag_{j,alpha'}(x) gamma0_{alpha' alpha}.
inline FermionOperator psibar(const LatticeShape& shape, const GammaConvention& g, int site, int species,
                              int spinor) {
  FermionOperator op(shape);
  for (int ap = 0; ap < 2; ++ap)
    if (g.gamma0(ap, spinor) != cplx(0.0))
      op.add_term(g.gamma0(ap, spinor), 0, {Factor{FactorKind::Create, site, species, ap}});
  return op;
}

/// Kinetic (symmetric difference) plus mass term.
inline FermionOperator build_h0(const LatticeConfig& cfg, const GammaConvention& g) {
  cfg.validate();
  g.validate();
  FermionOperator h(cfg.shape());
  for (int x = 0; x < cfg.n; ++x) {
    const int xp = detail::wrap_site(x + 1, cfg.n);
    const int xm = detail::wrap_site(x - 1, cfg.n);
    for (int j = 1; j <= cfg.N; ++j)
      for (int al = 0; al < 2; ++al)
        for (int ap = 0; ap < 2; ++ap) {
          const cplx g0 = g.gamma0(ap, al);
          if (g0 == cplx(0.0)) continue;
          // a * (-i gamma1_{al,be}) / (2a): the a cancels.
          for (int be = 0; be < 2; ++be) {
            const cplx hop = g0 * (-kI) * g.gamma1(al, be) * 0.5;
            detail::add_bilinear(h, hop, 0, x, j, ap, xp, be);
            detail::add_bilinear(h, -hop, 0, x, j, ap, xm, be);
          }
          detail::add_bilinear(h, g0 * cfg.m0, 1, x, j, ap, x, al);
        }
  }
  return h;
}

/// On-site quartic interaction -(g0^2/2) sum_x a (sum_{j,alpha} psibar psi)^2.
inline FermionOperator build_hg(const LatticeConfig& cfg, const GammaConvention& g = GammaConvention::standard()) {
  cfg.validate();
  FermionOperator h(cfg.shape());
  if (cfg.g0 == 0.0) return h;
  for (int x = 0; x < cfg.n; ++x) {
    FermionOperator s(cfg.shape());
    for (int j = 1; j <= cfg.N; ++j)
      for (int al = 0; al < 2; ++al)
        for (int ap = 0; ap < 2; ++ap) detail::add_bilinear(s, g.gamma0(ap, al), 0, x, j, ap, x, al);
    FermionOperator sq = s * s;
    FermionOperator scaled(cfg.shape());
    for (const auto& [k, c] : sq.terms()) scaled.add_term(-0.5 * cfg.g0 * cfg.g0 * c, k.a_power + 1, k.factors);
    h += scaled;
  }
  return h;
}

/// Wilson term -(r/2a) sum_x a psibar (psi(x+a) - 2 psi(x) + psi(x-a)).
inline FermionOperator build_hw(const LatticeConfig& cfg, const GammaConvention& g = GammaConvention::standard()) {
  cfg.validate();
  FermionOperator h(cfg.shape());
  for (int x = 0; x < cfg.n; ++x) {
    const int xp = detail::wrap_site(x + 1, cfg.n);
    const int xm = detail::wrap_site(x - 1, cfg.n);
    for (int j = 1; j <= cfg.N; ++j)
      for (int al = 0; al < 2; ++al)
        for (int ap = 0; ap < 2; ++ap) {
          const cplx c = -0.5 * cfg.r * g.gamma0(ap, al);
          if (c == cplx(0.0)) continue;
          detail::add_bilinear(h, c, 0, x, j, ap, xp, al);
          detail::add_bilinear(h, -2.0 * c, 0, x, j, ap, x, al);
          detail::add_bilinear(h, c, 0, x, j, ap, xm, al);
        }
  }
  return h;
}

inline FermionOperator build_hamiltonian(const LatticeConfig& cfg,
                                         const GammaConvention& g = GammaConvention::standard()) {
  return build_h0(cfg, g) + build_hg(cfg, g) + build_hw(cfg, g);
}

/// Envelope samples f(x) at the lattice sites, scaled to unit max modulus.
inline std::vector<cplx> drive_envelope(const LatticeConfig& cfg, const DriveConfig& d) {
  std::vector<cplx> f(static_cast<std::size_t>(cfg.n));
  const double L = cfg.length();
  for (int s = 0; s < cfg.n; ++s) {
    const double x = s * cfg.a;
    const cplx wave = std::exp(kI * d.p * x);
    switch (d.envelope) {
      case EnvelopeShape::Gaussian: {
        // minimal-image distance to the packet center on the ring
        double dx = std::fmod(x - d.x0, L);
        if (dx > 0.5 * L) dx -= L;
        if (dx < -0.5 * L) dx += L;
        f[s] = wave * std::exp(-dx * dx / (d.sigma * d.sigma));
        break;
      }
      case EnvelopeShape::Constant: f[s] = wave; break;
      case EnvelopeShape::Custom: f[s] = d.samples.at(static_cast<std::size_t>(s)); break;
    }
  }
  double mx = 0.0;
  for (auto v : f) mx = std::max(mx, std::abs(v));
  if (!(mx > 0.0)) throw DegenerateInputError("drive envelope vanishes on every lattice site");
  for (auto& v : f) v /= mx;
  return f;
}

/// W = a sum_x (f psi + f^* psi^dag), rescaled to unit spectral norm. Since
/// W^2 = a sum |f|^2 * I for any linear combination of single fields, the
/// scale is closed-form.
inline FermionOperator build_drive_operator(const LatticeConfig& cfg, const DriveConfig& d) {
  cfg.validate();
  d.validate(cfg);
  const auto f = drive_envelope(cfg, d);
  double s2 = 0.0;
  for (auto v : f) s2 += std::norm(v);
  const double scale = 1.0 / std::sqrt(cfg.a * s2);
  FermionOperator w(cfg.shape());
  for (int x = 0; x < cfg.n; ++x) {
    const cplx v = f[static_cast<std::size_t>(x)] * scale;
    if (v == cplx(0.0)) continue;
    w.add_term(v, 1, {Factor{FactorKind::Annihilate, x, d.species, d.spinor}});
    w.add_term(std::conj(v), 1, {Factor{FactorKind::Create, x, d.species, d.spinor}});
  }
  return w;
}

/// Single-particle energy of the free Wilson fermion at momentum p.
inline double free_dispersion(const LatticeConfig& cfg, double p) {
  const double kin = std::sin(p * cfg.a) / cfg.a;
  const double s = std::sin(0.5 * p * cfg.a);
  const double mass = cfg.m0 + 2.0 * cfg.r / cfg.a * s * s;
  return std::sqrt(kin * kin + mass * mass);
}

/// Allowed ring momenta 2 pi k / L, k = 0..n-1.
inline std::vector<double> ring_momenta(const LatticeConfig& cfg) {
  std::vector<double> p(static_cast<std::size_t>(cfg.n));
  for (int k = 0; k < cfg.n; ++k) p[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * k / cfg.length();
  return p;
}

}  // namespace gnprep
