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

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gnprep/circuit.hpp"
#include "gnprep/config.hpp"
#include "gnprep/exact_engine.hpp"
#include "gnprep/jordan_wigner.hpp"
#include "gnprep/lattice_model.hpp"
#include "gnprep/mps.hpp"
#include "gnprep/rabi_floquet.hpp"

#ifndef GNPREP_VERSION
#define GNPREP_VERSION "0.1.0"
#endif

namespace gnprep {

struct StageError : Error {
  StageError(const std::string& stage, const std::string& w) : Error("stage " + stage, w), stage(stage) {}
  std::string stage;
};

struct Artifact {
  std::string stage;
  std::string name;
  std::string path;
  bool stale = false;
};

struct Bundle {
  std::string out_dir;
  std::vector<Artifact> artifacts;
  std::map<std::string, double> scalars;
  std::vector<std::string> notes;

  bool empty() const { return artifacts.empty() && scalars.empty(); }
  const Artifact* find(const std::string& name) const {
    for (const auto& a : artifacts)
      if (a.name == name) return &a;
    return nullptr;
  }
};

struct RunManifest {
  Config config;
  std::uint64_t seed = 12345;
  std::string version = GNPREP_VERSION;
  std::string created;
  std::string out_dir = "gnprep_out";
  std::vector<std::string> stages;

  static std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
  }

  nlohmann::json to_json(const Bundle* bundle = nullptr) const {
    nlohmann::json j = {{"tool", "gnprep"}, {"version", version}, {"seed", seed}, {"created", created},
                        {"out_dir", out_dir}, {"stages", stages}, {"config", config.dump()}};
    if (bundle) {
      nlohmann::json arts = nlohmann::json::array();
      for (const auto& a : bundle->artifacts)
        arts.push_back({{"stage", a.stage}, {"name", a.name}, {"path", a.path}, {"stale", a.stale}});
      j["artifacts"] = arts;
      j["scalars"] = bundle->scalars;
      j["notes"] = bundle->notes;
    }
    return j;
  }
};

/// CSV with a units-bearing header and full double precision.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw ResourceError("cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
    os_ << std::setprecision(17);
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << values[i];
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

/// Shared state threaded through the stages.
struct PipelineContext {
  Config config;
  LatticeConfig lattice;
  SolverSettings solver;
  std::string out_dir;
  Bundle bundle;
  std::optional<SpinOperator> hamiltonian;
  std::optional<Spectrum> spectrum;
  std::optional<MPS> vacuum;

  PipelineContext(Config c, std::string out) : config(std::move(c)), out_dir(std::move(out)) {
    lattice = lattice_from(config);
    solver = solver_from(config);
    std::filesystem::create_directories(out_dir);
    bundle.out_dir = out_dir;
  }

  std::string path(const std::string& file) const { return (std::filesystem::path(out_dir) / file).string(); }

  std::string add(const std::string& stage, const std::string& file) {
    const auto p = path(file);
    bundle.artifacts.push_back({stage, file, p, false});
    return p;
  }

  const SpinOperator& mapped() {
    if (!hamiltonian) hamiltonian = map_hamiltonian(lattice, GammaConvention::standard(), ordering_from(config));
    return *hamiltonian;
  }

  SpinOperator drive_operator(const DriveConfig& d) const {
    return jw_map(build_drive_operator(lattice, d), QubitOrdering(lattice.shape(), ordering_from(config)));
  }
};

// ---------------------------------------------------------------------------
// Stages

inline void stage_build(PipelineContext& ctx) {
  const auto h = build_hamiltonian(ctx.lattice);
  std::ofstream(ctx.add("build", "hamiltonian.json")) << to_json(h).dump(1) << '\n';
  ctx.bundle.scalars["fermion_terms"] = static_cast<double>(h.size());
}

inline void stage_jw(PipelineContext& ctx) {
  const auto& h = ctx.mapped();
  std::ofstream os(ctx.add("jw", "paulis.csv"));
  os << "coeff_re[energy],coeff_im[energy],paulis[-]\n" << std::setprecision(17);
  for (const auto& p : h.strings()) os << p.coeff.real() << ',' << p.coeff.imag() << ',' << p.letter_string() << '\n';
  const auto rep = locality_report(h, QubitOrdering(ctx.lattice.shape(), ordering_from(ctx.config)));
  nlohmann::json j = {{"max_bulk_width", rep.max_bulk_width}, {"max_onsite_width", rep.max_onsite_width},
                      {"max_pair_width", rep.max_pair_width}, {"onsite_terms", rep.onsite_terms},
                      {"pair_terms", rep.pair_terms}, {"wrap_terms", rep.wrap_terms},
                      {"periodic_flag", rep.periodic_flag}};
  std::ofstream(ctx.add("jw", "locality.json")) << j.dump(1) << '\n';
  ctx.bundle.scalars["pauli_terms"] = static_cast<double>(h.size());
  ctx.bundle.scalars["max_bulk_width"] = rep.max_bulk_width;
  ctx.bundle.scalars["wrap_terms"] = static_cast<double>(rep.wrap_terms);
}

inline void stage_ground(PipelineContext& ctx) {
  const auto& h = ctx.mapped();
  if (ctx.solver.backend == "exact") {
    EigensolveOptions eo;
    eo.qubit_cap = ctx.solver.qubit_cap;
    eo.seed = ctx.solver.seed;
    const int k = static_cast<int>(std::min<std::uint64_t>(ctx.solver.levels, pow2(h.qubits())));
    ctx.spectrum = eigensolve(h, k, eo);
    const auto& s = *ctx.spectrum;
    CsvWriter csv(ctx.add("ground", "spectrum.csv"), {"level[-]", "energy[energy]", "excitation[energy]"});
    for (int i = 0; i < s.size(); ++i) csv.row({double(i), s.energies[i], s.energies[i] - s.energies[0]});
    ctx.bundle.scalars["ground_energy"] = s.energies[0];
    if (s.size() > 1) ctx.bundle.scalars["gap"] = s.gap();
    ctx.bundle.scalars["max_residual"] = max_residual(h, s);
    ctx.vacuum = MPS::from_statevector(s.vectors.col(0), h.qubits(), 1 << 30, 1e-14);
  } else {
    const auto r = dmrg_ground_state(h, ctx.solver.dmrg);
    CsvWriter csv(ctx.add("ground", "dmrg.csv"), {"sweep[-]", "energy[energy]"});
    for (std::size_t i = 0; i < r.sweep_energies.size(); ++i) csv.row({double(i + 1), r.sweep_energies[i]});
    std::ofstream bin(ctx.add("ground", "vacuum.mps"), std::ios::binary);
    r.state.save(bin);
    ctx.bundle.scalars["ground_energy"] = r.energy;
    ctx.bundle.scalars["dmrg_converged"] = r.converged ? 1.0 : 0.0;
    ctx.bundle.scalars["dmrg_discarded"] = r.max_discarded;
    if (!r.converged) ctx.bundle.notes.push_back("dmrg: " + r.message);
    ctx.vacuum = r.state;
  }
  ctx.bundle.scalars["vacuum_entropy"] = half_chain_entropy(*ctx.vacuum);
  ctx.bundle.scalars["vacuum_chi"] = ctx.vacuum->max_bond();
}

inline void stage_compile(PipelineContext& ctx, bool verify = true) {
  if (!ctx.vacuum) stage_ground(ctx);
  const auto c = compile(*ctx.vacuum);
  std::ofstream(ctx.add("compile", "circuit.json")) << to_json(c).dump() << '\n';
  ctx.bundle.scalars["gate_count"] = static_cast<double>(c.two_level_count());
  ctx.bundle.scalars["gate_constant"] = c.gate_constant();
  if (verify) {
    check_qubit_cap(c.qubits, ctx.solver.qubit_cap);
    ctx.bundle.scalars["circuit_fidelity"] = fidelity(simulate_circuit(c), *ctx.vacuum);
  }
}

inline void stage_excite(PipelineContext& ctx) {
  const auto ds = drive_from(ctx.config, ctx.lattice);
  ExcitationOptions opt;
  opt.nu = ds.nu;
  opt.omega = ds.omega;
  opt.duration = ds.duration;
  opt.window = ds.window;
  opt.evolution = ctx.solver.evolution;
  const auto setup = prepare_excitation(ctx.mapped(), ctx.drive_operator(ds.drive), ds.nu, opt.coupling_tol);
  const auto r = run_excitation(setup, ds.drive.lambda, opt);
  CsvWriter csv(ctx.add("excite", "excitation.csv"),
                {"lambda[energy]", "omega[energy]", "delta[energy]", "t[1/energy]", "P[probability]",
                 "failure[probability]", "lambda_over_delta[1]", "lambda2t_over_delta[1]", "lambda_over_omega_sq[1]",
                 "eps1[1]", "eps2[1]", "composed_bound[1]", "composed_probability[probability]", "within_bound[bool]"});
  csv.row({r.lambda, r.omega, r.delta, r.t, r.probability, r.failure, r.lambda_over_delta, r.lambda2t_over_delta,
           r.lambda_over_omega_sq, r.eps1, r.eps2, r.composed.bound, r.composed.probability,
           r.within_bound() ? 1.0 : 0.0});
  ctx.bundle.scalars["excitation_probability"] = r.probability;
  ctx.bundle.scalars["excitation_bound"] = r.composed.probability;
  if (!r.warning.empty()) ctx.bundle.notes.push_back("excite: " + r.warning);
}

inline void stage_evolve(PipelineContext& ctx) {
  if (ctx.solver.backend != "exact") throw ConfigError("time evolution runs on the exact backend only");
  const auto ds = drive_from(ctx.config, ctx.lattice);
  const auto& h = ctx.mapped();
  const auto w = ctx.drive_operator(ds.drive);
  EigensolveOptions eo;
  eo.qubit_cap = ctx.solver.qubit_cap;
  const auto spec = eigensolve(h, 2, eo);
  const double omega = ds.omega.value_or(spec.gap());
  const double t_end = ctx.config.get_double("evolve", "t_end", std::numbers::pi / ds.drive.lambda);
  const int points = static_cast<int>(ctx.config.get_int("evolve", "points", 101));
  const auto res = evolve_driven(h, w, ds.drive.lambda, omega, uniform_grid(t_end, points),
                                 {spec.vectors.col(0), spec.vectors.col(1)}, StateVector(spec.vectors.col(0)),
                                 ctx.solver.evolution, ctx.solver.qubit_cap);
  std::ofstream os(ctx.add("evolve", "evolution.csv"));
  res.write_csv(os);
  ctx.bundle.scalars["evolve_final_overlap_1"] = res.overlaps.back().at(1);
  ctx.bundle.scalars["evolve_max_norm_defect"] = [&] {
    double m = 0.0;
    for (double n : res.norms) m = std::max(m, std::abs(n - 1.0));
    return m;
  }();
}

inline void stage_rabi(PipelineContext& ctx) {
  const double omega = ctx.config.get_double("rabi", "omega", 1.0);
  const double lambda = ctx.config.get_double("rabi", "ratio", 0.02) * omega;
  const int points = static_cast<int>(ctx.config.get_int("rabi", "points", 201));
  const auto grid = uniform_grid(ctx.config.get_double("rabi", "t_end", std::numbers::pi / lambda), points);
  const auto res = two_level_evolve(lambda, omega, grid, ctx.solver.evolution);
  const auto sol = floquet_solution(lambda, omega);
  CsvWriter csv(ctx.add("rabi", "rabi.csv"), {"t[1/energy]", "p_ground[probability]", "p_excited[probability]",
                                               "p_excited_floquet[probability]"});
  for (std::size_t i = 0; i < grid.size(); ++i)
    csv.row({grid[i], res.overlaps[i][0], res.overlaps[i][1], std::norm(floquet_state(sol, grid[i])[1])});
  ctx.bundle.scalars["rabi_final_excited"] = res.overlaps.back()[1];
}

inline void stage_floquet(PipelineContext& ctx) {
  const double omega = ctx.config.get_double("floquet", "omega", 1.0);
  const double lambda = ctx.config.get_double("floquet", "ratio", 0.05) * omega;
  const auto s = floquet_solution(lambda, omega);
  nlohmann::json j = {{"lambda", lambda}, {"omega", omega}, {"theta", s.theta}, {"eps0", s.eps0},
                      {"eps1", s.eps1}, {"beta0", s.beta0}, {"beta1", s.beta1}, {"kappa", s.kappa},
                      {"bessel_order", s.bessel_order}};
  std::ofstream(ctx.add("floquet", "floquet.json")) << j.dump(1) << '\n';
  const int points = static_cast<int>(ctx.config.get_int("floquet", "points", 201));
  CsvWriter csv(ctx.add("floquet", "floquet_state.csv"),
                {"t[1/energy]", "re_up[1]", "im_up[1]", "re_down[1]", "im_down[1]"});
  for (double t : uniform_grid(std::numbers::pi / std::max(lambda, 1e-300), points)) {
    const auto psi = floquet_state(s, t);
    csv.row({t, psi[0].real(), psi[0].imag(), psi[1].real(), psi[1].imag()});
  }
  ctx.bundle.scalars["floquet_gap"] = s.gap();
}

inline void stage_theorem1(PipelineContext& ctx) {
  const auto& c = ctx.config;
  const int nu = static_cast<int>(c.get_int("theorem1", "nu", 2));
  const auto divisors = c.get_list("theorem1", "lambda_over_delta", {20, 50, 100});
  const int points = static_cast<int>(c.get_int("theorem1", "points", 21));
  Eigen::VectorXd e;
  DenseMatrix w;
  double omega = 0.0;
  if (c.has("theorem1", "levels")) {
    const auto lv = c.get_list("theorem1", "levels", {});
    e = Eigen::Map<const Eigen::VectorXd>(lv.data(), static_cast<Eigen::Index>(lv.size()));
    DenseMatrix ones = DenseMatrix::Ones(e.size(), e.size());
    w = remove_diagonal(ones).w;
    omega = c.get_double("theorem1", "omega", e.size() > 1 ? e[1] - e[0] : 1.0);
  } else {
    const auto ds = drive_from(c, ctx.lattice);
    const auto eb = eigenbasis_drive(ctx.mapped(), ctx.drive_operator(ds.drive), std::min(ctx.solver.qubit_cap, kDenseQubitLimit));
    e = eb.energies;
    w = eb.drive.w;
    omega = ds.omega.value_or(e[1] - e[0]);
  }
  FewLevelOptions fo;
  fo.evolution = ctx.solver.evolution;
  const double delta = coupled_detuning(e, w, omega, nu, fo.coupling_tol);
  CsvWriter csv(ctx.add("theorem1", "theorem1.csv"), {"lambda[energy]", "omega[energy]", "delta[energy]", "nu[-]",
                                                     "t[1/energy]", "overlap[probability]", "bound[probability]",
                                                     "margin[probability]"});
  double min_margin = std::numeric_limits<double>::infinity();
  for (double q : divisors) {
    const double lambda = delta / q;
    const auto run = few_level_evolve(e, w, lambda, omega, nu, uniform_grid(std::numbers::pi / lambda, points), fo);
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      csv.row({lambda, omega, run.delta, double(nu), run.times[i], run.overlaps[i], run.bounds[i],
               run.overlaps[i] - run.bounds[i]});
      if (run.bounds[i] >= 0.0) min_margin = std::min(min_margin, run.overlaps[i] - run.bounds[i]);
    }
  }
  ctx.bundle.scalars["theorem1_min_margin"] = min_margin;
}

inline void stage_theorem2(PipelineContext& ctx) {
  const auto& c = ctx.config;
  const double omega = c.get_double("theorem2", "omega", 1.0);
  const auto ratios = c.get_list("theorem2", "ratios", {0.01, 0.02, 0.05, 0.1});
  CsvWriter csv(ctx.add("theorem2", "theorem2.csv"), {"ratio[1]", "lambda[energy]", "omega[energy]", "infidelity[1]",
                                                     "bound[1]", "margin[1]", "floquet_infidelity[1]"});
  double min_margin = std::numeric_limits<double>::infinity();
  std::vector<double> infs;
  for (double r : ratios) {
    const double lambda = r * omega;
    const double inf = two_level_infidelity(lambda, omega, ctx.solver.evolution);
    const double bound = theorem2_bound(lambda, omega);
    const auto psi = floquet_state(floquet_solution(lambda, omega), std::numbers::pi / lambda);
    csv.row({r, lambda, omega, inf, bound, bound - inf, 1.0 - std::abs(psi[1])});
    min_margin = std::min(min_margin, bound - inf);
    infs.push_back(inf);
  }
  ctx.bundle.scalars["theorem2_min_margin"] = min_margin;
  ctx.bundle.scalars["theorem2_c4"] = fit_quartic_excess(ratios, infs);
}

inline void stage_scaling(PipelineContext& ctx) {
  const auto& c = ctx.config;
  const auto mas = c.get_list("scaling", "ma", {0.5, 0.25, 0.125});
  const double nm = c.get_double("scaling", "n_times_ma", 2.0);
  const double eps = c.get_double("scaling", "eps", 1e-3);
  DmrgOptions opt = ctx.solver.dmrg;
  opt.chi_max = static_cast<int>(c.get_int("scaling", "chi_max", 32));
  opt.tol = c.get_double("scaling", "tol", 1e-8);
  CsvWriter csv(ctx.add("scaling", "scaling.csv"), {"ma[1]", "n[-]", "S[nats]", "chi_pred[-]", "chi_used[-]",
                                                   "energy[energy]", "f_chi[probability]"});
  std::vector<std::pair<double, double>> runs;
  for (double ma : mas) {
    LatticeConfig l = ctx.lattice;
    l.g0 = c.get_double("scaling", "g0", 0.0);
    l.m0 = ma / l.a;
    l.n = std::max(2, static_cast<int>(std::lround(nm / ma)));
    const auto h = map_hamiltonian(l);
    const auto r = dmrg_ground_state(h, opt);
    ScalingModel model;
    model.N = l.N;
    model.ma = ma;
    model.eps = eps;
    const int chi_pred = predict_chi(model);
    const auto sv = r.state.schmidt_values();
    const auto& mid = sv[static_cast<std::size_t>(r.state.sites() / 2 - 1)];
    const double s = entanglement_entropy(mid);
    csv.row({ma, double(l.n), s, double(chi_pred), double(r.state.max_bond()), r.energy,
             truncation_weight(mid, chi_pred)});
    runs.emplace_back(ma, s);
    if (!r.converged) ctx.bundle.notes.push_back("scaling: ma = " + std::to_string(ma) + ": " + r.message);
  }
  const auto fit = entropy_scaling_check(runs, ctx.lattice.N);
  nlohmann::json j = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual},
                      {"reference_slope", fit.reference_slope}, {"per_boundary_slope", fit.slope / 2}};
  std::ofstream(ctx.add("scaling", "scaling_fit.json")) << j.dump(1) << '\n';
  ctx.bundle.scalars["entropy_slope"] = fit.slope;
  ctx.bundle.scalars["entropy_slope_per_boundary"] = fit.slope / 2;
  ScalingModel m1;
  m1.N = ctx.lattice.N;
  ctx.bundle.scalars["cost_exponent"] = dmrg_cost_model(m1, 1).exponent;
  ctx.bundle.scalars["chi_exponent"] = chi_exponent(ctx.lattice.N);
}

// ---------------------------------------------------------------------------
// Report

/// Summary text; also writes plot-ready two-column files for sweep outputs.
inline std::string report(const Bundle& b) {
  if (b.empty()) throw DegenerateInputError("report of an empty bundle");
  std::ostringstream os;
  os << std::setprecision(10);
  os << "gnprep report (" << b.artifacts.size() << " artifacts)\n";
  for (const auto& [k, v] : b.scalars) os << "  " << k << " = " << v << '\n';
  auto has = [&](const char* k) { return b.scalars.count(k) > 0; };
  if (has("theorem1_min_margin")) os << "min margin (few-level bound): " << b.scalars.at("theorem1_min_margin") << '\n';
  if (has("theorem2_min_margin")) os << "min margin (two-level bound): " << b.scalars.at("theorem2_min_margin") << '\n';
  if (has("circuit_fidelity")) os << "circuit fidelity: " << b.scalars.at("circuit_fidelity") << '\n';
  if (has("entropy_slope"))
    os << "entropy slope " << b.scalars.at("entropy_slope") << " (per boundary "
       << b.scalars.at("entropy_slope_per_boundary") << ") vs 1/6 = " << 1.0 / 6 << '\n';
  for (const auto& n : b.notes) os << "note: " << n << '\n';
  for (const auto& a : b.artifacts)
    if (a.stale) os << "stale: " << a.path << '\n';
  if (!b.out_dir.empty()) {
    auto two_col = [&](const std::string& src, int xc, int yc, const std::string& dst) {
      std::ifstream in((std::filesystem::path(b.out_dir) / src).string());
      if (!in) return;
      std::ofstream out((std::filesystem::path(b.out_dir) / dst).string());
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) > std::max(xc, yc)) out << cells[static_cast<std::size_t>(xc)] << ' ' << cells[static_cast<std::size_t>(yc)] << '\n';
      }
    };
    two_col("theorem1.csv", 4, 7, "theorem1_margin.dat");
    two_col("theorem2.csv", 0, 3, "theorem2_infidelity.dat");
    two_col("scaling.csv", 0, 2, "scaling_entropy.dat");
    two_col("spectrum.csv", 0, 1, "spectrum.dat");
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Pipeline

inline const std::map<std::string, std::function<void(PipelineContext&)>>& stage_table() {
  static const std::map<std::string, std::function<void(PipelineContext&)>> t = {
      {"build", stage_build},       {"jw", stage_jw},           {"ground", stage_ground},
      {"compile", [](PipelineContext& c) { stage_compile(c, c.config.get_bool("compile", "verify", true)); }},
      {"excite", stage_excite},     {"evolve", stage_evolve},   {"rabi", stage_rabi},
      {"floquet", stage_floquet},   {"theorem1", stage_theorem1}, {"theorem2", stage_theorem2},
      {"scaling", stage_scaling}};
  return t;
}

inline std::vector<std::string> default_stages(const Config& c) {
  std::vector<std::string> s{"build", "jw", "ground"};
  if (c.has_section("drive")) s.push_back("excite");
  return s;
}

inline void write_manifest(const RunManifest& m, const Bundle& b) {
  std::ofstream((std::filesystem::path(m.out_dir) / "manifest.json").string()) << m.to_json(&b).dump(1) << '\n';
}

/// Runs the configured stages in order. A failing stage marks every output
/// written so far stale, records the manifest and rethrows tagged with the
/// stage name.
inline Bundle run_pipeline(RunManifest manifest) {
  if (manifest.created.empty()) manifest.created = RunManifest::now_utc();
  if (manifest.stages.empty())
    manifest.stages = manifest.config.get_words("pipeline", "stages", default_stages(manifest.config));
  manifest.config.set("solver", "seed", std::to_string(manifest.seed));
  PipelineContext ctx(manifest.config, manifest.out_dir);
  const auto& table = stage_table();
  for (const auto& st : manifest.stages) {
    if (st == "report") continue;
    auto it = table.find(st);
    if (it == table.end()) throw StageError(st, "unknown stage");
    try {
      it->second(ctx);
    } catch (const std::exception& e) {
      for (auto& a : ctx.bundle.artifacts) a.stale = true;
      ctx.bundle.notes.push_back("failed at stage " + st + ": " + e.what());
      write_manifest(manifest, ctx.bundle);
      throw StageError(st, e.what());
    }
  }
  const auto text = report(ctx.bundle);
  std::ofstream(ctx.add("report", "summary.txt")) << text;
  write_manifest(manifest, ctx.bundle);
  return ctx.bundle;
}

}  // namespace gnprep
