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

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gnprep/gnprep.hpp"

using namespace gnprep;

namespace {

struct Common {
  std::string config;
  std::string out = "gnprep_out";
  std::optional<std::uint64_t> seed;
  std::optional<int> qubit_cap;
  std::string backend;
};

Config load_config(const Common& o) {
  Config c = o.config.empty() ? Config{} : Config::load(o.config);
  if (o.qubit_cap) c.set("solver", "qubit_cap", std::to_string(*o.qubit_cap));
  if (!o.backend.empty()) c.set("solver", "backend", o.backend);
  return c;
}

Bundle run(const Common& o, std::vector<std::string> stages, const Config* override_cfg = nullptr) {
  RunManifest m;
  m.config = override_cfg ? *override_cfg : load_config(o);
  m.out_dir = o.out;
  m.stages = std::move(stages);
  m.seed = o.seed.value_or(static_cast<std::uint64_t>(m.config.get_int("solver", "seed", 12345)));
  auto b = run_pipeline(m);
  std::cout << report(b);
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnprep: lattice Gross-Neveu state preparation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(GNPREP_VERSION));
  Common o;
  app.add_option("-c,--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--qubit-cap", o.qubit_cap, "largest register handled densely")->check(CLI::PositiveNumber);
  app.add_option("--backend", o.backend, "ground state backend")->check(CLI::IsMember({"exact", "mps"}));

  bool dump_terms = false, dump_paulis = false, verify = false;
  std::vector<std::string> stages;

  auto* build = app.add_subcommand("build-hamiltonian", "write the fermionic lattice Hamiltonian");
  build->add_flag("--dump-terms", dump_terms, "print every term");
  auto* jw = app.add_subcommand("jw", "map to Pauli strings and report locality");
  jw->add_flag("--dump-paulis", dump_paulis, "print every Pauli string");
  auto* spectrum = app.add_subcommand("spectrum", "low-lying spectrum on the exact backend");
  auto* dmrg = app.add_subcommand("dmrg", "ground state by DMRG");
  auto* compile_cmd = app.add_subcommand("compile-circuit", "compile the vacuum into a circuit");
  compile_cmd->add_flag("--verify", verify, "simulate the circuit and report the fidelity");
  auto* evolve = app.add_subcommand("evolve", "driven evolution of the lattice model");
  auto* rabi = app.add_subcommand("rabi", "two-level Rabi oscillation");
  auto* floquet = app.add_subcommand("floquet", "closed-form Floquet solution of the two-level system");
  auto* th1 = app.add_subcommand("theorem1", "few-level retention sweep");
  auto* th2 = app.add_subcommand("theorem2", "two-level infidelity sweep");
  auto* scaling = app.add_subcommand("scaling", "entanglement scaling with the lattice spacing");
  auto* pipeline = app.add_subcommand("pipeline", "run a staged pipeline");
  pipeline->add_option("--stages", stages, "stage list (default from config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      run(o, {"build"});
      if (dump_terms) {
        const auto h = build_hamiltonian(lattice_from(load_config(o)));
        std::cout << to_json(h).dump(1) << '\n';
      }
    } else if (jw->parsed()) {
      run(o, {"jw"});
      if (dump_paulis) {
        const auto c = load_config(o);
        const auto h = map_hamiltonian(lattice_from(c), GammaConvention::standard(), ordering_from(c));
        std::cout << std::setprecision(17);
        for (const auto& p : h.strings()) std::cout << p.coeff.real() << ' ' << p.coeff.imag() << ' ' << p.letter_string() << '\n';
      }
    } else if (spectrum->parsed()) {
      auto c = load_config(o);
      c.set("solver", "backend", "exact");
      run(o, {"ground"}, &c);
    } else if (dmrg->parsed()) {
      auto c = load_config(o);
      c.set("solver", "backend", "mps");
      run(o, {"ground"}, &c);
    } else if (compile_cmd->parsed()) {
      auto c = load_config(o);
      c.set("compile", "verify", verify ? "true" : "false");
      run(o, {"ground", "compile"}, &c);
    } else if (evolve->parsed()) {
      run(o, {"evolve"});
    } else if (rabi->parsed()) {
      run(o, {"rabi"});
    } else if (floquet->parsed()) {
      run(o, {"floquet"});
    } else if (th1->parsed()) {
      run(o, {"theorem1"});
    } else if (th2->parsed()) {
      run(o, {"theorem2"});
    } else if (scaling->parsed()) {
      run(o, {"scaling"});
    } else if (pipeline->parsed()) {
      run(o, stages);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const StageError& e) {
    std::cerr << "stage " << e.stage << " failed: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
