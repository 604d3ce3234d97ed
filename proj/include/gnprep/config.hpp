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
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gnprep/core.hpp"
#include "gnprep/exact_engine.hpp"
#include "gnprep/jordan_wigner.hpp"
#include "gnprep/lattice_model.hpp"
#include "gnprep/mps.hpp"

namespace gnprep {

/// Sectioned key = value text:
///
///   # comment
///   [lattice]
///   n = 4
///
/// Keys before the first section header belong to section "".
class Config {
 public:
  static Config parse(std::istream& is) {
    Config c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
        section = lower(trim(line.substr(1, line.size() - 2)));
        c.values_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = lower(trim(line.substr(0, eq)));
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      c.values_[section][key] = trim(line.substr(eq + 1));
    }
    return c;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    return parse(f);
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    return s != values_.end() && s->second.count(key);
  }
  bool has_section(const std::string& section) const { return values_.count(section) > 0; }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    values_[lower(section)][lower(key)] = value;
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  }

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
    return raw(section, key).value_or(fallback);
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    auto v = raw(section, key);
    return v ? to_double(*v, section + "." + key) : fallback;
  }

  /// Unset or "auto" gives nullopt.
  std::optional<double> get_optional(const std::string& section, const std::string& key) const {
    auto v = raw(section, key);
    if (!v || lower(*v) == "auto") return std::nullopt;
    return to_double(*v, section + "." + key);
  }

  long get_int(const std::string& section, const std::string& key, long fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    long out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
      throw ConfigError(section + "." + key + ": expected an integer, got '" + *v + "'");
    return out;
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    const auto s = lower(*v);
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw ConfigError(section + "." + key + ": expected a boolean, got '" + *v + "'");
  }

  std::vector<double> get_list(const std::string& section, const std::string& key,
                               std::vector<double> fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(to_double(item, section + "." + key));
    }
    return out;
  }

  std::vector<std::string> get_words(const std::string& section, const std::string& key,
                                     std::vector<std::string> fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    std::vector<std::string> out;
    std::string text = *v;
    std::replace(text.begin(), text.end(), ',', ' ');
    std::stringstream ss(text);
    std::string item;
    while (ss >> item) out.push_back(lower(item));
    return out;
  }

  /// Canonical text form: sections and keys sorted.
  std::string dump() const {
    std::ostringstream os;
    for (const auto& [s, kv] : values_) {
      if (!s.empty() || !kv.empty()) os << '[' << s << "]\n";
      for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
    }
    return os.str();
  }

  const std::map<std::string, std::map<std::string, std::string>>& values() const { return values_; }

  static std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static double to_double(const std::string& v, const std::string& where) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(where + ": expected a number, got '" + v + "'");
    }
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

inline LatticeConfig lattice_from(const Config& c) {
  LatticeConfig l;
  l.n = static_cast<int>(c.get_int("lattice", "n", l.n));
  l.a = c.get_double("lattice", "a", l.a);
  l.N = static_cast<int>(c.get_int("lattice", "species", c.get_int("lattice", "n_species", l.N)));
  l.m0 = c.get_double("lattice", "m0", l.m0);
  l.g0 = c.get_double("lattice", "g0", l.g0);
  l.r = c.get_double("lattice", "r", l.r);
  const auto b = Config::lower(c.get_string("lattice", "boundary", "periodic"));
  if (b == "open")
    l.boundary = Boundary::Open;
  else if (b != "periodic")
    throw ConfigError("lattice.boundary must be periodic or open");
  l.validate();
  return l;
}

inline OrderingScheme ordering_from(const Config& c) {
  const auto s = Config::lower(c.get_string("lattice", "ordering", "site-species-spinor"));
  if (s == "site-species-spinor") return OrderingScheme::SiteSpeciesSpinor;
  if (s == "site-spinor-species") return OrderingScheme::SiteSpinorSpecies;
  throw ConfigError("lattice.ordering must be site-species-spinor or site-spinor-species");
}

/// Drive settings; omega and duration stay unset when given as "auto".
struct DriveSettings {
  DriveConfig drive;
  std::optional<double> omega;
  std::optional<double> duration;
  int nu = 2;
  std::optional<double> window;
};

inline DriveSettings drive_from(const Config& c, const LatticeConfig& l) {
  DriveSettings s;
  auto& d = s.drive;
  d.lambda = c.get_double("drive", "lambda", d.lambda);
  s.omega = c.get_optional("drive", "omega");
  if (s.omega) d.omega = *s.omega;
  d.p = c.get_double("drive", "p", d.p);
  d.sigma = c.get_double("drive", "sigma", d.sigma);
  d.x0 = c.get_double("drive", "x0", d.x0);
  d.species = static_cast<int>(c.get_int("drive", "species", d.species));
  d.spinor = static_cast<int>(c.get_int("drive", "spinor", d.spinor));
  s.duration = c.get_optional("drive", "duration");
  d.duration = s.duration;
  const auto env = Config::lower(c.get_string("drive", "envelope", "gaussian"));
  if (env == "gaussian")
    d.envelope = EnvelopeShape::Gaussian;
  else if (env == "constant")
    d.envelope = EnvelopeShape::Constant;
  else
    throw ConfigError("drive.envelope must be gaussian or constant");
  s.nu = static_cast<int>(c.get_int("drive", "nu", s.nu));
  s.window = c.get_optional("drive", "window");
  d.validate(l);
  return s;
}

struct SolverSettings {
  std::string backend = "exact";
  int qubit_cap = kDefaultQubitCap;
  int levels = 8;
  std::uint64_t seed = 12345;
  DmrgOptions dmrg{};
  EvolutionOptions evolution{};
};

inline SolverSettings solver_from(const Config& c) {
  SolverSettings s;
  s.backend = Config::lower(c.get_string("solver", "backend", s.backend));
  if (s.backend != "exact" && s.backend != "mps") throw ConfigError("solver.backend must be exact or mps");
  s.qubit_cap = static_cast<int>(c.get_int("solver", "qubit_cap", s.qubit_cap));
  s.levels = static_cast<int>(c.get_int("solver", "levels", s.levels));
  s.seed = static_cast<std::uint64_t>(c.get_int("solver", "seed", static_cast<long>(s.seed)));
  s.dmrg.chi_max = static_cast<int>(c.get_int("solver", "chi_max", s.dmrg.chi_max));
  s.dmrg.max_sweeps = static_cast<int>(c.get_int("solver", "sweeps", s.dmrg.max_sweeps));
  s.dmrg.tol = c.get_double("solver", "tol", s.dmrg.tol);
  s.dmrg.seed = s.seed;
  s.evolution.abs_tol = c.get_double("solver", "abs_tol", s.evolution.abs_tol);
  s.evolution.rel_tol = c.get_double("solver", "rel_tol", s.evolution.rel_tol);
  if (s.qubit_cap < 1) throw ConfigError("solver.qubit_cap must be >= 1");
  if (s.levels < 1) throw ConfigError("solver.levels must be >= 1");
  return s;
}

}  // namespace gnprep
