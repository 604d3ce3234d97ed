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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gnprep {

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr cplx kI{0.0, 1.0};

/// Base of every error raised by the library. `kind()` names the failure class
/// so the CLI can tag diagnostics without RTTI games.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape error", w) {}
};
struct ResourceError : Error {
  explicit ResourceError(const std::string& w) : Error("resource error", w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config error", w) {}
};
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& w) : Error("degenerate input", w) {}
};
struct ResonanceCollisionError : Error {
  explicit ResonanceCollisionError(const std::string& w) : Error("resonance collision", w) {}
};
struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& w) : Error("no convergence", w) {}
};
struct StiffnessError : Error {
  explicit StiffnessError(const std::string& w) : Error("stiffness", w) {}
};
struct NotHermitianError : Error {
  explicit NotHermitianError(const std::string& w) : Error("not hermitian", w) {}
};

/// Largest qubit count any explicit matrix realization will accept.
inline constexpr int kDefaultQubitCap = 22;
/// Above this many qubits matrices are realized sparse / matrix-free.
inline constexpr int kDenseQubitLimit = 12;

inline std::uint64_t pow2(int k) { return std::uint64_t{1} << k; }

}  // namespace gnprep
