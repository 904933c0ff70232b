// Copyright 2026 The hybridmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYBRIDMC_LO_SOLVERS_HPP
#define HYBRIDMC_LO_SOLVERS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "hybridmc/closures.hpp"
#include "hybridmc/problem.hpp"

namespace hybridmc {

enum class Method { hqd, hsm };

std::string_view to_string(Method method) noexcept;
Method method_from_string(std::string_view name);

/// Row i reads lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i];
/// lower[0] and upper[I-1] are zero.
struct TridiagonalSystem {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;
  std::vector<double> rhs;

  explicit TridiagonalSystem(std::size_t n = 0)
      : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0) {}
  std::size_t size() const noexcept { return diag.size(); }
};

struct FaceCoefficients {
  double sigma_t;  // width-weighted face cross section
  double width;    // (dx_i + dx_{i+1}) / 2
};

FaceCoefficients face_sigma_and_width(double sigma_t_i, double sigma_t_ip1,
                                      double dx_i, double dx_ip1);

/// Finite-volume quasidiffusion system for cell-average fluxes. Interior
/// face currents are -(E_{i+1} phi_{i+1} - E_i phi_i) / (sigma_t dx)_face;
/// the outer face currents obey J = -/+ C_b phi_b, with phi_b eliminated
/// through a half-cell difference.
TridiagonalSystem assemble_hqd(const SlabProblem& problem, const Mesh1D& mesh,
                               const ClosureSet& closures);

/// Finite-volume second-moment system: diffusion operator with 1/(3 sigma_t)
/// and the F-gradient moved to the right-hand side. Identical to
/// assemble_hqd when E = 1/3 and F = 0.
TridiagonalSystem assemble_hsm(const SlabProblem& problem, const Mesh1D& mesh,
                               const ClosureSet& closures);

TridiagonalSystem assemble(Method method, const SlabProblem& problem,
                           const Mesh1D& mesh, const ClosureSet& closures);

/// Thomas algorithm. Throws SingularSystemError naming the row of a zero
/// pivot.
std::vector<double> solve_tridiagonal(const TridiagonalSystem& system);

/// max_i |(A x - b)_i|.
double residual_inf_norm(const TridiagonalSystem& system, std::span<const double> x);

struct LoSolution {
  std::vector<double> phi;
  Method method = Method::hqd;
  std::uint64_t seed = 0;
  std::uint64_t histories = 0;
};

/// Assembles for `method` and solves directly.
LoSolution solve_hybrid(const SlabProblem& problem, const Mesh1D& mesh,
                        const ClosureSet& closures, Method method);

/// Global particle balance of a low-order solution: absorption plus the two
/// outer-face leakages against the source.
struct BalanceReport {
  double absorption = 0.0;
  double leakage_left = 0.0;
  double leakage_right = 0.0;
  double source = 0.0;

  double relative_residual() const noexcept;
};

BalanceReport particle_balance(const SlabProblem& problem, const Mesh1D& mesh,
                               const ClosureSet& closures, Method method,
                               std::span<const double> phi);

void write_solution_csv(std::ostream& out, const Mesh1D& mesh,
                        const LoSolution& solution);

}  // namespace hybridmc

#endif  // HYBRIDMC_LO_SOLVERS_HPP
