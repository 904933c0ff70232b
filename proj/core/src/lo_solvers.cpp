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

#include "hybridmc/lo_solvers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "hybridmc/errors.hpp"
#include "hybridmc/output.hpp"

namespace hybridmc {
namespace {

void check_closures(const Mesh1D& mesh, const ClosureSet& closures) {
  const std::size_t n = mesh.cells();
  if (closures.eddington.size() != n || closures.sm_factor.size() != n)
    throw AssemblyError("closure set has " + std::to_string(closures.cells()) +
                        " cells, mesh has " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(closures.eddington[i]) || !(closures.eddington[i] > 0.0) ||
        !std::isfinite(closures.sm_factor[i]))
      throw AssemblyError("missing or invalid closure in cell " + std::to_string(i));
  }
  for (const auto* b : {&closures.left, &closures.right}) {
    if (!(b->current_ratio > 0.0) || !(b->eddington > 0.0) ||
        !std::isfinite(b->sm_factor))
      throw AssemblyError("missing or invalid boundary factors");
  }
}

// 1 / (sigma_t dx) on each interior face; entry f couples cells f-1 and f.
std::vector<double> face_conductance(const Mesh1D& mesh, const CellMaterials& mats) {
  const std::size_t n = mesh.cells();
  std::vector<double> g(n + 1, 0.0);
  for (std::size_t f = 1; f < n; ++f) {
    const auto face = face_sigma_and_width(mats.sigma_t[f - 1], mats.sigma_t[f],
                                           mesh.width(f - 1), mesh.width(f));
    g[f] = 1.0 / (face.sigma_t * face.width);
  }
  return g;
}

// Optical half-width of the boundary cell.
double half_cell(const Mesh1D& mesh, const CellMaterials& mats, std::size_t i) {
  return 0.5 * mats.sigma_t[i] * mesh.width(i);
}

// Outgoing leakage coefficient and constant: leakage = a * phi_cell + b.
struct BoundaryLeak {
  double a = 0.0;
  double b = 0.0;
};

BoundaryLeak boundary_leak(Method method, const BoundaryFactors& bf, double h,
                           double e_cell, double f_cell) {
  const double c = bf.current_ratio;
  if (method == Method::hqd) return {c * e_cell / (c * h + bf.eddington), 0.0};
  const double denom = c * h + kOneThird;
  return {c * kOneThird / denom, c * (bf.sm_factor - f_cell) / denom};
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  return method == Method::hqd ? "HQD" : "HSM";
}

Method method_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "hqd") return Method::hqd;
  if (lower == "hsm") return Method::hsm;
  throw ConfigError("method must be 'hqd' or 'hsm', got '" + std::string(name) + "'");
}

FaceCoefficients face_sigma_and_width(double sigma_t_i, double sigma_t_ip1,
                                      double dx_i, double dx_ip1) {
  return {(sigma_t_i * dx_i + sigma_t_ip1 * dx_ip1) / (dx_i + dx_ip1),
          0.5 * (dx_i + dx_ip1)};
}

TridiagonalSystem assemble_hqd(const SlabProblem& problem, const Mesh1D& mesh,
                               const ClosureSet& closures) {
  check_closures(mesh, closures);
  const auto mats = cell_materials(problem, mesh);
  const auto g = face_conductance(mesh, mats);
  const auto& e = closures.eddington;
  const std::size_t n = mesh.cells();
  TridiagonalSystem sys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = mesh.width(i);
    sys.diag[i] = mats.sigma_a(i) * dx;
    sys.rhs[i] = mats.q[i] * dx;
    if (i + 1 < n) {
      sys.diag[i] += e[i] * g[i + 1];
      sys.upper[i] = -e[i + 1] * g[i + 1];
    }
    if (i > 0) {
      sys.diag[i] += e[i] * g[i];
      sys.lower[i] = -e[i - 1] * g[i];
    }
  }
  const auto left = boundary_leak(Method::hqd, closures.left,
                                  half_cell(mesh, mats, 0), e[0], 0.0);
  const auto right = boundary_leak(Method::hqd, closures.right,
                                   half_cell(mesh, mats, n - 1), e[n - 1], 0.0);
  sys.diag[0] += left.a;
  sys.diag[n - 1] += right.a;
  return sys;
}

TridiagonalSystem assemble_hsm(const SlabProblem& problem, const Mesh1D& mesh,
                               const ClosureSet& closures) {
  check_closures(mesh, closures);
  const auto mats = cell_materials(problem, mesh);
  const auto g = face_conductance(mesh, mats);
  const auto& f = closures.sm_factor;
  const std::size_t n = mesh.cells();
  TridiagonalSystem sys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = mesh.width(i);
    sys.diag[i] = mats.sigma_a(i) * dx;
    sys.rhs[i] = mats.q[i] * dx;
    if (i + 1 < n) {
      sys.diag[i] += kOneThird * g[i + 1];
      sys.upper[i] = -kOneThird * g[i + 1];
      sys.rhs[i] -= (f[i + 1] - f[i]) * g[i + 1];
    }
    if (i > 0) {
      sys.diag[i] += kOneThird * g[i];
      sys.lower[i] = -kOneThird * g[i];
      sys.rhs[i] += (f[i] - f[i - 1]) * g[i];
    }
  }
  const auto left = boundary_leak(Method::hsm, closures.left,
                                  half_cell(mesh, mats, 0), 0.0, f[0]);
  const auto right = boundary_leak(Method::hsm, closures.right,
                                   half_cell(mesh, mats, n - 1), 0.0, f[n - 1]);
  sys.diag[0] += left.a;
  sys.rhs[0] -= left.b;
  sys.diag[n - 1] += right.a;
  sys.rhs[n - 1] -= right.b;
  return sys;
}

TridiagonalSystem assemble(Method method, const SlabProblem& problem,
                           const Mesh1D& mesh, const ClosureSet& closures) {
  return method == Method::hqd ? assemble_hqd(problem, mesh, closures)
                               : assemble_hsm(problem, mesh, closures);
}

std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys) {
  const std::size_t n = sys.size();
  if (n == 0) return {};
  std::vector<double> c_prime(n, 0.0);
  std::vector<double> x(n, 0.0);
  double pivot = sys.diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) pivot = sys.diag[i] - sys.lower[i] * c_prime[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      std::ostringstream msg;
      msg << "singular tridiagonal system: zero pivot in row " << i;
      throw SingularSystemError(msg.str(), i);
    }
    c_prime[i] = sys.upper[i] / pivot;
    x[i] = (sys.rhs[i] - (i > 0 ? sys.lower[i] * x[i - 1] : 0.0)) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_prime[i] * x[i + 1];
  return x;
}

double residual_inf_norm(const TridiagonalSystem& sys, std::span<const double> x) {
  double worst = 0.0;
  const std::size_t n = sys.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = sys.diag[i] * x[i] - sys.rhs[i];
    if (i > 0) r += sys.lower[i] * x[i - 1];
    if (i + 1 < n) r += sys.upper[i] * x[i + 1];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

LoSolution solve_hybrid(const SlabProblem& problem, const Mesh1D& mesh,
                        const ClosureSet& closures, Method method) {
  LoSolution sol;
  sol.phi = solve_tridiagonal(assemble(method, problem, mesh, closures));
  sol.method = method;
  sol.seed = closures.seed;
  sol.histories = closures.histories;
  return sol;
}

double BalanceReport::relative_residual() const noexcept {
  return std::abs(absorption + leakage_left + leakage_right - source) /
         std::abs(source);
}

BalanceReport particle_balance(const SlabProblem& problem, const Mesh1D& mesh,
                               const ClosureSet& closures, Method method,
                               std::span<const double> phi) {
  const auto mats = cell_materials(problem, mesh);
  const std::size_t n = mesh.cells();
  BalanceReport r;
  for (std::size_t i = 0; i < n; ++i) {
    r.absorption += mats.sigma_a(i) * mesh.width(i) * phi[i];
    r.source += mats.q[i] * mesh.width(i);
  }
  const auto& e = closures.eddington;
  const auto& f = closures.sm_factor;
  const auto left = boundary_leak(method, closures.left, half_cell(mesh, mats, 0),
                                  e[0], f[0]);
  const auto right = boundary_leak(method, closures.right,
                                   half_cell(mesh, mats, n - 1), e[n - 1], f[n - 1]);
  r.leakage_left = left.a * phi[0] + left.b;
  r.leakage_right = right.a * phi[n - 1] + right.b;
  return r;
}

void write_solution_csv(std::ostream& out, const Mesh1D& mesh,
                        const LoSolution& solution) {
  CsvWriter csv(out);
  csv.row("cell", "x_center", "phi", "method", "seed", "histories");
  for (std::size_t i = 0; i < solution.phi.size(); ++i)
    csv.row(i, mesh.center(i), solution.phi[i], to_string(solution.method),
            solution.seed, solution.histories);
}

}  // namespace hybridmc
