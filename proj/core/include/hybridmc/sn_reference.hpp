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

#ifndef HYBRIDMC_SN_REFERENCE_HPP
#define HYBRIDMC_SN_REFERENCE_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hybridmc/closures.hpp"
#include "hybridmc/problem.hpp"

namespace hybridmc {

/// Gauss-Legendre set on [-1, 1], nodes ascending.
struct AngularQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const noexcept { return nodes.size(); }
};

/// Even n >= 2 only (odd orders put a node at mu = 0).
AngularQuadrature gauss_legendre(std::size_t n);

/// Angular flux table from one transport sweep.
struct AngularFlux {
  std::size_t cells = 0;
  std::size_t directions = 0;
  std::vector<double> cell_average;  // [cell * directions + k]
  std::vector<double> edge;          // [face * directions + k]
  std::size_t negative_edges = 0;

  double at(std::size_t cell, std::size_t k) const {
    return cell_average[cell * directions + k];
  }
  double at_edge(std::size_t face, std::size_t k) const {
    return edge[face * directions + k];
  }
};

/// Diamond-difference sweep with vacuum inflow. `source` is the isotropic
/// emission density per unit mu in each cell, i.e. (sigma_s phi + q) / 2.
AngularFlux sweep(const SlabProblem& problem, const Mesh1D& mesh,
                  const AngularQuadrature& quad, std::span<const double> source);

/// Angular moments of a discrete-ordinates solution.
struct SnMoments {
  std::vector<double> phi;            // cell-average scalar flux
  std::vector<double> second_moment;  // cell average of int mu^2 psi dmu
  // Face moments on the two outer faces: [0] = x = 0, [1] = x = L.
  double face_phi[2] = {0.0, 0.0};
  double face_current[2] = {0.0, 0.0};
  double face_second_moment[2] = {0.0, 0.0};
};

SnMoments moments_of(const AngularFlux& flux, const AngularQuadrature& quad);

struct SourceIterationOptions {
  double tolerance = 1.0e-12;  // max relative change of phi
  std::size_t max_iterations = 100000;
};

struct SnSolution {
  SnMoments moments;
  std::size_t iterations = 0;
  double spectral_radius = 0.0;  // last successive-difference ratio
  std::size_t negative_edges = 0;
};

/// Fixed-point iteration on the scattering source. Throws
/// NonConvergenceError when the cap is reached.
SnSolution source_iteration(const SlabProblem& problem, const Mesh1D& mesh,
                            const AngularQuadrature& quad,
                            const SourceIterationOptions& options = {});

/// Aitken delta-squared limit of three iterates; returns the last iterate
/// when the second difference vanishes.
double aitken_limit(double v0, double v1, double v2) noexcept;

/// -log10(|extrapolated - finest| / |extrapolated|); +inf on exact agreement.
double certified_digits(double extrapolated, double finest) noexcept;

/// Volume average of fine-mesh cell values onto a coarser mesh whose edges
/// are all fine-mesh edges. Throws ConfigError if the meshes do not nest.
std::vector<double> restrict_average(const Mesh1D& fine, std::span<const double> values,
                                     const Mesh1D& coarse);

struct LadderLevel {
  std::size_t cells = 0;
  std::size_t quadrature_order = 0;
};

/// Ladder used for the shipped benchmark.
std::vector<LadderLevel> default_ladder();
/// A second ladder sharing no level with default_ladder(), for cross-checks.
std::vector<LadderLevel> alternate_ladder();

/// Converged S_N solution on one ladder level.
struct LadderResult {
  LadderLevel level;
  Mesh1D mesh;
  SnSolution solution;
};

/// Solves every level. Levels must double the cell count and raise the
/// quadrature order; at least three are required.
std::vector<LadderResult> solve_ladder(const SlabProblem& problem,
                                       std::span<const LadderLevel> ladder,
                                       const SourceIterationOptions& options = {});

/// Extrapolated reference on one target mesh.
struct BenchmarkSolution {
  Mesh1D mesh{std::vector<double>{0.0, 1.0}};
  std::vector<double> phi;
  std::vector<double> second_moment;
  double face_phi[2] = {0.0, 0.0};
  double face_current[2] = {0.0, 0.0};
  double face_second_moment[2] = {0.0, 0.0};

  std::vector<double> certified_digits;  // per cell, phi only
  double min_certified_digits = 0.0;

  std::vector<LadderLevel> ladder;
  std::vector<std::vector<double>> level_phi;  // [level][cell]
  std::vector<std::size_t> level_iterations;
  std::vector<double> level_spectral_radius;
  std::vector<std::size_t> level_negative_edges;
  std::vector<std::string> diagnostics;
};

/// Aitken extrapolation of the last three ladder levels restricted to
/// `target`. Throws CertificationError when fewer than `required_digits`
/// digits are certified in some cell or the ladder is non-monotone or
/// stagnating.
BenchmarkSolution extrapolate_to(const Mesh1D& target,
                                 std::span<const LadderResult> ladder,
                                 double required_digits = 6.0);

BenchmarkSolution refine_and_extrapolate(const SlabProblem& problem,
                                         const Mesh1D& target,
                                         std::span<const LadderLevel> ladder,
                                         double required_digits = 6.0);

/// Closures taken from the reference angular moments instead of Monte Carlo.
ClosureSet oracle_closures(const BenchmarkSolution& reference);

/// target I, cell, phi_ex, certified_digits rows for each reference.
void write_benchmark_csv(std::ostream& out,
                         std::span<const BenchmarkSolution> references);
/// Ladder metadata (levels, iterations, per-level values) as JSON.
std::string benchmark_metadata_json(std::span<const BenchmarkSolution> references);

}  // namespace hybridmc

#endif  // HYBRIDMC_SN_REFERENCE_HPP
