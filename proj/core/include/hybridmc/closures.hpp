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

#ifndef HYBRIDMC_CLOSURES_HPP
#define HYBRIDMC_CLOSURES_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hybridmc/problem.hpp"
#include "hybridmc/tallies.hpp"

namespace hybridmc {

enum class Side { left, right };

/// Boundary data for the low-order Robin condition J = -/+ C phi_b.
struct BoundaryFactors {
  double current_ratio = 0.5;     // C_b = |J| / phi at the face
  double eddington = 1.0 / 3.0;   // E_b
  double sm_factor = 0.0;         // F_b = (1/3 - E_b) phi_b
  double phi = 0.0;               // face scalar flux
  bool fallback = true;
};

/// Cell-average QD and SM factors plus the Monte Carlo flux they came from.
struct ClosureSet {
  std::vector<double> eddington;
  std::vector<double> sm_factor;
  std::vector<double> phi_mc;
  std::vector<double> eddington_rel_stderr;
  std::vector<double> phi_rel_stderr;
  BoundaryFactors left;
  BoundaryFactors right;
  std::vector<std::size_t> fallback_cells;

  /// Provenance of the tallies (seed and history count); zero for closures
  /// not produced by Monte Carlo.
  std::uint64_t seed = 0;
  std::uint64_t histories = 0;

  std::size_t cells() const noexcept { return eddington.size(); }
  const BoundaryFactors& boundary(Side side) const noexcept {
    return side == Side::left ? left : right;
  }
  bool is_fallback(std::size_t i) const;
};

inline constexpr double kOneThird = 1.0 / 3.0;

/// sum mu^2 w l / sum w l, or 1/3 for a cell without tracks.
double estimate_eddington(const TallySet& tallies, std::size_t i);

/// (S_tot / (N dx)) * sum (1/3 - mu^2) w l; zero for a cell without tracks.
double estimate_sm_factor(const TallySet& tallies, std::size_t i,
                          std::uint64_t histories, double dx);

/// S_tot * sum w l / (N dx).
double estimate_scalar_flux(const TallySet& tallies, std::size_t i,
                            std::uint64_t histories, double dx);

/// Face estimators on the outer face of `side`. Without crossings this
/// returns the Marshak fallback (C = 1/2, E = 1/3, F = 0, phi = 0).
BoundaryFactors estimate_boundary_factors(const TallySet& tallies, Side side,
                                          std::uint64_t histories);

/// All closures of a run. N is taken from tallies.histories_completed.
ClosureSet compute_closures(const TallySet& tallies, const Mesh1D& mesh,
                            std::uint64_t seed = 0);

/// E = 1/3, F = 0 everywhere with Marshak boundary factors.
ClosureSet diffusion_closures(std::size_t cells);

void write_closure_csv(std::ostream& out, const ClosureSet& closures);

}  // namespace hybridmc

#endif  // HYBRIDMC_CLOSURES_HPP
