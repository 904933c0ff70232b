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

#include "hybridmc/closures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "hybridmc/errors.hpp"
#include "hybridmc/output.hpp"

namespace hybridmc {
namespace {

bool has_tracks(const TallySet& t, std::size_t i) { return t.sum_wl[i] > 0.0; }

// History-level variances of the per-history cell sums X = w l, Y = mu^2 w l.
struct HistoryMoments {
  double mean_x, var_x, var_y, cov_xy;
};

HistoryMoments history_moments(const TallySet& t, std::size_t i, double n) {
  const double mx = t.sum_wl[i] / n;
  const double my = t.sum_mu2_wl[i] / n;
  const double bessel = n / (n - 1.0);
  return {mx, (t.sum_wl_sq[i] / n - mx * mx) * bessel,
          (t.sum_mu2_wl_sq[i] / n - my * my) * bessel,
          (t.sum_wl_mu2_wl[i] / n - mx * my) * bessel};
}

}  // namespace

bool ClosureSet::is_fallback(std::size_t i) const {
  return std::binary_search(fallback_cells.begin(), fallback_cells.end(), i);
}

double estimate_eddington(const TallySet& tallies, std::size_t i) {
  if (!has_tracks(tallies, i)) return kOneThird;
  return tallies.sum_mu2_wl[i] / tallies.sum_wl[i];
}

double estimate_sm_factor(const TallySet& tallies, std::size_t i,
                          std::uint64_t histories, double dx) {
  if (!has_tracks(tallies, i)) return 0.0;
  const double norm = tallies.total_source / (static_cast<double>(histories) * dx);
  return norm * (kOneThird * tallies.sum_wl[i] - tallies.sum_mu2_wl[i]);
}

double estimate_scalar_flux(const TallySet& tallies, std::size_t i,
                            std::uint64_t histories, double dx) {
  return tallies.total_source * tallies.sum_wl[i] /
         (static_cast<double>(histories) * dx);
}

BoundaryFactors estimate_boundary_factors(const TallySet& tallies, Side side,
                                          std::uint64_t histories) {
  const std::size_t face = side == Side::left ? 0 : tallies.faces() - 1;
  const double flux_sum = tallies.sum_w_over_mu[face];
  if (!(flux_sum > 0.0)) return BoundaryFactors{};
  BoundaryFactors b;
  b.phi = tallies.total_source * flux_sum / static_cast<double>(histories);
  b.current_ratio = std::abs(tallies.sum_w_signed[face]) / flux_sum;
  b.eddington = tallies.sum_mu_w[face] / flux_sum;
  b.sm_factor = (kOneThird - b.eddington) * b.phi;
  b.fallback = false;
  return b;
}

ClosureSet compute_closures(const TallySet& tallies, const Mesh1D& mesh,
                            std::uint64_t seed) {
  if (tallies.cells() != mesh.cells())
    throw InvariantError("tally set does not match mesh");
  const std::uint64_t n = tallies.histories_completed;
  if (n == 0) throw DomainError("closures need at least one history");
  const std::size_t cells = mesh.cells();
  const double nd = static_cast<double>(n);
  ClosureSet c;
  c.eddington.resize(cells);
  c.sm_factor.resize(cells);
  c.phi_mc.resize(cells);
  c.eddington_rel_stderr.resize(cells);
  c.phi_rel_stderr.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double dx = mesh.width(i);
    c.eddington[i] = estimate_eddington(tallies, i);
    c.sm_factor[i] = estimate_sm_factor(tallies, i, n, dx);
    c.phi_mc[i] = estimate_scalar_flux(tallies, i, n, dx);
    if (!has_tracks(tallies, i)) {
      c.fallback_cells.push_back(i);
      c.eddington_rel_stderr[i] = std::numeric_limits<double>::quiet_NaN();
      c.phi_rel_stderr[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    if (n < 2) {
      c.eddington_rel_stderr[i] = std::numeric_limits<double>::quiet_NaN();
      c.phi_rel_stderr[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const auto m = history_moments(tallies, i, nd);
    const double e = c.eddington[i];
    // Delta-method variance of the ratio estimator.
    const double var_ratio =
        std::max(0.0, m.var_y - 2.0 * e * m.cov_xy + e * e * m.var_x) /
        (nd * m.mean_x * m.mean_x);
    c.eddington_rel_stderr[i] = std::sqrt(var_ratio) / e;
    c.phi_rel_stderr[i] = std::sqrt(std::max(0.0, m.var_x) / nd) / m.mean_x;
  }
  c.left = estimate_boundary_factors(tallies, Side::left, n);
  c.right = estimate_boundary_factors(tallies, Side::right, n);
  c.seed = seed;
  c.histories = n;
  return c;
}

ClosureSet diffusion_closures(std::size_t cells) {
  ClosureSet c;
  c.eddington.assign(cells, kOneThird);
  c.sm_factor.assign(cells, 0.0);
  c.phi_mc.assign(cells, 0.0);
  c.eddington_rel_stderr.assign(cells, 0.0);
  c.phi_rel_stderr.assign(cells, 0.0);
  return c;
}

void write_closure_csv(std::ostream& out, const ClosureSet& c) {
  CsvWriter csv(out);
  csv.row("section", "index", "E", "F", "phi_mc", "stderr_E", "fallback");
  for (std::size_t i = 0; i < c.cells(); ++i)
    csv.row("cell", i, c.eddington[i], c.sm_factor[i], c.phi_mc[i],
            c.eddington_rel_stderr[i] * c.eddington[i], c.is_fallback(i));
  csv.row("section", "side", "C_b", "E_b", "F_b", "phi_b", "fallback");
  csv.row("boundary", "left", c.left.current_ratio, c.left.eddington,
          c.left.sm_factor, c.left.phi, c.left.fallback);
  csv.row("boundary", "right", c.right.current_ratio, c.right.eddington,
          c.right.sm_factor, c.right.phi, c.right.fallback);
}

}  // namespace hybridmc
