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

#include "hybridmc/sn_reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hybridmc/errors.hpp"
#include "hybridmc/output.hpp"
#include "json.hpp"

namespace hybridmc {
namespace {

// Positive half of a symmetric quadrature; the negative half mirrors it.
struct HalfRange {
  std::vector<double> mu;
  std::vector<double> w;
  std::vector<double> w_mu2;
};

HalfRange half_range(const AngularQuadrature& quad) {
  const std::size_t m = quad.order() / 2;
  HalfRange h;
  h.mu.resize(m);
  h.w.resize(m);
  h.w_mu2.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    h.mu[k] = quad.nodes[m + k];
    h.w[k] = quad.weights[m + k];
    h.w_mu2[k] = h.w[k] * h.mu[k] * h.mu[k];
  }
  return h;
}

void check_quadrature(const AngularQuadrature& quad) {
  const std::size_t n = quad.order();
  if (n < 2 || n % 2 != 0 || quad.weights.size() != n)
    throw ConfigError("angular quadrature must have an even number of nodes");
}

// Moment-only sweep over both half ranges. Cell values are accumulated in
// a fixed order, so the result does not depend on anything but the inputs.
class MomentSweeper {
 public:
  static constexpr std::size_t kLanes = 8;

  MomentSweeper(const Mesh1D& mesh, const CellMaterials& mats,
                const AngularQuadrature& quad)
      : mesh_(mesh), mats_(mats), half_(half_range(quad)) {
    const std::size_t m = half_.mu.size();
    psi_.resize(m);
    keep_.resize(m);
    gain_.resize(m);
  }

  std::size_t run(std::span<const double> source, SnMoments& out) {
    const std::size_t n = mesh_.cells();
    const std::size_t m = half_.mu.size();
    out.phi.assign(n, 0.0);
    out.second_moment.assign(n, 0.0);
    std::size_t negatives = 0;
    for (int dir = 0; dir < 2; ++dir) {
      const bool forward = dir == 0;
      std::fill(psi_.begin(), psi_.end(), 0.0);
      double last_st = -1.0;
      double last_h = -1.0;
      for (std::size_t step = 0; step < n; ++step) {
        const std::size_t i = forward ? step : n - 1 - step;
        const double st = mats_.sigma_t[i];
        const double h = mesh_.width(i);
        // Uniform meshes differ in width only by rounding; reuse the
        // coefficients when the optical width agrees to 1e-14.
        if (std::abs(st * h - last_st * last_h) > 1.0e-14 * st * h ||
            std::abs(h - last_h) > 1.0e-14 * h) {
          for (std::size_t k = 0; k < m; ++k) {
            const double a = st * h / (2.0 * half_.mu[k]);
            keep_[k] = (1.0 - a) / (1.0 + a);
            gain_[k] = (h / half_.mu[k]) / (1.0 + a);
          }
          last_st = st;
          last_h = h;
        }
        const double s = source[i];
        // Fixed-order partial sums per lane: vectorizes and stays
        // bit-reproducible.
        double acc0[kLanes] = {};
        double acc2[kLanes] = {};
        double low[kLanes] = {};
        double* __restrict psi = psi_.data();
        const double* __restrict keep = keep_.data();
        const double* __restrict gain = gain_.data();
        const double* __restrict w = half_.w.data();
        const double* __restrict w_mu2 = half_.w_mu2.data();
        std::size_t k = 0;
        for (; k + kLanes <= m; k += kLanes) {
          for (std::size_t l = 0; l < kLanes; ++l) {
            const double in = psi[k + l];
            const double out_k = in * keep[k + l] + s * gain[k + l];
            const double avg = 0.5 * (in + out_k);
            acc0[l] += w[k + l] * avg;
            acc2[l] += w_mu2[k + l] * avg;
            low[l] = std::min(low[l], out_k);
            psi[k + l] = out_k;
          }
        }
        for (std::size_t l = 0; k < m; ++k, ++l) {
          const double in = psi[k];
          const double out_k = in * keep[k] + s * gain[k];
          const double avg = 0.5 * (in + out_k);
          acc0[l] += w[k] * avg;
          acc2[l] += w_mu2[k] * avg;
          low[l] = std::min(low[l], out_k);
          psi[k] = out_k;
        }
        double sum0 = 0.0;
        double sum2 = 0.0;
        double lowest = 0.0;
        for (std::size_t l = 0; l < kLanes; ++l) {
          sum0 += acc0[l];
          sum2 += acc2[l];
          lowest = std::min(lowest, low[l]);
        }
        if (lowest < 0.0) ++negatives;
        out.phi[i] += sum0;
        out.second_moment[i] += sum2;
      }
      const std::size_t face = forward ? 1 : 0;
      const double sign = forward ? 1.0 : -1.0;
      double f0 = 0.0;
      double f1 = 0.0;
      double f2 = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        f0 += half_.w[k] * psi_[k];
        f1 += half_.w[k] * half_.mu[k] * psi_[k];
        f2 += half_.w_mu2[k] * psi_[k];
      }
      out.face_phi[face] = f0;
      out.face_current[face] = sign * f1;
      out.face_second_moment[face] = f2;
    }
    return negatives;
  }

 private:
  const Mesh1D& mesh_;
  const CellMaterials& mats_;
  HalfRange half_;
  std::vector<double> psi_;
  std::vector<double> keep_;
  std::vector<double> gain_;
};

constexpr double kNestTolerance = 1.0e-10;

// Smallest relative difference that counts as a real change between levels.
constexpr double kLadderNoise = 1.0e-11;

}  // namespace

AngularQuadrature gauss_legendre(std::size_t n) {
  if (n < 2 || n % 2 != 0)
    throw ConfigError("Gauss-Legendre order must be even and >= 2");
  AngularQuadrature quad;
  quad.nodes.resize(n);
  quad.weights.resize(n);
  const std::size_t m = n / 2;
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
      }
      dp = nd * (z * p1 - p2) / (z * z - 1.0);
      const double z_old = z;
      z = z_old - p1 / dp;
      if (std::abs(z - z_old) <= 1.0e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p1 = 1.0;
    double p2 = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      const double jd = static_cast<double>(j);
      p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
    }
    dp = nd * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    quad.nodes[i] = -z;
    quad.nodes[n - 1 - i] = z;
    quad.weights[i] = w;
    quad.weights[n - 1 - i] = w;
  }
  return quad;
}

AngularFlux sweep(const SlabProblem& problem, const Mesh1D& mesh,
                  const AngularQuadrature& quad, std::span<const double> source) {
  check_quadrature(quad);
  const auto mats = cell_materials(problem, mesh);
  const std::size_t n = mesh.cells();
  if (source.size() != n) throw ConfigError("sweep source must have one value per cell");
  AngularFlux flux;
  flux.cells = n;
  flux.directions = quad.order();
  flux.cell_average.assign(n * flux.directions, 0.0);
  flux.edge.assign((n + 1) * flux.directions, 0.0);
  for (std::size_t k = 0; k < quad.order(); ++k) {
    const double mu = quad.nodes[k];
    const double abs_mu = std::abs(mu);
    double in = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t i = mu > 0.0 ? step : n - 1 - step;
      const double h = mesh.width(i);
      const double a = mats.sigma_t[i] * h / (2.0 * abs_mu);
      const double out = ((1.0 - a) * in + source[i] * h / abs_mu) / (1.0 + a);
      if (out < 0.0) ++flux.negative_edges;
      flux.cell_average[i * flux.directions + k] = 0.5 * (in + out);
      const std::size_t exit_face = mu > 0.0 ? i + 1 : i;
      flux.edge[exit_face * flux.directions + k] = out;
      in = out;
    }
  }
  return flux;
}

SnMoments moments_of(const AngularFlux& flux, const AngularQuadrature& quad) {
  SnMoments m;
  m.phi.assign(flux.cells, 0.0);
  m.second_moment.assign(flux.cells, 0.0);
  for (std::size_t i = 0; i < flux.cells; ++i) {
    for (std::size_t k = 0; k < flux.directions; ++k) {
      const double mu = quad.nodes[k];
      m.phi[i] += quad.weights[k] * flux.at(i, k);
      m.second_moment[i] += quad.weights[k] * mu * mu * flux.at(i, k);
    }
  }
  for (int side = 0; side < 2; ++side) {
    const std::size_t face = side == 0 ? 0 : flux.cells;
    for (std::size_t k = 0; k < flux.directions; ++k) {
      const double mu = quad.nodes[k];
      const double psi = flux.at_edge(face, k);
      m.face_phi[side] += quad.weights[k] * psi;
      m.face_current[side] += quad.weights[k] * mu * psi;
      m.face_second_moment[side] += quad.weights[k] * mu * mu * psi;
    }
  }
  return m;
}

SnSolution source_iteration(const SlabProblem& problem, const Mesh1D& mesh,
                            const AngularQuadrature& quad,
                            const SourceIterationOptions& options) {
  check_quadrature(quad);
  const auto mats = cell_materials(problem, mesh);
  const std::size_t n = mesh.cells();
  const bool coupled = std::any_of(mats.sigma_s.begin(), mats.sigma_s.end(),
                                   [](double s) { return s > 0.0; });
  MomentSweeper sweeper(mesh, mats, quad);
  std::vector<double> phi(n, 0.0);
  std::vector<double> source(n, 0.0);
  SnSolution sol;
  double previous_diff = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i)
      source[i] = 0.5 * (mats.sigma_s[i] * phi[i] + mats.q[i]);
    SnMoments next;
    sol.negative_edges = sweeper.run(source, next);
    double change = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = std::abs(next.phi[i] - phi[i]);
      diff = std::max(diff, d);
      if (next.phi[i] != 0.0) change = std::max(change, d / std::abs(next.phi[i]));
      else change = std::max(change, d);
    }
    if (previous_diff > 0.0) sol.spectral_radius = diff / previous_diff;
    previous_diff = diff;
    phi = next.phi;
    sol.moments = std::move(next);
    sol.iterations = it;
    if (!coupled || change < options.tolerance) return sol;
  }
  std::ostringstream msg;
  msg << "source iteration did not converge in " << options.max_iterations
      << " iterations (spectral radius estimate " << sol.spectral_radius << ")";
  throw NonConvergenceError(msg.str(), sol.spectral_radius);
}

double aitken_limit(double v0, double v1, double v2) noexcept {
  const double d1 = v1 - v0;
  const double d2 = v2 - v1;
  const double denom = d2 - d1;
  if (denom == 0.0) return v2;
  return v2 - d2 * d2 / denom;
}

double certified_digits(double extrapolated, double finest) noexcept {
  const double diff = std::abs(extrapolated - finest);
  if (diff == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log10(diff / std::abs(extrapolated));
}

std::vector<double> restrict_average(const Mesh1D& fine, std::span<const double> values,
                                     const Mesh1D& coarse) {
  if (values.size() != fine.cells())
    throw ConfigError("restriction input does not match the fine mesh");
  const auto fine_edges = fine.edges();
  const double scale = fine.length();
  std::vector<double> out(coarse.cells(), 0.0);
  std::size_t j = 0;
  for (std::size_t c = 0; c < coarse.cells(); ++c) {
    const double left = coarse.edge(c);
    const double right = coarse.edge(c + 1);
    if (std::abs(fine_edges[j] - left) > kNestTolerance * scale)
      throw ConfigError("target mesh is not nested in the fine mesh");
    double sum = 0.0;
    double width = 0.0;
    while (j < fine.cells() && fine_edges[j + 1] <= right + kNestTolerance * scale) {
      sum += values[j] * fine.width(j);
      width += fine.width(j);
      ++j;
    }
    if (std::abs(fine_edges[j] - right) > kNestTolerance * scale || width == 0.0)
      throw ConfigError("target mesh is not nested in the fine mesh");
    out[c] = sum / width;
  }
  return out;
}

std::vector<LadderLevel> default_ladder() {
  return {{2048, 2048}, {4096, 4096}, {8192, 8192}};
}

std::vector<LadderLevel> alternate_ladder() {
  return {{1920, 1920}, {3840, 3840}, {7680, 7680}};
}

std::vector<LadderResult> solve_ladder(const SlabProblem& problem,
                                       std::span<const LadderLevel> ladder,
                                       const SourceIterationOptions& options) {
  if (ladder.size() < 3) throw ConfigError("refinement ladder needs at least 3 levels");
  for (std::size_t k = 1; k < ladder.size(); ++k) {
    if (ladder[k].cells != 2 * ladder[k - 1].cells)
      throw ConfigError("each ladder level must double the cell count");
    if (ladder[k].quadrature_order <= ladder[k - 1].quadrature_order)
      throw ConfigError("each ladder level must raise the quadrature order");
  }
  std::vector<LadderResult> results;
  results.reserve(ladder.size());
  for (const auto& level : ladder) {
    auto mesh = build_uniform_mesh(problem, level.cells);
    const auto quad = gauss_legendre(level.quadrature_order);
    auto sol = source_iteration(problem, mesh, quad, options);
    results.push_back(LadderResult{level, std::move(mesh), std::move(sol)});
  }
  return results;
}

BenchmarkSolution extrapolate_to(const Mesh1D& target,
                                 std::span<const LadderResult> ladder,
                                 double required_digits) {
  if (ladder.size() < 3) throw ConfigError("refinement ladder needs at least 3 levels");
  BenchmarkSolution ref;
  ref.mesh = target;
  const std::size_t n = target.cells();
  std::vector<std::vector<double>> level_m2;
  for (const auto& lr : ladder) {
    ref.ladder.push_back(lr.level);
    ref.level_phi.push_back(restrict_average(lr.mesh, lr.solution.moments.phi, target));
    level_m2.push_back(
        restrict_average(lr.mesh, lr.solution.moments.second_moment, target));
    ref.level_iterations.push_back(lr.solution.iterations);
    ref.level_spectral_radius.push_back(lr.solution.spectral_radius);
    ref.level_negative_edges.push_back(lr.solution.negative_edges);
  }
  const std::size_t last = ladder.size() - 1;
  auto extrapolate = [&](double v0, double v1, double v2) { return aitken_limit(v0, v1, v2); };

  ref.phi.resize(n);
  ref.second_moment.resize(n);
  ref.certified_digits.resize(n);
  ref.min_certified_digits = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v0 = ref.level_phi[last - 2][i];
    const double v1 = ref.level_phi[last - 1][i];
    const double v2 = ref.level_phi[last][i];
    ref.phi[i] = extrapolate(v0, v1, v2);
    ref.second_moment[i] =
        extrapolate(level_m2[last - 2][i], level_m2[last - 1][i], level_m2[last][i]);
    ref.certified_digits[i] = certified_digits(ref.phi[i], v2);
    ref.min_certified_digits = std::min(ref.min_certified_digits, ref.certified_digits[i]);

    const double d1 = v1 - v0;
    const double d2 = v2 - v1;
    if (std::abs(d2) > kLadderNoise * std::abs(v2)) {
      std::ostringstream msg;
      if (d1 * d2 < 0.0)
        msg << "cell " << i << ": non-monotone ladder (differences " << d1 << ", " << d2 << ")";
      else if (std::abs(d2) >= std::abs(d1))
        msg << "cell " << i << ": stagnating ladder (differences " << d1 << ", " << d2 << ")";
      if (!msg.str().empty()) ref.diagnostics.push_back(msg.str());
    }
  }
  for (int side = 0; side < 2; ++side) {
    auto face = [&](double (SnMoments::*member)[2]) {
      return extrapolate((ladder[last - 2].solution.moments.*member)[side],
                         (ladder[last - 1].solution.moments.*member)[side],
                         (ladder[last].solution.moments.*member)[side]);
    };
    ref.face_phi[side] = face(&SnMoments::face_phi);
    ref.face_current[side] = face(&SnMoments::face_current);
    ref.face_second_moment[side] = face(&SnMoments::face_second_moment);
  }
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (ref.level_negative_edges[k] > 0) {
      std::ostringstream msg;
      msg << "level " << k << ": " << ref.level_negative_edges[k]
          << " negative diamond-difference edge fluxes";
      ref.diagnostics.push_back(msg.str());
    }
  }
  if (!ref.diagnostics.empty() || ref.min_certified_digits < required_digits) {
    std::ostringstream msg;
    msg << "reference on " << n << " cells certifies " << ref.min_certified_digits
        << " digits (required " << required_digits << ")";
    for (const auto& d : ref.diagnostics) msg << "; " << d;
    throw CertificationError(msg.str());
  }
  return ref;
}

BenchmarkSolution refine_and_extrapolate(const SlabProblem& problem,
                                         const Mesh1D& target,
                                         std::span<const LadderLevel> ladder,
                                         double required_digits) {
  const auto levels = solve_ladder(problem, ladder);
  return extrapolate_to(target, levels, required_digits);
}

ClosureSet oracle_closures(const BenchmarkSolution& ref) {
  const std::size_t n = ref.mesh.cells();
  ClosureSet c;
  c.eddington.resize(n);
  c.sm_factor.resize(n);
  c.phi_mc = ref.phi;
  c.eddington_rel_stderr.assign(n, 0.0);
  c.phi_rel_stderr.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    c.eddington[i] = ref.second_moment[i] / ref.phi[i];
    c.sm_factor[i] = kOneThird * ref.phi[i] - ref.second_moment[i];
  }
  for (int side = 0; side < 2; ++side) {
    BoundaryFactors b;
    b.phi = ref.face_phi[side];
    b.current_ratio = std::abs(ref.face_current[side]) / b.phi;
    b.eddington = ref.face_second_moment[side] / b.phi;
    b.sm_factor = kOneThird * b.phi - ref.face_second_moment[side];
    b.fallback = false;
    (side == 0 ? c.left : c.right) = b;
  }
  return c;
}

void write_benchmark_csv(std::ostream& out,
                         std::span<const BenchmarkSolution> references) {
  CsvWriter csv(out);
  csv.row("cells", "cell", "x_center", "phi_ex", "certified_digits");
  for (const auto& ref : references)
    for (std::size_t i = 0; i < ref.mesh.cells(); ++i)
      csv.row(ref.mesh.cells(), i, ref.mesh.center(i), ref.phi[i],
              ref.certified_digits[i]);
}

std::string benchmark_metadata_json(std::span<const BenchmarkSolution> references) {
  nlohmann::ordered_json doc;
  doc["method"] = "diamond-difference S_N source iteration, Aitken delta^2 over last three levels";
  auto& targets = doc["targets"];
  targets = nlohmann::ordered_json::array();
  for (const auto& ref : references) {
    nlohmann::ordered_json t;
    t["cells"] = ref.mesh.cells();
    t["min_certified_digits"] = format_double(ref.min_certified_digits);
    auto& levels = t["levels"];
    levels = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < ref.ladder.size(); ++k) {
      nlohmann::ordered_json lv;
      lv["cells"] = ref.ladder[k].cells;
      lv["quadrature_order"] = ref.ladder[k].quadrature_order;
      lv["iterations"] = ref.level_iterations[k];
      lv["spectral_radius"] = ref.level_spectral_radius[k];
      lv["negative_edges"] = ref.level_negative_edges[k];
      lv["phi"] = ref.level_phi[k];
      levels.push_back(std::move(lv));
    }
    t["phi_ex"] = ref.phi;
    targets.push_back(std::move(t));
  }
  return doc.dump(2) + "\n";
}

}  // namespace hybridmc
