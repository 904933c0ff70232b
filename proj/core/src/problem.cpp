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

#include "hybridmc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "hybridmc/errors.hpp"

namespace hybridmc {
namespace {

// Edges closer than this (relative to L) are treated as coincident.
constexpr double kEdgeTolerance = 1.0e-12;

bool same_position(double a, double b, double scale) {
  return std::abs(a - b) <= kEdgeTolerance * scale;
}

}  // namespace

SlabProblem::SlabProblem(std::vector<MaterialRegion> regions)
    : regions_(std::move(regions)) {
  if (regions_.empty()) throw ConfigError("slab problem needs at least one region");
  if (regions_.front().x_left != 0.0)
    throw ConfigError("first region must start at x = 0");
  const double scale = std::abs(regions_.back().x_right);
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    const auto& reg = regions_[r];
    std::ostringstream where;
    where << "region " << r << ": ";
    if (!(reg.x_left < reg.x_right))
      throw ConfigError(where.str() + "x_left must be < x_right");
    if (!(reg.sigma_t > 0.0))
      throw ConfigError(where.str() + "sigma_t must be > 0");
    if (!(reg.sigma_s >= 0.0) || reg.sigma_s > reg.sigma_t)
      throw ConfigError(where.str() + "need 0 <= sigma_s <= sigma_t");
    if (!(reg.q >= 0.0)) throw ConfigError(where.str() + "q must be >= 0");
    if (r > 0 && !same_position(regions_[r - 1].x_right, reg.x_left, scale))
      throw ConfigError(where.str() + "regions must be contiguous");
    if (r > 0) regions_[r].x_left = regions_[r - 1].x_right;
  }
}

std::size_t SlabProblem::region_index_at(double x) const {
  if (!(x >= 0.0 && x <= length())) {
    std::ostringstream msg;
    msg << "position " << x << " outside slab [0, " << length() << "]";
    throw DomainError(msg.str());
  }
  auto it = std::upper_bound(regions_.begin(), regions_.end(), x,
                             [](double v, const MaterialRegion& reg) {
                               return v < reg.x_right;
                             });
  if (it == regions_.end()) return regions_.size() - 1;
  return static_cast<std::size_t>(it - regions_.begin());
}

CrossSections SlabProblem::cross_sections_at(double x) const {
  const auto& reg = regions_[region_index_at(x)];
  return {reg.sigma_t, reg.sigma_s, reg.q};
}

double SlabProblem::total_source() const noexcept {
  double s = 0.0;
  for (const auto& reg : regions_) s += reg.q * (reg.x_right - reg.x_left);
  return s;
}

SlabProblem benchmark_problem() {
  return SlabProblem({MaterialRegion{0.0, 1.0, 1.0, 0.9, 1.0}});
}

Mesh1D::Mesh1D(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw ConfigError("mesh needs at least one cell");
  for (std::size_t f = 1; f < edges_.size(); ++f)
    if (!(edges_[f] > edges_[f - 1]))
      throw ConfigError("mesh edges must be strictly increasing");
}

std::size_t Mesh1D::cell_at(double x) const {
  if (!(x >= edges_.front() && x <= edges_.back()))
    throw DomainError("position outside mesh");
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  const auto idx = static_cast<std::size_t>(it - edges_.begin());
  return std::min(idx == 0 ? 0 : idx - 1, cells() - 1);
}

Mesh1D build_uniform_mesh(const SlabProblem& problem, std::size_t cells) {
  if (cells < 1) throw ConfigError("mesh needs at least one cell");
  const double length = problem.length();
  std::vector<double> edges(cells + 1);
  for (std::size_t f = 0; f <= cells; ++f)
    edges[f] = length * static_cast<double>(f) / static_cast<double>(cells);
  edges.back() = length;
  Mesh1D mesh(std::move(edges));
  // Validates region alignment.
  (void)cell_materials(problem, mesh);
  return mesh;
}

CellMaterials cell_materials(const SlabProblem& problem, const Mesh1D& mesh) {
  const double scale = problem.length();
  if (!same_position(mesh.edges().front(), 0.0, scale) ||
      !same_position(mesh.edges().back(), problem.length(), scale))
    throw ConfigError("mesh does not span the slab");
  for (const auto& reg : problem.regions()) {
    const auto edges = mesh.edges();
    const bool aligned = std::any_of(edges.begin(), edges.end(), [&](double e) {
      return same_position(e, reg.x_right, scale);
    });
    if (!aligned) {
      std::ostringstream msg;
      msg << "region boundary x = " << reg.x_right
          << " does not coincide with a mesh edge";
      throw ConfigError(msg.str());
    }
  }
  CellMaterials mats;
  const std::size_t n = mesh.cells();
  mats.sigma_t.resize(n);
  mats.sigma_s.resize(n);
  mats.q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xs = problem.cross_sections_at(mesh.center(i));
    mats.sigma_t[i] = xs.sigma_t;
    mats.sigma_s[i] = xs.sigma_s;
    mats.q[i] = xs.q;
  }
  return mats;
}

std::string_view to_string(CaptureMode mode) noexcept {
  return mode == CaptureMode::analog ? "analog" : "implicit";
}

CaptureMode capture_mode_from_string(std::string_view name) {
  if (name == "analog") return CaptureMode::analog;
  if (name == "implicit") return CaptureMode::implicit;
  throw ConfigError("capture_mode must be 'analog' or 'implicit', got '" +
                    std::string(name) + "'");
}

void RunConfig::validate() const {
  if (histories < 1) throw ConfigError("histories must be >= 1");
  if (replicate_count < 1) throw ConfigError("replicates must be >= 1");
  if (!(weight_cutoff > 0.0 && weight_cutoff < 1.0))
    throw ConfigError("weight_cutoff must lie in (0, 1)");
  if (!(roulette_survival > 0.0 && roulette_survival <= 1.0))
    throw ConfigError("roulette_survival must lie in (0, 1]");
  if (!(face_mu_floor >= 0.0 && face_mu_floor < 1.0))
    throw ConfigError("face_mu_floor must lie in [0, 1)");
  if (max_events < 1) throw ConfigError("max_events must be >= 1");
}

}  // namespace hybridmc
