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

#ifndef HYBRIDMC_PROBLEM_HPP
#define HYBRIDMC_PROBLEM_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hybridmc {

/// One slab region with constant data. Absorption is always derived as
/// sigma_t - sigma_s.
struct MaterialRegion {
  double x_left = 0.0;
  double x_right = 0.0;
  double sigma_t = 0.0;
  double sigma_s = 0.0;
  double q = 0.0;

  double sigma_a() const noexcept { return sigma_t - sigma_s; }
};

struct CrossSections {
  double sigma_t;
  double sigma_s;
  double q;

  double sigma_a() const noexcept { return sigma_t - sigma_s; }
};

/// One-group slab [0, L] with vacuum boundaries on both ends.
class SlabProblem {
 public:
  /// Validates the region list; throws ConfigError when regions do not tile
  /// [0, L] or violate sigma_t >= sigma_s >= 0, sigma_t > 0, q >= 0.
  explicit SlabProblem(std::vector<MaterialRegion> regions);

  double length() const noexcept { return regions_.back().x_right; }
  std::span<const MaterialRegion> regions() const noexcept { return regions_; }

  /// Data of the region containing x. Regions are half-open [x_left, x_right)
  /// except the last one, which also contains x = L.
  CrossSections cross_sections_at(double x) const;
  std::size_t region_index_at(double x) const;

  /// Integral of q over the slab.
  double total_source() const noexcept;

 private:
  std::vector<MaterialRegion> regions_;
};

/// Homogeneous unit slab with sigma_t = 1, sigma_s = 0.9, q = 1.
SlabProblem benchmark_problem();

class Mesh1D {
 public:
  explicit Mesh1D(std::vector<double> edges);

  std::size_t cells() const noexcept { return edges_.size() - 1; }
  std::size_t faces() const noexcept { return edges_.size(); }
  std::span<const double> edges() const noexcept { return edges_; }
  double edge(std::size_t f) const { return edges_[f]; }
  double width(std::size_t i) const { return edges_[i + 1] - edges_[i]; }
  double center(std::size_t i) const { return 0.5 * (edges_[i] + edges_[i + 1]); }
  double length() const noexcept { return edges_.back() - edges_.front(); }

  /// Cell containing x under the same half-open convention as regions.
  std::size_t cell_at(double x) const;

 private:
  std::vector<double> edges_;
};

/// Uniform mesh of `cells` cells on [0, L]. Throws ConfigError if a region
/// boundary does not fall on a mesh edge.
Mesh1D build_uniform_mesh(const SlabProblem& problem, std::size_t cells);

/// Per-cell material data; exact because region edges align with mesh edges.
struct CellMaterials {
  std::vector<double> sigma_t;
  std::vector<double> sigma_s;
  std::vector<double> q;

  double sigma_a(std::size_t i) const { return sigma_t[i] - sigma_s[i]; }
};

/// Throws ConfigError when a region boundary falls strictly inside a cell.
CellMaterials cell_materials(const SlabProblem& problem, const Mesh1D& mesh);

enum class CaptureMode { analog, implicit };

std::string_view to_string(CaptureMode mode) noexcept;
CaptureMode capture_mode_from_string(std::string_view name);

struct RunConfig {
  std::uint64_t histories = 1000;
  std::uint64_t rng_seed = 1;
  CaptureMode capture_mode = CaptureMode::analog;
  std::size_t replicate_count = 1;
  /// Implicit capture: roulette is played once the weight falls below this.
  double weight_cutoff = 0.01;
  double roulette_survival = 0.5;
  /// Floor on |mu| in the w/|mu| face flux score.
  double face_mu_floor = 1.0e-3;
  std::uint64_t max_events = 1'000'000;
  /// 0 means hardware concurrency.
  std::size_t workers = 0;

  /// Throws ConfigError on N < 1, replicate_count < 1 or bad roulette data.
  void validate() const;
};

}  // namespace hybridmc

#endif  // HYBRIDMC_PROBLEM_HPP
