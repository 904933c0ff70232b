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

#ifndef HYBRIDMC_MC_ENGINE_HPP
#define HYBRIDMC_MC_ENGINE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "hybridmc/problem.hpp"
#include "hybridmc/rng.hpp"
#include "hybridmc/tallies.hpp"

namespace hybridmc {

struct ParticleState {
  double x = 0.0;
  double mu = 1.0;
  double w = 1.0;
  bool alive = true;
  std::size_t cell = 0;
};

/// Inverse CDF of the source density q(x) at variate xi in (0, 1).
/// Throws ConfigError if the source is identically zero.
double source_position(const SlabProblem& problem, double xi);

/// 2 xi - 1. May return exactly 0; callers resample in that case.
inline double isotropic_direction(double xi) noexcept { return 2.0 * xi - 1.0; }

template <UniformSource S>
double sample_direction(S& stream) {
  for (;;) {
    const double mu = isotropic_direction(stream.uniform());
    if (mu != 0.0) return mu;
  }
}

/// Source particle with unit weight: position, then direction.
template <UniformSource S>
ParticleState sample_source_particle(const SlabProblem& problem,
                                     const Mesh1D& mesh, S& stream) {
  ParticleState p;
  p.x = source_position(problem, stream.uniform());
  p.mu = sample_direction(stream);
  p.w = 1.0;
  p.alive = true;
  p.cell = mesh.cell_at(p.x);
  return p;
}

inline double distance_to_collision(double sigma_t, double xi) {
  return -std::log(xi) / sigma_t;
}

template <UniformSource S>
double distance_to_collision(double sigma_t, S& stream) {
  return distance_to_collision(sigma_t, stream.uniform());
}

/// Moves the particle until it has accumulated `optical_depth` mean free
/// paths or leaves the slab, crossing cells with their own sigma_t (surface
/// tracking). Each cell segment of path length l scores w*l and mu^2*w*l;
/// each face crossing scores the three face moments. A particle leaving
/// through face 0 or face I is returned dead.
ParticleState fly_and_tally(ParticleState p, double optical_depth,
                            const Mesh1D& mesh, std::span<const double> sigma_t,
                            HistoryTally& tally, double face_mu_floor);

struct CollisionSettings {
  CaptureMode mode = CaptureMode::analog;
  double weight_cutoff = 0.01;
  double roulette_survival = 0.5;
};

/// Analog: scatter with probability sigma_s/sigma_t, else absorb.
/// Implicit: w *= sigma_s/sigma_t, always scatter, Russian roulette below the
/// weight cutoff (survivors carry w / roulette_survival).
/// Variate order: branch or roulette variate first, then the new direction.
template <UniformSource S>
ParticleState collide(ParticleState p, double sigma_t, double sigma_s,
                      const CollisionSettings& settings, S& stream) {
  const double c = sigma_s / sigma_t;
  if (settings.mode == CaptureMode::analog) {
    if (!(stream.uniform() < c)) {
      p.alive = false;
      return p;
    }
  } else {
    p.w *= c;
    if (p.w <= 0.0) {
      p.alive = false;
      return p;
    }
    if (p.w < settings.weight_cutoff) {
      if (stream.uniform() < settings.roulette_survival) {
        p.w /= settings.roulette_survival;
      } else {
        p.alive = false;
        return p;
      }
    }
  }
  p.mu = sample_direction(stream);
  return p;
}

/// Per-flight diagnostic hook: called with the state before and after each
/// flight.
using FlightObserver =
    std::function<void(const ParticleState& before, const ParticleState& after)>;

struct HistoryOutcome {
  std::uint64_t events = 0;
  bool anomalous = false;
};

/// Precomputed per-cell data shared by all histories of a run.
class TransportContext {
 public:
  TransportContext(const SlabProblem& problem, const Mesh1D& mesh,
                   const RunConfig& config);

  const SlabProblem& problem() const noexcept { return problem_; }
  const Mesh1D& mesh() const noexcept { return mesh_; }
  const RunConfig& config() const noexcept { return config_; }
  const CellMaterials& materials() const noexcept { return materials_; }
  const CollisionSettings& collision() const noexcept { return collision_; }

 private:
  SlabProblem problem_;
  Mesh1D mesh_;
  RunConfig config_;
  CellMaterials materials_;
  CollisionSettings collision_;
};

/// Runs history `history_index` (1-based) from birth to death. Its variates
/// come from RandomStream(config.rng_seed, history_index). Scores stay in
/// `tally` until the caller folds them into a TallySet.
HistoryOutcome simulate_history(const TransportContext& context,
                                std::uint64_t history_index, HistoryTally& tally,
                                const FlightObserver* observer = nullptr);

/// Histories 1..N merged into one TallySet. Histories are grouped into
/// fixed-size chunks whose partial sums are merged in chunk order, so the
/// result is bit-identical for any worker count.
TallySet run_histories(const SlabProblem& problem, const Mesh1D& mesh,
                       const RunConfig& config);

/// Histories per chunk in run_histories.
inline constexpr std::uint64_t kHistoryChunk = 4096;

}  // namespace hybridmc

#endif  // HYBRIDMC_MC_ENGINE_HPP
