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

#include "hybridmc/mc_engine.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include "hybridmc/errors.hpp"
#include "hybridmc/parallel.hpp"

namespace hybridmc {

double source_position(const SlabProblem& problem, double xi) {
  const double total = problem.total_source();
  if (!(total > 0.0)) throw ConfigError("source is zero everywhere");
  const double target = xi * total;
  double cumulative = 0.0;
  const auto regions = problem.regions();
  std::size_t last_source = 0;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& reg = regions[r];
    if (reg.q <= 0.0) continue;
    last_source = r;
    const double mass = reg.q * (reg.x_right - reg.x_left);
    if (target < cumulative + mass) {
      const double x = reg.x_left + (target - cumulative) / reg.q;
      return std::clamp(x, reg.x_left, reg.x_right);
    }
    cumulative += mass;
  }
  // xi rounding up to the full mass lands at the right end of the last
  // source region.
  return regions[last_source].x_right;
}

ParticleState fly_and_tally(ParticleState p, double optical_depth,
                            const Mesh1D& mesh, std::span<const double> sigma_t,
                            HistoryTally& tally, double face_mu_floor) {
  if (!p.alive) throw InvariantError("fly_and_tally called on a dead particle");
  if (!(optical_depth > 0.0))
    throw InvariantError("flight needs a positive optical depth");
  const std::size_t last_face = mesh.cells();
  double remaining = optical_depth;
  for (;;) {
    const std::size_t i = p.cell;
    const double st = sigma_t[i];
    const std::size_t face = p.mu > 0.0 ? i + 1 : i;
    const double to_face = (mesh.edge(face) - p.x) / p.mu;
    if (to_face < 0.0) {
      std::ostringstream msg;
      msg << "negative distance to face " << face << " from x = " << p.x
          << " in cell " << i;
      throw InvariantError(msg.str());
    }
    if (remaining < st * to_face) {
      const double length = remaining / st;
      if (!(length > 0.0))
        throw InvariantError("nonpositive collision segment length");
      tally.score_track(i, p.w, p.mu, length);
      p.x = std::clamp(p.x + length * p.mu, mesh.edge(i), mesh.edge(i + 1));
      return p;
    }
    if (to_face > 0.0) tally.score_track(i, p.w, p.mu, to_face);
    remaining -= st * to_face;
    p.x = mesh.edge(face);
    tally.score_crossing(face, p.w, p.mu, face_mu_floor);
    if (face == 0 || face == last_face) {
      p.alive = false;
      return p;
    }
    p.cell = p.mu > 0.0 ? i + 1 : i - 1;
    // Remaining depth can round to zero exactly at a face.
    if (!(remaining > 0.0)) remaining = 0x1.0p-60;
  }
}

TransportContext::TransportContext(const SlabProblem& problem,
                                   const Mesh1D& mesh, const RunConfig& config)
    : problem_(problem),
      mesh_(mesh),
      config_(config),
      materials_(cell_materials(problem, mesh)),
      collision_{config.capture_mode, config.weight_cutoff,
                 config.roulette_survival} {
  config_.validate();
  if (!(problem_.total_source() > 0.0))
    throw ConfigError("source is zero everywhere");
}

HistoryOutcome simulate_history(const TransportContext& context,
                                std::uint64_t history_index, HistoryTally& tally,
                                const FlightObserver* observer) {
  const auto& config = context.config();
  const auto& mats = context.materials();
  RandomStream stream(config.rng_seed, history_index);
  ParticleState p = sample_source_particle(context.problem(), context.mesh(), stream);
  HistoryOutcome outcome;
  while (p.alive) {
    if (outcome.events >= config.max_events) {
      outcome.anomalous = true;
      break;
    }
    ++outcome.events;
    const double depth = -std::log(stream.uniform());
    const ParticleState before = p;
    p = fly_and_tally(p, depth, context.mesh(), mats.sigma_t, tally,
                      config.face_mu_floor);
    if (observer) (*observer)(before, p);
    if (p.alive)
      p = collide(p, mats.sigma_t[p.cell], mats.sigma_s[p.cell],
                  context.collision(), stream);
  }
  return outcome;
}

TallySet run_histories(const SlabProblem& problem, const Mesh1D& mesh,
                       const RunConfig& config) {
  const TransportContext context(problem, mesh, config);
  const std::uint64_t n = config.histories;
  const std::size_t chunks =
      static_cast<std::size_t>((n + kHistoryChunk - 1) / kHistoryChunk);
  const double total_source = problem.total_source();
  std::vector<TallySet> partial(chunks);
  parallel_for(chunks, config.workers, [&](std::size_t k) {
    TallySet part(mesh.cells(), total_source);
    HistoryTally scratch(mesh.cells());
    const std::uint64_t first = static_cast<std::uint64_t>(k) * kHistoryChunk + 1;
    const std::uint64_t last = std::min<std::uint64_t>(first + kHistoryChunk - 1, n);
    for (std::uint64_t h = first; h <= last; ++h) {
      const auto outcome = simulate_history(context, h, scratch);
      part.add_history(scratch);
      if (outcome.anomalous) ++part.anomalous_histories;
    }
    partial[k] = std::move(part);
  });
  TallySet total(mesh.cells(), total_source);
  for (const auto& part : partial) total.merge(part);
  return total;
}

}  // namespace hybridmc
