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

#include "hybridmc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hybridmc/errors.hpp"
#include "hybridmc/mc_engine.hpp"
#include "hybridmc/output.hpp"
#include "hybridmc/parallel.hpp"

namespace hybridmc {
namespace {

constexpr Estimator kEstimators[] = {Estimator::mc, Estimator::hqd, Estimator::hsm};
constexpr Norm kNorms[] = {Norm::l2, Norm::linf};
constexpr Method kMethods[] = {Method::hqd, Method::hsm};

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> series(std::span<const ReplicateResult> results, Estimator e, Norm norm) {
  std::vector<double> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.errors(e).get(norm));
  return out;
}

}  // namespace

double relative_l2_error(std::span<const double> phi, std::span<const double> phi_ex,
                         const Mesh1D& mesh) {
  if (phi.size() != phi_ex.size() || phi.size() != mesh.cells())
    throw DomainError("error norm needs equal-length sequences on the mesh");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double d = phi[i] - phi_ex[i];
    num += d * d * mesh.width(i);
    den += phi_ex[i] * phi_ex[i] * mesh.width(i);
  }
  if (!(den > 0.0)) throw DomainError("reference flux is identically zero");
  return std::sqrt(num / den);
}

double linf_error(std::span<const double> phi, std::span<const double> phi_ex) {
  if (phi.size() != phi_ex.size())
    throw DomainError("error norm needs equal-length sequences");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    num = std::max(num, std::abs(phi[i] - phi_ex[i]));
    den = std::max(den, std::abs(phi_ex[i]));
  }
  if (!(den > 0.0)) throw DomainError("reference flux is identically zero");
  return num / den;
}

std::string_view to_string(Estimator estimator) noexcept {
  switch (estimator) {
    case Estimator::mc: return "MC";
    case Estimator::hqd: return "HQD";
    case Estimator::hsm: return "HSM";
  }
  return "?";
}

std::string_view to_string(Norm norm) noexcept { return norm == Norm::l2 ? "L2" : "Linf"; }

Estimator estimator_of(Method method) noexcept {
  return method == Method::hqd ? Estimator::hqd : Estimator::hsm;
}

const ErrorNorms& ReplicateResult::errors(Estimator e) const noexcept {
  switch (e) {
    case Estimator::hqd: return hqd;
    case Estimator::hsm: return hsm;
    case Estimator::mc: break;
  }
  return mc;
}

ReplicateResult run_paired_replicate(const SlabProblem& problem, const Mesh1D& mesh,
                                     const BenchmarkSolution& reference,
                                     const RunConfig& config,
                                     const ReplicateOptions& options) {
  if (reference.mesh.cells() != mesh.cells())
    throw ConfigError("reference solution is for a different mesh");
  const auto start = std::chrono::steady_clock::now();
  const TallySet tallies = run_histories(problem, mesh, config);
  ClosureSet closures = compute_closures(tallies, mesh, config.rng_seed);
  if (options.diffusion_closures) {
    ClosureSet diffusion = diffusion_closures(mesh.cells());
    diffusion.phi_mc = closures.phi_mc;
    diffusion.seed = closures.seed;
    diffusion.histories = closures.histories;
    closures = std::move(diffusion);
  }
  const auto hqd = solve_hybrid(problem, mesh, closures, Method::hqd);
  const auto hsm = solve_hybrid(problem, mesh, closures, Method::hsm);
  if (hqd.seed != config.rng_seed || hsm.seed != config.rng_seed ||
      hqd.histories != tallies.histories_completed ||
      hsm.histories != tallies.histories_completed)
    throw InvariantError("hybrid solutions do not share the MC tally provenance");

  ReplicateResult r;
  r.seed = config.rng_seed;
  r.histories = config.histories;
  r.cells = mesh.cells();
  r.capture_mode = config.capture_mode;
  r.mc = {relative_l2_error(closures.phi_mc, reference.phi, mesh),
          linf_error(closures.phi_mc, reference.phi)};
  r.hqd = {relative_l2_error(hqd.phi, reference.phi, mesh), linf_error(hqd.phi, reference.phi)};
  r.hsm = {relative_l2_error(hsm.phi, reference.phi, mesh), linf_error(hsm.phi, reference.phi)};
  r.fallback_cells = closures.fallback_cells.size();
  r.anomalous_histories = tallies.anomalous_histories;
  r.closure_seed = hqd.seed;
  r.closure_histories = hqd.histories;
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

double win_ratio(std::span<const double> candidate, std::span<const double> baseline) {
  if (candidate.empty() || candidate.size() != baseline.size())
    throw DomainError("win ratio needs nonempty paired series");
  std::size_t wins = 0;
  for (std::size_t k = 0; k < candidate.size(); ++k)
    if (candidate[k] < baseline[k]) ++wins;
  return static_cast<double>(wins) / static_cast<double>(candidate.size());
}

double win_ratio(std::span<const ReplicateResult> results, Method method, Norm norm) {
  const auto hybrid = series(results, estimator_of(method), norm);
  const auto mc = series(results, Estimator::mc, norm);
  return win_ratio(hybrid, mc);
}

std::size_t StudyConfig::replicates_for(std::uint64_t n) const {
  const auto it = replicates_by_histories.find(n);
  return it == replicates_by_histories.end() ? replicates : it->second;
}

std::vector<ReplicateResult> StudyReport::select(CaptureMode mode, std::uint64_t histories,
                                                 std::size_t cells) const {
  std::vector<ReplicateResult> out;
  for (const auto& r : results)
    if (r.capture_mode == mode && r.histories == histories && r.cells == cells)
      out.push_back(r);
  return out;
}

StudyReport grid_refinement_study(const SlabProblem& problem, const StudyConfig& config,
                                  const std::map<std::size_t, BenchmarkSolution>& references,
                                  const RunConfig& base, std::size_t workers) {
  if (config.cells.empty() || config.histories.empty() || config.capture_modes.empty())
    throw ConfigError("study needs at least one cell count, history count and capture mode");
  struct Task {
    CaptureMode mode;
    std::uint64_t histories;
    std::size_t cells;
    std::size_t replicate;
  };
  std::vector<Task> tasks;
  for (const auto mode : config.capture_modes)
    for (const auto n : config.histories)
      for (const auto cells : config.cells) {
        if (!references.contains(cells))
          throw ConfigError("no reference solution for " + std::to_string(cells) + " cells");
        const std::size_t reps = config.replicates_for(n);
        if (reps < 1) throw ConfigError("replicates must be >= 1");
        for (std::size_t r = 0; r < reps; ++r) tasks.push_back({mode, n, cells, r});
      }

  std::map<std::size_t, Mesh1D> meshes;
  for (const auto cells : config.cells) meshes.emplace(cells, build_uniform_mesh(problem, cells));

  StudyReport report;
  report.config = config;
  report.length = problem.length();
  report.results.resize(tasks.size());
  parallel_for(tasks.size(), workers, [&](std::size_t k) {
    const Task& t = tasks[k];
    RunConfig run = base;
    run.histories = t.histories;
    run.capture_mode = t.mode;
    run.rng_seed = config.master_seed + t.replicate;
    run.workers = 1;
    report.results[k] = run_paired_replicate(problem, meshes.at(t.cells),
                                             references.at(t.cells), run);
  });

  for (const auto mode : config.capture_modes) {
    for (const auto n : config.histories) {
      for (const auto cells : config.cells) {
        const auto group = report.select(mode, n, cells);
        const double dx = problem.length() / static_cast<double>(cells);
        for (const auto method : kMethods)
          for (const auto norm : kNorms)
            report.win_ratios.push_back(
                {cells, dx, n, mode, method, norm, win_ratio(group, method, norm)});
        for (const auto e : kEstimators)
          for (const auto norm : kNorms) {
            const auto s = series(group, e, norm);
            report.summaries.push_back(
                {cells, dx, n, mode, e, norm, mean_of(s), median_of(s), stddev_of(s), s.size()});
          }
      }
      std::vector<std::size_t> sorted_cells = config.cells;
      std::sort(sorted_cells.begin(), sorted_cells.end());
      for (std::size_t k = 1; k < sorted_cells.size(); ++k) {
        for (const auto e : kEstimators)
          for (const auto norm : kNorms) {
            auto mean_at = [&](std::size_t cells) {
              for (const auto& s : report.summaries)
                if (s.capture_mode == mode && s.histories == n && s.cells == cells &&
                    s.estimator == e && s.norm == norm)
                  return s.mean;
              throw InvariantError("missing summary");
            };
            const std::size_t fine = sorted_cells[k];
            report.ratios.push_back({fine, problem.length() / static_cast<double>(fine), n, mode,
                                     e, norm, mean_at(sorted_cells[k - 1]) / mean_at(fine)});
          }
      }
    }
  }
  return report;
}

void write_study_outputs(const std::filesystem::path& dir, const StudyReport& report) {
  std::ostringstream win, errors, means, ratios, sorted, timing;
  {
    CsvWriter csv(win);
    csv.row("cells", "dx", "histories", "capture_mode", "method", "norm", "ratio");
    for (const auto& w : report.win_ratios)
      csv.row(w.cells, w.dx, w.histories, to_string(w.capture_mode), to_string(w.method),
              to_string(w.norm), w.ratio);
  }
  {
    CsvWriter csv(errors);
    CsvWriter tcsv(timing);
    csv.row("capture_mode", "histories", "cells", "dx", "replicate", "seed", "mc_l2", "hqd_l2",
            "hsm_l2", "mc_linf", "hqd_linf", "hsm_linf", "fallback_cells",
            "anomalous_histories");
    tcsv.row("capture_mode", "histories", "cells", "seed", "wall_seconds");
    for (const auto& r : report.results) {
      const double dx = report.length / static_cast<double>(r.cells);
      csv.row(to_string(r.capture_mode), r.histories, r.cells, dx,
              r.seed - report.config.master_seed, r.seed, r.mc.l2, r.hqd.l2, r.hsm.l2,
              r.mc.linf, r.hqd.linf, r.hsm.linf, r.fallback_cells, r.anomalous_histories);
      tcsv.row(to_string(r.capture_mode), r.histories, r.cells, r.seed, r.wall_seconds);
    }
  }
  {
    CsvWriter csv(means);
    csv.row("capture_mode", "histories", "cells", "dx", "estimator", "norm", "mean", "median",
            "stddev", "replicates");
    for (const auto& s : report.summaries)
      csv.row(to_string(s.capture_mode), s.histories, s.cells, s.dx, to_string(s.estimator),
              to_string(s.norm), s.mean, s.median, s.stddev, s.replicates);
  }
  {
    CsvWriter csv(ratios);
    csv.row("capture_mode", "histories", "cells", "dx", "estimator", "norm", "ratio");
    for (const auto& r : report.ratios)
      csv.row(to_string(r.capture_mode), r.histories, r.cells, r.dx, to_string(r.estimator),
              to_string(r.norm), r.ratio);
  }
  {
    CsvWriter csv(sorted);
    csv.row("capture_mode", "histories", "cells", "dx", "estimator", "index", "unsorted_l2",
            "sorted_l2");
    for (const auto mode : report.config.capture_modes)
      for (const auto n : report.config.histories)
        for (const auto cells : report.config.cells) {
          const auto group = report.select(mode, n, cells);
          for (const auto e : kEstimators) {
            const auto unsorted = series(group, e, Norm::l2);
            auto ordered = unsorted;
            std::sort(ordered.begin(), ordered.end());
            for (std::size_t k = 0; k < unsorted.size(); ++k)
              csv.row(to_string(mode), n, cells, report.length / static_cast<double>(cells), to_string(e),
                      k, unsorted[k], ordered[k]);
          }
        }
  }
  write_text_file(dir / "win_ratio.csv", win.str());
  write_text_file(dir / "errors.csv", errors.str());
  write_text_file(dir / "error_means.csv", means.str());
  write_text_file(dir / "error_ratios.csv", ratios.str());
  write_text_file(dir / "sorted_errors.csv", sorted.str());
  write_text_file(dir / "timing.csv", timing.str());
}

std::string_view linf_norm_note() noexcept {
  return "Linf error is the relative sup norm max_i|phi_i - phi_ex_i| / max_i|phi_ex_i|";
}

std::string_view aggregation_note() noexcept {
  return "error_means.csv reports mean, median and sample standard deviation over replicates";
}

}  // namespace hybridmc
