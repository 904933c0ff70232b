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

#ifndef HYBRIDMC_EXPERIMENTS_HPP
#define HYBRIDMC_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridmc/closures.hpp"
#include "hybridmc/lo_solvers.hpp"
#include "hybridmc/problem.hpp"
#include "hybridmc/sn_reference.hpp"

namespace hybridmc {

/// sqrt(sum (phi - phi_ex)^2 dx / sum phi_ex^2 dx).
double relative_l2_error(std::span<const double> phi, std::span<const double> phi_ex,
                         const Mesh1D& mesh);

/// max |phi - phi_ex| / max |phi_ex|.
double linf_error(std::span<const double> phi, std::span<const double> phi_ex);

enum class Estimator { mc, hqd, hsm };
enum class Norm { l2, linf };

std::string_view to_string(Estimator estimator) noexcept;
std::string_view to_string(Norm norm) noexcept;
Estimator estimator_of(Method method) noexcept;

struct ErrorNorms {
  double l2 = 0.0;
  double linf = 0.0;

  double get(Norm norm) const noexcept { return norm == Norm::l2 ? l2 : linf; }
};

struct ReplicateResult {
  std::uint64_t seed = 0;
  std::uint64_t histories = 0;
  std::size_t cells = 0;
  CaptureMode capture_mode = CaptureMode::analog;
  ErrorNorms mc;
  ErrorNorms hqd;
  ErrorNorms hsm;
  std::size_t fallback_cells = 0;
  std::uint64_t anomalous_histories = 0;
  double wall_seconds = 0.0;
  // Provenance of the closures both hybrid solves consumed.
  std::uint64_t closure_seed = 0;
  std::uint64_t closure_histories = 0;

  const ErrorNorms& errors(Estimator e) const noexcept;
};

struct ReplicateOptions {
  /// Replace the Monte Carlo closures by E = 1/3, F = 0 (diffusion limit).
  bool diffusion_closures = false;
};

/// One history ensemble for (config.rng_seed, config.histories); the MC flux
/// and both hybrid fluxes derive from that single TallySet.
ReplicateResult run_paired_replicate(const SlabProblem& problem, const Mesh1D& mesh,
                                     const BenchmarkSolution& reference,
                                     const RunConfig& config,
                                     const ReplicateOptions& options = {});

/// Fraction of replicates whose hybrid error is strictly below the paired MC
/// error (ties count for MC).
double win_ratio(std::span<const ReplicateResult> results, Method method, Norm norm);

/// Same rule with explicit error series.
double win_ratio(std::span<const double> candidate, std::span<const double> baseline);

struct StudyConfig {
  std::vector<std::size_t> cells{4, 8, 16, 32, 64};
  std::vector<std::uint64_t> histories{100, 1000, 10000, 100000, 1000000};
  std::size_t replicates = 100;
  /// Per-N replicate count overriding `replicates` (e.g. fewer at N = 10^6).
  std::map<std::uint64_t, std::size_t> replicates_by_histories;
  std::vector<CaptureMode> capture_modes{CaptureMode::analog};
  std::uint64_t master_seed = 1;

  std::size_t replicates_for(std::uint64_t n) const;
};

struct WinRatioEntry {
  std::size_t cells;
  double dx;
  std::uint64_t histories;
  CaptureMode capture_mode;
  Method method;
  Norm norm;
  double ratio;
};

struct ErrorSummary {
  std::size_t cells;
  double dx;
  std::uint64_t histories;
  CaptureMode capture_mode;
  Estimator estimator;
  Norm norm;
  double mean;
  double median;
  double stddev;
  std::size_t replicates;
};

/// RE(2 dx) / RE(dx) of the mean errors on neighbouring grids.
struct ErrorRatioEntry {
  std::size_t cells;  // the finer grid
  double dx;
  std::uint64_t histories;
  CaptureMode capture_mode;
  Estimator estimator;
  Norm norm;
  double ratio;
};

struct StudyReport {
  StudyConfig config;
  double length = 1.0;  // slab length, for dx columns
  std::vector<ReplicateResult> results;  // ordered by (mode, N, I, replicate)
  std::vector<WinRatioEntry> win_ratios;
  std::vector<ErrorSummary> summaries;
  std::vector<ErrorRatioEntry> ratios;

  /// Results of one configuration, in replicate order.
  std::vector<ReplicateResult> select(CaptureMode mode, std::uint64_t histories,
                                      std::size_t cells) const;
};

/// Runs every (capture mode, N, I, replicate) configuration. Replicate r uses
/// seed master_seed + r. `references` must hold a reference for each I.
/// Results do not depend on `workers`.
StudyReport grid_refinement_study(const SlabProblem& problem, const StudyConfig& config,
                                  const std::map<std::size_t, BenchmarkSolution>& references,
                                  const RunConfig& base, std::size_t workers = 0);

/// Writes win_ratio.csv, errors.csv, error_means.csv, error_ratios.csv and
/// sorted_errors.csv into `dir`; wall-clock timings go to timing.csv.
void write_study_outputs(const std::filesystem::path& dir, const StudyReport& report);

/// Notes recorded in every study manifest about norm and aggregation choices.
std::string_view linf_norm_note() noexcept;
std::string_view aggregation_note() noexcept;

}  // namespace hybridmc

#endif  // HYBRIDMC_EXPERIMENTS_HPP
