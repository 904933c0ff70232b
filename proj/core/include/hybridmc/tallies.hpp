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

#ifndef HYBRIDMC_TALLIES_HPP
#define HYBRIDMC_TALLIES_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hybridmc {

/// Scores of a single history, folded into a TallySet when it ends.
/// Only touched cells are reset between histories.
class HistoryTally {
 public:
  explicit HistoryTally(std::size_t cells);

  std::size_t cells() const noexcept { return wl_.size(); }

  /// Track of length `length` in cell i with weight w and direction mu.
  void score_track(std::size_t cell, double w, double mu, double length) {
    if (!touched_flag_[cell]) {
      touched_flag_[cell] = 1;
      touched_.push_back(cell);
    }
    const double wl = w * length;
    wl_[cell] += wl;
    mu2_wl_[cell] += mu * mu * wl;
  }

  /// Crossing of face f with weight w and direction mu; |mu| is floored at
  /// `mu_floor` in the w/|mu| score only.
  void score_crossing(std::size_t face, double w, double mu, double mu_floor);

  double cell_wl(std::size_t i) const { return wl_[i]; }
  double cell_mu2_wl(std::size_t i) const { return mu2_wl_[i]; }

 private:
  friend class TallySet;

  struct Crossing {
    std::size_t face;
    double w_over_mu;
    double w_signed;
    double mu_w;
  };

  std::vector<double> wl_;
  std::vector<double> mu2_wl_;
  std::vector<unsigned char> touched_flag_;
  std::vector<std::size_t> touched_;
  std::vector<Crossing> crossings_;
};

/// Accumulated Monte Carlo sums over whole histories. Cell sums are
/// track-length moments; face sums are surface-crossing moments on all
/// I + 1 mesh faces.
struct TallySet {
  TallySet() = default;
  TallySet(std::size_t cells, double total_source);

  std::size_t cells() const noexcept { return sum_wl.size(); }
  std::size_t faces() const noexcept { return sum_w_over_mu.size(); }

  /// Folds a finished history into the sums and resets `history`.
  void add_history(HistoryTally& history);

  /// Elementwise sum. Merge order fixes the floating-point result, so callers
  /// merge partitions in a fixed order.
  void merge(const TallySet& other);

  // Per cell.
  std::vector<double> sum_wl;
  std::vector<double> sum_mu2_wl;
  std::vector<double> sum_wl_sq;        // sum over histories of (sum w l)^2
  std::vector<double> sum_mu2_wl_sq;    // sum over histories of (sum mu^2 w l)^2
  std::vector<double> sum_wl_mu2_wl;    // per-history cross products

  // Per face.
  std::vector<double> sum_w_over_mu;
  std::vector<double> sum_w_signed;
  std::vector<double> sum_mu_w;

  std::uint64_t histories_completed = 0;
  std::uint64_t anomalous_histories = 0;
  double total_source = 0.0;
};

/// Raw-tally diagnostic dump: a cell section and a face section.
void write_tally_csv(std::ostream& out, const TallySet& tallies);

}  // namespace hybridmc

#endif  // HYBRIDMC_TALLIES_HPP
