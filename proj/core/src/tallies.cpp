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

#include "hybridmc/tallies.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hybridmc/errors.hpp"
#include "hybridmc/output.hpp"

namespace hybridmc {

HistoryTally::HistoryTally(std::size_t cells)
    : wl_(cells, 0.0), mu2_wl_(cells, 0.0), touched_flag_(cells, 0) {
  touched_.reserve(cells);
}

void HistoryTally::score_crossing(std::size_t face, double w, double mu,
                                  double mu_floor) {
  const double abs_mu = std::abs(mu);
  crossings_.push_back(Crossing{face, w / std::max(abs_mu, mu_floor),
                                mu > 0.0 ? w : -w, abs_mu * w});
}

TallySet::TallySet(std::size_t cells, double total_source_)
    : sum_wl(cells, 0.0),
      sum_mu2_wl(cells, 0.0),
      sum_wl_sq(cells, 0.0),
      sum_mu2_wl_sq(cells, 0.0),
      sum_wl_mu2_wl(cells, 0.0),
      sum_w_over_mu(cells + 1, 0.0),
      sum_w_signed(cells + 1, 0.0),
      sum_mu_w(cells + 1, 0.0),
      total_source(total_source_) {}

void TallySet::add_history(HistoryTally& history) {
  if (history.cells() != cells())
    throw InvariantError("history tally size does not match tally set");
  for (const std::size_t i : history.touched_) {
    const double a = history.wl_[i];
    const double b = history.mu2_wl_[i];
    sum_wl[i] += a;
    sum_mu2_wl[i] += b;
    sum_wl_sq[i] += a * a;
    sum_mu2_wl_sq[i] += b * b;
    sum_wl_mu2_wl[i] += a * b;
    history.wl_[i] = 0.0;
    history.mu2_wl_[i] = 0.0;
    history.touched_flag_[i] = 0;
  }
  history.touched_.clear();
  for (const auto& c : history.crossings_) {
    sum_w_over_mu[c.face] += c.w_over_mu;
    sum_w_signed[c.face] += c.w_signed;
    sum_mu_w[c.face] += c.mu_w;
  }
  history.crossings_.clear();
  ++histories_completed;
}

void TallySet::merge(const TallySet& other) {
  if (other.cells() != cells())
    throw InvariantError("cannot merge tally sets of different sizes");
  auto add = [](std::vector<double>& dst, const std::vector<double>& src) {
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  };
  add(sum_wl, other.sum_wl);
  add(sum_mu2_wl, other.sum_mu2_wl);
  add(sum_wl_sq, other.sum_wl_sq);
  add(sum_mu2_wl_sq, other.sum_mu2_wl_sq);
  add(sum_wl_mu2_wl, other.sum_wl_mu2_wl);
  add(sum_w_over_mu, other.sum_w_over_mu);
  add(sum_w_signed, other.sum_w_signed);
  add(sum_mu_w, other.sum_mu_w);
  histories_completed += other.histories_completed;
  anomalous_histories += other.anomalous_histories;
}

void write_tally_csv(std::ostream& out, const TallySet& t) {
  CsvWriter csv(out);
  csv.row("section", "index", "sum_wl", "sum_mu2_wl", "sum_wl_sq",
          "sum_mu2_wl_sq", "sum_wl_mu2_wl");
  for (std::size_t i = 0; i < t.cells(); ++i)
    csv.row("cell", i, t.sum_wl[i], t.sum_mu2_wl[i], t.sum_wl_sq[i],
            t.sum_mu2_wl_sq[i], t.sum_wl_mu2_wl[i]);
  csv.row("section", "index", "sum_w_over_mu", "sum_w_signed", "sum_mu_w", "",
          "");
  for (std::size_t f = 0; f < t.faces(); ++f)
    csv.row("face", f, t.sum_w_over_mu[f], t.sum_w_signed[f], t.sum_mu_w[f],
            "", "");
}

}  // namespace hybridmc
