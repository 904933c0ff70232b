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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hybridmc/closures.hpp"
#include "hybridmc/errors.hpp"
#include "hybridmc/mc_engine.hpp"

using namespace hybridmc;

namespace {

// The three hand-worked tracks, each its own history, in a 1-cell set.
TallySet three_tracks() {
  TallySet t(1, 1.0);
  HistoryTally h(1);
  h.score_track(0, 1.0, 0.8, 0.2);
  t.add_history(h);
  h.score_track(0, 0.5, 0.5, 0.4);
  t.add_history(h);
  h.score_track(0, 2.0, -0.1, 0.1);
  t.add_history(h);
  return t;
}

}  // namespace

TEST_SUITE("closures") {
  TEST_CASE("Eddington factor") {
    const auto t = three_tracks();
    // sum wl = 0.2 + 0.2 + 0.2, sum mu^2 wl = 0.128 + 0.05 + 0.002
    CHECK(estimate_eddington(t, 0) == doctest::Approx(0.3).epsilon(1e-14));

    TallySet one(1, 1.0);
    HistoryTally h(1);
    h.score_track(0, 1.0, 1.0, 0.5);
    one.add_history(h);
    CHECK(estimate_eddington(one, 0) == 1.0);

    const TallySet empty(1, 1.0);
    CHECK(estimate_eddington(empty, 0) == kOneThird);
  }

  TEST_CASE("second-moment factor") {
    const auto t = three_tracks();
    CHECK(estimate_sm_factor(t, 0, 3, 0.5) == doctest::Approx(0.02 / 1.5).epsilon(1e-13));

    TallySet iso(1, 1.0);
    HistoryTally h(1);
    h.score_track(0, 1.0, std::sqrt(kOneThird), 0.7);
    iso.add_history(h);
    CHECK(std::abs(estimate_sm_factor(iso, 0, 1, 1.0)) < 1e-16);
    CHECK(estimate_sm_factor(TallySet(1, 1.0), 0, 3, 0.5) == 0.0);
  }

  TEST_CASE("scalar flux") {
    CHECK(estimate_scalar_flux(three_tracks(), 0, 3, 0.5) == doctest::Approx(0.4));
    CHECK(estimate_scalar_flux(TallySet(1, 1.0), 0, 3, 0.5) == 0.0);

    const auto mesh = build_uniform_mesh(benchmark_problem(), 1);
    HistoryTally h(1);
    fly_and_tally({0.0, 1.0, 1.0, true, 0}, 10.0, mesh, std::vector<double>{1.0}, h, 1e-3);
    TallySet t(1, 1.0);
    t.add_history(h);
    CHECK(estimate_scalar_flux(t, 0, 1, 1.0) == 1.0);
  }

  TEST_CASE("boundary factors") {
    TallySet t(2, 1.0);
    HistoryTally h(2);
    h.score_crossing(0, 1.0, -0.5, 1e-3);
    t.add_history(h);
    const auto left = estimate_boundary_factors(t, Side::left, 1);
    CHECK(left.current_ratio == doctest::Approx(0.5));
    CHECK(left.eddington == doctest::Approx(0.25));
    CHECK(left.phi == doctest::Approx(2.0));
    CHECK(left.sm_factor == doctest::Approx((kOneThird - 0.25) * 2.0));
    CHECK_FALSE(left.fallback);

    const auto right = estimate_boundary_factors(t, Side::right, 1);
    CHECK(right.fallback);
    CHECK(right.current_ratio == 0.5);
    CHECK(right.eddington == kOneThird);
    CHECK(right.sm_factor == 0.0);
    CHECK(right.phi == 0.0);
  }

  TEST_CASE("closure set records fallbacks and provenance") {
    const SlabProblem p({{0.0, 1.0, 1.0, 0.5, 1.0}});
    const auto mesh = build_uniform_mesh(p, 4);
    TallySet t(4, 1.0);
    HistoryTally h(4);
    h.score_track(1, 1.0, 0.5, 0.1);
    t.add_history(h);
    h.score_track(1, 1.0, 0.9, 0.2);
    t.add_history(h);
    const auto c = compute_closures(t, mesh, 77);
    CHECK(c.seed == 77);
    CHECK(c.histories == 2);
    CHECK(c.fallback_cells == std::vector<std::size_t>{0, 2, 3});
    CHECK(c.is_fallback(0));
    CHECK_FALSE(c.is_fallback(1));
    CHECK(c.eddington[0] == kOneThird);
    CHECK(c.sm_factor[0] == 0.0);
    CHECK(std::isnan(c.eddington_rel_stderr[0]));
    CHECK(std::isfinite(c.eddington_rel_stderr[1]));
    CHECK(c.left.fallback);

    CHECK_THROWS_AS(compute_closures(TallySet(4, 1.0), mesh), DomainError);
    CHECK_THROWS_AS(compute_closures(TallySet(3, 1.0), mesh), InvariantError);
  }

  TEST_CASE("closure identity F = (1/3 - E) phi") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 16);
    RunConfig cfg;
    cfg.histories = 5000;
    cfg.workers = 1;
    const auto c = compute_closures(run_histories(p, mesh, cfg), mesh, cfg.rng_seed);
    for (std::size_t i = 0; i < 16; ++i) {
      const double lhs = c.sm_factor[i];
      const double rhs = (kOneThird - c.eddington[i]) * c.phi_mc[i];
      CHECK(std::abs(lhs - rhs) <= 1e-12 * c.phi_mc[i]);
      CHECK(c.eddington[i] > 0.0);
      CHECK(c.eddington[i] <= 1.0);
    }
  }

  TEST_CASE("Eddington standard error matches replicate scatter") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 4);
    std::vector<double> e;
    double reported = 0.0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      RunConfig cfg;
      cfg.histories = 2000;
      cfg.rng_seed = seed;
      cfg.workers = 1;
      const auto c = compute_closures(run_histories(p, mesh, cfg), mesh, seed);
      e.push_back(c.eddington[1]);
      reported += c.eddington_rel_stderr[1] * c.eddington[1] / 40.0;
    }
    double mean = 0.0;
    for (const double v : e) mean += v / 40.0;
    double var = 0.0;
    for (const double v : e) var += (v - mean) * (v - mean) / 39.0;
    CHECK(std::sqrt(var) == doctest::Approx(reported).epsilon(0.35));
  }

  TEST_CASE("diffusion closures") {
    const auto c = diffusion_closures(3);
    CHECK(c.cells() == 3);
    CHECK(c.eddington[2] == kOneThird);
    CHECK(c.sm_factor[2] == 0.0);
    CHECK(c.left.current_ratio == 0.5);
    CHECK(c.right.eddington == kOneThird);
  }

  TEST_CASE("closure dump layout") {
    std::ostringstream out;
    write_closure_csv(out, diffusion_closures(2));
    const std::string text = out.str();
    CHECK(text.find("section,index,E,F,phi_mc,stderr_E,fallback\n") == 0);
    CHECK(text.find("boundary,left,0.5,") != std::string::npos);
    CHECK(text.find("boundary,right,") != std::string::npos);
  }
}
