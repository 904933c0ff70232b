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

#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "hybridmc/closures.hpp"
#include "hybridmc/errors.hpp"
#include "hybridmc/mc_engine.hpp"
#include "hybridmc/sn_reference.hpp"

using namespace hybridmc;

namespace {

double en(int n, double x) {
  if (x == 0.0) return 1.0 / (n - 1);
  return boost::math::expint(n, x);
}

// Cell average of the uncollided flux of a uniform isotropic source q in a
// pure absorber [0, L]: phi(x) = q/(2 s) (2 - E2(s x) - E2(s (L - x))).
double absorber_cell_average(double s, double q, double length, double a, double b) {
  const double left = (en(3, s * a) - en(3, s * b)) / s;
  const double right = (en(3, s * (length - b)) - en(3, s * (length - a))) / s;
  return q / (2.0 * s) * (2.0 * (b - a) - left - right) / (b - a);
}

std::vector<LadderLevel> small_ladder() { return {{128, 128}, {256, 256}, {512, 512}}; }

}  // namespace

TEST_SUITE("sn_reference") {
  TEST_CASE("Gauss-Legendre sets") {
    const auto q2 = gauss_legendre(2);
    CHECK(q2.nodes[0] == doctest::Approx(-0.5773502692));
    CHECK(q2.nodes[1] == doctest::Approx(0.5773502692));
    CHECK(q2.weights[0] == doctest::Approx(1.0));
    CHECK(q2.weights[1] == doctest::Approx(1.0));
    double w = 0.0;
    for (const double x : gauss_legendre(4).weights) w += x;
    CHECK(w == doctest::Approx(2.0).epsilon(1e-15));
    for (const std::size_t n : {2u, 8u, 64u, 512u, 2048u}) {
      const auto q = gauss_legendre(n);
      double m2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) m2 += q.weights[k] * q.nodes[k] * q.nodes[k];
      CHECK(std::abs(m2 - 2.0 / 3.0) < 1e-13);
      for (std::size_t k = 1; k < n; ++k) CHECK(q.nodes[k] > q.nodes[k - 1]);
    }
    CHECK_THROWS_AS(gauss_legendre(3), ConfigError);
    CHECK_THROWS_AS(gauss_legendre(0), ConfigError);
  }

  TEST_CASE("single-cell diamond difference") {
    const SlabProblem p({{0.0, 1.0, 1.0, 0.0, 1.0}});
    const auto mesh = build_uniform_mesh(p, 1);
    const AngularQuadrature quad{{-1.0, 1.0}, {1.0, 1.0}};
    const std::vector<double> source{0.5};
    const auto flux = sweep(p, mesh, quad, source);
    CHECK(flux.at_edge(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(flux.at(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(flux.at_edge(0, 1) == 0.0);
    CHECK(flux.at_edge(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("zero source gives zero flux") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 8);
    const auto flux = sweep(p, mesh, gauss_legendre(8), std::vector<double>(8, 0.0));
    for (const double v : flux.cell_average) CHECK(v == 0.0);
    for (const double v : flux.edge) CHECK(v == 0.0);
  }

  TEST_CASE("reflection symmetry") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 32);
    const auto quad = gauss_legendre(16);
    const auto flux = sweep(p, mesh, quad, std::vector<double>(32, 0.5));
    for (std::size_t i = 0; i < 32; ++i)
      for (std::size_t k = 0; k < 16; ++k)
        CHECK(std::abs(flux.at(i, k) - flux.at(31 - i, 15 - k)) < 1e-13);
    const auto sol = source_iteration(p, mesh, quad);
    for (std::size_t i = 0; i < 32; ++i)
      CHECK(std::abs(sol.moments.phi[i] - sol.moments.phi[31 - i]) < 1e-13);
    CHECK(sol.moments.face_current[0] == doctest::Approx(-sol.moments.face_current[1]));
  }

  TEST_CASE("no scattering converges in one iteration") {
    const SlabProblem p({{0.0, 1.0, 1.0, 0.0, 1.0}});
    const auto sol = source_iteration(p, build_uniform_mesh(p, 16), gauss_legendre(8));
    CHECK(sol.iterations == 1);
  }

  TEST_CASE("pure absorber matches the exponential-integral solution") {
    const SlabProblem p({{0.0, 1.0, 1.0, 0.0, 1.0}});
    const auto mesh = build_uniform_mesh(p, 8192);
    const auto sol = source_iteration(p, mesh, gauss_legendre(8192));
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.cells(); ++i) {
      const double exact = absorber_cell_average(1.0, 1.0, 1.0, mesh.edge(i), mesh.edge(i + 1));
      worst = std::max(worst, std::abs(sol.moments.phi[i] - exact) / exact);
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("source iteration behaviour on the benchmark") {
    const auto p = benchmark_problem();
    const auto sol = source_iteration(p, build_uniform_mesh(p, 64), gauss_legendre(32));
    CHECK(sol.iterations > 10);
    CHECK(sol.spectral_radius > 0.3);
    CHECK(sol.spectral_radius < 0.9);
    CHECK(sol.negative_edges == 0);
    SourceIterationOptions tight;
    tight.max_iterations = 3;
    CHECK_THROWS_AS(source_iteration(p, build_uniform_mesh(p, 64), gauss_legendre(32), tight),
                    NonConvergenceError);
  }

  TEST_CASE("Aitken extrapolation") {
    CHECK(aitken_limit(1.0, 1.5, 1.75) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(aitken_limit(3.25, 3.25, 3.25) == 3.25);
    CHECK(certified_digits(2.0, 2.0) == std::numeric_limits<double>::infinity());
    CHECK(certified_digits(1.0, 1.0 + 1e-7) == doctest::Approx(7.0));
  }

  TEST_CASE("restriction to a nested mesh") {
    const Mesh1D fine({0.0, 0.25, 0.5, 0.75, 1.0});
    const Mesh1D coarse({0.0, 0.5, 1.0});
    const std::vector<double> v{1.0, 3.0, 5.0, 7.0};
    const auto r = restrict_average(fine, v, coarse);
    CHECK(r[0] == 2.0);
    CHECK(r[1] == 6.0);
    CHECK_THROWS_AS(restrict_average(fine, v, Mesh1D({0.0, 0.3, 1.0})), ConfigError);
  }

  TEST_CASE("ladder validation") {
    const auto p = benchmark_problem();
    const std::vector<LadderLevel> not_doubling{{64, 16}, {96, 32}, {192, 64}};
    CHECK_THROWS_AS(solve_ladder(p, not_doubling), ConfigError);
    const std::vector<LadderLevel> flat_order{{64, 16}, {128, 16}, {256, 32}};
    CHECK_THROWS_AS(solve_ladder(p, flat_order), ConfigError);
    const std::vector<LadderLevel> short_ladder{{64, 16}, {128, 32}};
    CHECK_THROWS_AS(solve_ladder(p, short_ladder), ConfigError);
  }

  TEST_CASE("extrapolated reference and its certification") {
    const auto p = benchmark_problem();
    const auto ladder = small_ladder();
    const auto levels = solve_ladder(p, ladder);
    const auto target = build_uniform_mesh(p, 8);
    const auto ref = extrapolate_to(target, levels, 4.0);
    CHECK(ref.phi.size() == 8);
    CHECK(ref.min_certified_digits >= 4.0);
    CHECK(ref.level_phi.size() == 3);
    // The extrapolated value lies beyond the finest level, in the ladder's direction.
    for (std::size_t i = 0; i < 8; ++i) {
      const double d = ref.level_phi[2][i] - ref.level_phi[1][i];
      CHECK((ref.phi[i] - ref.level_phi[2][i]) * d >= 0.0);
    }
    CHECK_THROWS_AS(extrapolate_to(target, levels, 12.0), CertificationError);

    // Oracle closures against an independent Monte Carlo estimate.
    const auto closures = oracle_closures(ref);
    RunConfig cfg;
    cfg.histories = 1000000;
    cfg.workers = 1;
    const auto mc = compute_closures(run_histories(p, target, cfg), target);
    for (std::size_t i = 0; i < 8; ++i) {
      const double sigma = mc.eddington_rel_stderr[i] * mc.eddington[i];
      CHECK(std::abs(closures.eddington[i] - mc.eddington[i]) <= 4.0 * sigma + 1e-4);
      CHECK(closures.sm_factor[i] ==
            doctest::Approx((1.0 / 3.0 - closures.eddington[i]) * ref.phi[i]).epsilon(1e-12));
    }
    CHECK(closures.left.current_ratio == doctest::Approx(mc.left.current_ratio).epsilon(0.01));
    CHECK(closures.right.eddington == doctest::Approx(mc.right.eddington).epsilon(0.01));

    std::ostringstream csv;
    const BenchmarkSolution refs[] = {ref};
    write_benchmark_csv(csv, refs);
    CHECK(csv.str().rfind("cells,cell,x_center,phi_ex,certified_digits\n8,0,0.0625,", 0) == 0);
    const auto meta = benchmark_metadata_json(refs);
    CHECK(meta.find("\"levels\"") != std::string::npos);
  }

  TEST_CASE("shipped ladders share no level") {
    const auto a = default_ladder();
    const auto b = alternate_ladder();
    CHECK(a.size() >= 3);
    CHECK(b.size() >= 3);
    for (const auto& x : a)
      for (const auto& y : b) CHECK(x.cells != y.cells);
  }
}
