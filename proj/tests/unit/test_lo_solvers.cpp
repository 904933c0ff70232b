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
#include <vector>

#include "hybridmc/closures.hpp"
#include "hybridmc/errors.hpp"
#include "hybridmc/lo_solvers.hpp"
#include "hybridmc/mc_engine.hpp"
#include "hybridmc/rng.hpp"

using namespace hybridmc;

namespace {

// Dense Gaussian elimination with partial pivoting, independent of Thomas.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a[r][k]) > std::abs(a[p][k])) p = r;
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double m = a[r][k] / a[k][k];
      for (std::size_t c = k; c < n; ++c) a[r][c] -= m * a[k][c];
      b[r] -= m * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= a[k][c] * x[c];
    x[k] = s / a[k][k];
  }
  return x;
}

ClosureSet random_closures(std::size_t cells, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  ClosureSet c = diffusion_closures(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    c.eddington[i] = 0.2 + 0.3 * rng.uniform();
    c.sm_factor[i] = 0.2 * (rng.uniform() - 0.5);
  }
  for (auto* b : {&c.left, &c.right}) {
    b->current_ratio = 0.3 + 0.4 * rng.uniform();
    b->eddington = 0.3 + 0.3 * rng.uniform();
    b->phi = 0.3 + rng.uniform();
    b->sm_factor = (kOneThird - b->eddington) * b->phi;
    b->fallback = false;
  }
  return c;
}

}  // namespace

TEST_SUITE("lo_solvers") {
  TEST_CASE("face cross section and width") {
    const auto a = face_sigma_and_width(1.0, 3.0, 0.5, 0.25);
    CHECK(a.sigma_t == doctest::Approx(1.25 / 0.75));
    CHECK(a.width == doctest::Approx(0.375));
    const auto b = face_sigma_and_width(2.0, 2.0, 0.1, 0.1);
    CHECK(b.sigma_t == doctest::Approx(2.0));
    CHECK(b.width == doctest::Approx(0.1));
    const auto c = face_sigma_and_width(2.0, 2.0, 0.1, 0.3);
    CHECK(c.sigma_t == doctest::Approx(2.0));
    CHECK(c.width == doctest::Approx(0.2));
  }

  TEST_CASE("diffusion closures make both systems identical") {
    const auto p = benchmark_problem();
    for (const std::size_t cells : {4u, 64u}) {
      const auto mesh = build_uniform_mesh(p, cells);
      const auto c = diffusion_closures(cells);
      const auto a = assemble_hqd(p, mesh, c);
      const auto b = assemble_hsm(p, mesh, c);
      CHECK(a.lower == b.lower);
      CHECK(a.diag == b.diag);
      CHECK(a.upper == b.upper);
      CHECK(a.rhs == b.rhs);
    }
  }

  TEST_CASE("constant E and phi telescope in interior rows") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 8);
    auto c = diffusion_closures(8);
    c.eddington.assign(8, 0.4);
    const auto sys = assemble_hqd(p, mesh, c);
    const double phi = 2.5;
    const double dx = 1.0 / 8.0;
    for (std::size_t i = 1; i + 1 < 8; ++i) {
      const double r = sys.lower[i] * phi + sys.diag[i] * phi + sys.upper[i] * phi - sys.rhs[i];
      CHECK(r == doctest::Approx(0.1 * dx * phi - 1.0 * dx).epsilon(1e-12));
    }
  }

  TEST_CASE("constant F leaves interior rhs untouched") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 8);
    auto c = diffusion_closures(8);
    const auto base = assemble_hsm(p, mesh, c);
    c.sm_factor.assign(8, 0.07);
    const auto shifted = assemble_hsm(p, mesh, c);
    for (std::size_t i = 1; i + 1 < 8; ++i)
      CHECK(shifted.rhs[i] == doctest::Approx(base.rhs[i]).epsilon(1e-14));
  }

  TEST_CASE("consistent SM factors reproduce the QD solution") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 4);
    auto c = random_closures(4, 3);
    const auto phi_star = solve_hybrid(p, mesh, c, Method::hqd).phi;
    const double h = 0.5 / 4.0;
    for (std::size_t i = 0; i < 4; ++i) c.sm_factor[i] = (kOneThird - c.eddington[i]) * phi_star[i];
    // Outer-face flux implied by the QD boundary relation.
    c.left.phi = c.eddington[0] * phi_star[0] / (c.left.current_ratio * h + c.left.eddington);
    c.right.phi = c.eddington[3] * phi_star[3] / (c.right.current_ratio * h + c.right.eddington);
    c.left.sm_factor = (kOneThird - c.left.eddington) * c.left.phi;
    c.right.sm_factor = (kOneThird - c.right.eddington) * c.right.phi;
    const auto phi_sm = solve_hybrid(p, mesh, c, Method::hsm).phi;
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(phi_sm[i] == doctest::Approx(phi_star[i]).epsilon(1e-12));
  }

  TEST_CASE("Thomas solver examples") {
    TridiagonalSystem id(3);
    id.diag = {1.0, 1.0, 1.0};
    id.rhs = {4.0, -2.0, 7.0};
    CHECK(solve_tridiagonal(id) == id.rhs);

    TridiagonalSystem s(3);
    s.diag = {2.0, 2.0, 2.0};
    s.lower = {0.0, -1.0, -1.0};
    s.upper = {-1.0, -1.0, 0.0};
    s.rhs = {1.0, 0.0, 0.0};
    const auto x = solve_tridiagonal(s);
    CHECK(x[0] == doctest::Approx(0.75));
    CHECK(x[1] == doctest::Approx(0.5));
    CHECK(x[2] == doctest::Approx(0.25));
    CHECK(residual_inf_norm(s, x) < 1e-15);
  }

  TEST_CASE("Thomas solver against dense elimination") {
    RandomStream rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 6;
      TridiagonalSystem s(n);
      std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) s.lower[i] = rng.uniform() - 0.5;
        if (i + 1 < n) s.upper[i] = rng.uniform() - 0.5;
        s.diag[i] = 1.5 + rng.uniform();
        s.rhs[i] = 2.0 * rng.uniform() - 1.0;
        dense[i][i] = s.diag[i];
        if (i > 0) dense[i][i - 1] = s.lower[i];
        if (i + 1 < n) dense[i][i + 1] = s.upper[i];
      }
      const auto x = solve_tridiagonal(s);
      const auto y = dense_solve(dense, s.rhs);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(x[i] - y[i]) < 1e-12);
    }
  }

  TEST_CASE("zero pivot names its row") {
    TridiagonalSystem s(3);
    s.diag = {1.0, 1.0, 1.0};
    s.lower = {0.0, 1.0, 0.0};
    s.upper = {1.0, 0.0, 0.0};
    try {
      solve_tridiagonal(s);
      FAIL("expected SingularSystemError");
    } catch (const SingularSystemError& e) {
      CHECK(e.row() == 1);
    }
  }

  TEST_CASE("invalid closures are rejected at assembly") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 4);
    CHECK_THROWS_AS(assemble_hqd(p, mesh, diffusion_closures(3)), AssemblyError);
    auto c = diffusion_closures(4);
    c.eddington[2] = std::nan("");
    CHECK_THROWS_AS(assemble_hqd(p, mesh, c), AssemblyError);
    c = diffusion_closures(4);
    c.sm_factor[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(assemble_hsm(p, mesh, c), AssemblyError);
  }

  TEST_CASE("particle balance holds for arbitrary closures") {
    const SlabProblem p({{0.0, 0.5, 1.0, 0.9, 1.0}, {0.5, 1.0, 2.0, 1.0, 0.5}});
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      for (const std::size_t cells : {2u, 8u, 32u}) {
        const auto mesh = build_uniform_mesh(p, cells);
        const auto c = random_closures(cells, seed);
        for (const auto m : {Method::hqd, Method::hsm}) {
          const auto sol = solve_hybrid(p, mesh, c, m);
          CHECK(particle_balance(p, mesh, c, m, sol.phi).relative_residual() < 1e-10);
        }
      }
    }
  }

  TEST_CASE("hybrid solutions carry tally provenance") {
    const auto p = benchmark_problem();
    const auto mesh = build_uniform_mesh(p, 8);
    RunConfig cfg;
    cfg.histories = 2000;
    cfg.rng_seed = 31;
    cfg.workers = 1;
    const auto c = compute_closures(run_histories(p, mesh, cfg), mesh, cfg.rng_seed);
    const auto sol = solve_hybrid(p, mesh, c, Method::hsm);
    CHECK(sol.seed == 31);
    CHECK(sol.histories == 2000);
    CHECK(sol.method == Method::hsm);
    std::ostringstream out;
    write_solution_csv(out, mesh, sol);
    CHECK(out.str().rfind("cell,x_center,phi,method,seed,histories\n0,0.0625,", 0) == 0);
  }

  TEST_CASE("method names") {
    CHECK(method_from_string("HQD") == Method::hqd);
    CHECK(method_from_string("hsm") == Method::hsm);
    CHECK_THROWS_AS(method_from_string("p1"), ConfigError);
  }
}
