#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "scenesynth/errors.hpp"
#include "scenesynth/refine.hpp"

using namespace scenesynth;
using namespace scenesynth::refine;

namespace {

planner::CoarsePlan random_plan(Rng& rng, std::size_t steps, double dt) {
  std::vector<double> actions(steps);
  for (auto& a : actions) a = rng.uniform(-2.0, 1.0);
  return oracle::replay_plan(rng.uniform(0, 20), rng.uniform(2, 15), dt, actions);
}

RefinementParams random_params(Rng& rng) {
  RefinementParams p;
  p.w_accel = rng.uniform(0.1, 5);
  p.w_jerk = rng.uniform(0.1, 5);
  p.w_track = rng.uniform(1, 50);
  return p;
}

}  // namespace

TEST_CASE("finite-difference stencils") {
  const std::vector<double> linear{1, 3, 5, 7, 9};
  for (double a : accel_of(linear, 0.1)) CHECK(a == doctest::Approx(0.0).scale(1.0));
  std::vector<double> quad, cubic;
  for (int i = 0; i < 30; ++i) {
    const double t = 0.1 * i;
    quad.push_back(t * t);  // 1/2 * 2 * t^2
    cubic.push_back(t * t * t);
  }
  for (double a : accel_of(quad, 0.1)) CHECK(std::abs(a - 2.0) < 1e-9);
  for (double j : jerk_of(quad, 0.1)) CHECK(std::abs(j) < 1e-6);
  for (double j : jerk_of(cubic, 0.1)) CHECK(std::abs(j - 6.0) < 1e-6);
  CHECK(accel_of(quad, 0.1).size() == 28);
  CHECK(jerk_of(quad, 0.1).size() == 27);
  CHECK_THROWS_AS(accel_of(std::vector<double>{1, 2}, 0.1), DomainError);
  CHECK_THROWS_AS(jerk_of(std::vector<double>{1, 2, 3}, 0.1), DomainError);
}

TEST_CASE("constant speed plan refines to a straight line") {
  const auto plan = oracle::replay_plan(3.0, 8.0, 0.5, std::vector<double>(10, 0.0));
  const auto r = refine_trajectory(plan, RefinementParams{}, 8.0, 3.0);
  REQUIRE(r.s_values.size() == 51);
  for (std::size_t i = 0; i < r.s_values.size(); ++i) CHECK(std::abs(r.s_values[i] - (3.0 + 0.8 * i)) < 1e-8);
  for (double a : r.accel) CHECK(std::abs(a) < 1e-8);
  for (double j : r.jerk) CHECK(std::abs(j) < 1e-8);
  CHECK(r.timestamps.back() == doctest::Approx(5.0));
}

TEST_CASE("pure tracking reproduces every knot") {
  // k = 1 tracks every fine sample; the first action is 0 so the
  // forward-difference initial speed agrees with the plan.
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> actions{0.0};
    for (int i = 0; i < 6; ++i) actions.push_back(rng.uniform(-2, 1));
    const auto plan = oracle::replay_plan(rng.uniform(0, 5), rng.uniform(5, 12), 0.5, actions);
    RefinementParams p;
    p.w_accel = 0.0;
    p.w_jerk = 0.0;
    p.dt_fine = 0.5;
    p.substeps = 1;
    const auto r = refine_trajectory(plan, p, plan.nodes[0].v, plan.nodes[0].s);
    for (std::size_t i = 0; i < plan.nodes.size(); ++i) CHECK(std::abs(r.s_values[i] - plan.nodes[i].s) < 1e-8);
  }
}

TEST_CASE("untracked samples without smoothing are singular") {
  const auto plan = oracle::replay_plan(0.0, 10.0, 0.5, std::vector<double>(4, 0.5));
  RefinementParams p;
  p.w_accel = 0.0;
  p.w_jerk = 0.0;
  CHECK_THROWS_AS(refine_trajectory(plan, p, 10.0, 0.0), SingularSystemError);
  p.regularization = 1e-6;
  const auto r = refine_trajectory(plan, p, 10.0, 0.0);
  for (std::size_t m = 1; m < plan.nodes.size(); ++m) CHECK(std::abs(r.s_values[m * 5] - plan.nodes[m].s) < 1e-4);
}

TEST_CASE("parameter checks") {
  const auto plan = oracle::replay_plan(0.0, 10.0, 0.5, {0.0, 0.0, 0.0});
  RefinementParams p;
  p.w_track = 0.0;
  CHECK_THROWS_AS(RefinementProblem(plan, p, 10, 0), DomainError);
  p = {};
  p.substeps = 4;  // 4 * 0.1 != 0.5
  CHECK_THROWS_AS(RefinementProblem(plan, p, 10, 0), DomainError);
  p = {};
  p.dt_fine = 0.5;
  p.substeps = 1;
  CHECK_THROWS_AS(RefinementProblem(oracle::replay_plan(0.0, 10.0, 0.5, {0.0, 0.0}), p, 10, 0), DomainError);
}

TEST_CASE("solution matches a dense KKT solve") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto plan = random_plan(rng, 2 + rng.index(9), 0.5);
    const auto p = random_params(rng);
    const double v0 = plan.nodes[0].v + rng.uniform(-1, 1);
    const double s0 = plan.nodes[0].s + rng.uniform(-0.5, 0.5);
    const RefinementProblem problem(plan, p, v0, s0);
    const auto sol = problem.solve();
    const auto qp = oracle::dense_qp(plan, p, v0, s0);
    const auto dense = oracle::solve_dense(qp);
    REQUIRE(sol.s_values.size() == dense.s.size());
    // The smoothing Hessian has a condition number near 1e8, so nearly flat
    // directions let the two solutions drift apart by ~1e-6 m while their
    // objectives agree to ~1e-11. Compare what is well determined.
    const double f_band = oracle::refine_objective(sol.s_values, plan, p);
    const double f_dense = oracle::refine_objective(dense.s, plan, p);
    CHECK(std::abs(f_band - f_dense) <= 1e-9 * std::max(1.0, f_dense));
    for (std::size_t i = 0; i < dense.s.size(); ++i) CHECK(std::abs(sol.s_values[i] - dense.s[i]) < 1e-4);
    CHECK(sol.multipliers[0] == doctest::Approx(dense.multipliers(0)).epsilon(1e-5).scale(1.0));
    CHECK(sol.multipliers[1] == doctest::Approx(dense.multipliers(1)).epsilon(1e-5).scale(1.0));
    CHECK(oracle::dense_stationarity(qp, sol.s_values, sol.multipliers[0], sol.multipliers[1]) < 1e-6);
    CHECK(problem.stationarity_residual(sol) < 1e-6);
    const auto [rp, rv] = problem.constraint_residuals(sol.s_values);
    CHECK(std::abs(rp) < 1e-8);
    CHECK(std::abs(rv) < 1e-8);
    CHECK(std::abs(sol.s_values[0] - s0) < 1e-8);
    CHECK(std::abs((sol.s_values[1] - sol.s_values[0]) / p.dt_fine - v0) < 1e-8);
    CHECK(problem.objective(sol.s_values) ==
          doctest::Approx(oracle::refine_objective(sol.s_values, plan, p)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto plan = random_plan(rng, 3 + rng.index(6), 0.5);
    const auto p = random_params(rng);
    const RefinementProblem problem(plan, p, plan.nodes[0].v, plan.nodes[0].s);
    auto s = coarse_interpolant(plan, p);
    for (auto& v : s) v += rng.uniform(-0.3, 0.3);
    const auto g = problem.gradient(s);
    double scale = 0.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double h = 1e-4;
      auto sp = s, sm = s;
      sp[i] += h;
      sm[i] -= h;
      const double fd = (oracle::refine_objective(sp, plan, p) - oracle::refine_objective(sm, plan, p)) / (2 * h);
      CHECK(std::abs(fd - g[i]) / std::max(scale, 1.0) < 1e-5);
    }
  }
}

TEST_CASE("solution is a constrained minimum") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto plan = random_plan(rng, 4 + rng.index(7), 0.5);
    const auto p = random_params(rng);
    const double v0 = plan.nodes[0].v;
    const double s0 = plan.nodes[0].s;
    const auto sol = RefinementProblem(plan, p, v0, s0).solve();
    const double best = oracle::refine_objective(sol.s_values, plan, p);

    // Directions that keep both initial constraints: d0 = d1 = 0.
    for (int k = 0; k < 100; ++k) {
      auto plus = sol.s_values, minus = sol.s_values;
      for (std::size_t i = 2; i < plus.size(); ++i) {
        const double d = rng.uniform(-1, 1);
        plus[i] += 1e-3 * d;
        minus[i] -= 1e-3 * d;
      }
      CHECK(oracle::refine_objective(plus, plan, p) >= best);
      CHECK(oracle::refine_objective(minus, plan, p) >= best);
    }

    // Coarse interpolant with its first two samples pinned to the constraints.
    auto candidate = coarse_interpolant(plan, p);
    candidate[0] = s0;
    candidate[1] = s0 + v0 * p.dt_fine;
    CHECK(best <= oracle::refine_objective(candidate, plan, p) * (1 + 1e-12));
  }
}

TEST_CASE("coarse interpolant hits the nodes") {
  const auto plan = oracle::replay_plan(1.0, 5.0, 0.5, {1.0, -2.0, 0.5});
  const auto s = coarse_interpolant(plan, RefinementParams{});
  REQUIRE(s.size() == 16);
  for (std::size_t m = 0; m < plan.nodes.size(); ++m) CHECK(s[m * 5] == doctest::Approx(plan.nodes[m].s));
  CHECK(s[2] == doctest::Approx(1.0 + 5.0 * 0.2 + 0.5 * 0.04));
}
