#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "scenesynth/errors.hpp"
#include "scenesynth/geometry.hpp"
#include "scenesynth/rng.hpp"

using namespace scenesynth;

TEST_CASE("polyline rejects degenerate input") {
  CHECK_THROWS_AS(Polyline({{0, 0}}), ValidationError);
  CHECK_THROWS_AS(Polyline({{0, 0}, {0, 0}}), ValidationError);
  CHECK_THROWS_AS(Polyline({{0, 0}, {NAN, 1}}), ValidationError);
  CHECK_THROWS_AS(Polyline({{0, 0}, {INFINITY, 1}}), ValidationError);
  const Polyline ok({{0, 0}, {3, 4}, {3, 5}});
  CHECK(ok.length() == doctest::Approx(6.0));
  const auto cum = ok.cumulative_length();
  CHECK(cum == std::vector<double>{0.0, 5.0, 6.0});
}

TEST_CASE("resample straight segment") {
  const Polyline line({{0, 0}, {10, 0}});
  SUBCASE("spacing 1 gives 11 collinear points") {
    const auto r = resample_polyline(line, 1.0);
    REQUIRE(r.size() == 11);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(r[i].y == 0.0);
      CHECK(r[i].x == doctest::Approx(static_cast<double>(i)).epsilon(1e-12));
    }
  }
  SUBCASE("spacing 3 keeps the short final gap") {
    const auto r = resample_polyline(line, 3.0);
    REQUIRE(r.size() == 5);
    const double expected[] = {0, 3, 6, 9, 10};
    for (std::size_t i = 0; i < 5; ++i) CHECK(r[i].x == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(r.back() == line.back());
  }
  SUBCASE("shorter than spacing returns the endpoints") {
    const auto r = resample_polyline(line, 25.0);
    REQUIRE(r.size() == 2);
    CHECK(r.front() == line.front());
    CHECK(r.back() == line.back());
  }
  CHECK_THROWS_AS(resample_polyline(line, 0.0), DomainError);
  CHECK_THROWS_AS(resample_polyline(line, -1.0), DomainError);
}

TEST_CASE("resampled quarter circle stays on the circle") {
  const auto dense = oracle::arc(5.0, 0.0, std::numbers::pi / 2, 10000);
  const auto r = resample_polyline(dense, 0.1);
  CHECK(distance(r.front(), dense.front()) < 1e-9);
  CHECK(distance(r.back(), dense.back()) < 1e-9);
  for (const auto& p : r.points()) CHECK(std::abs(norm(p) - 5.0) < 1e-6);
  const auto cum = r.cumulative_length();
  for (std::size_t i = 1; i + 1 < cum.size(); ++i) CHECK(cum[i] - cum[i - 1] == doctest::Approx(0.1).epsilon(1e-4));  // chord of a 0.1 m arc
}

TEST_CASE("resampling a uniform polyline is idempotent") {
  Rng rng(11);
  std::vector<Point2> pts{{0, 0}};
  double heading = 0.0;
  for (int i = 0; i < 200; ++i) {
    heading += rng.uniform(-0.05, 0.05);
    pts.push_back(pts.back() + 0.5 * Point2{std::cos(heading), std::sin(heading)});
  }
  const Polyline uniform(pts);
  const auto again = resample_polyline(uniform, 0.5);
  REQUIRE(again.size() == uniform.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < uniform.size(); ++i) worst = std::max(worst, distance(uniform[i], again[i]));
  CHECK(worst <= 1e-9);
}

TEST_CASE("menger curvature") {
  CHECK(menger_curvature({0, 0}, {1, 0}, {2, 0}) == 0.0);
  // Unit circle points: left turn positive, right turn negative.
  const Point2 a{1, 0}, b{0, 1}, c{-1, 0};
  CHECK(menger_curvature(a, b, c) == doctest::Approx(1.0));
  CHECK(menger_curvature(c, b, a) == doctest::Approx(-1.0));
}

TEST_CASE("curvature profile") {
  SUBCASE("straight line is flat") {
    for (double k : curvature_profile(resample_polyline(Polyline({{0, 0}, {20, 0}}), 1.0))) CHECK(k == 0.0);
  }
  SUBCASE("two points are too few") { CHECK_THROWS_AS(curvature_profile(Polyline({{0, 0}, {1, 0}})), DomainError); }
  SUBCASE("circle R=20 sampled every 0.5 m") {
    const double step = 2.0 * std::asin(0.25 / 20.0);
    const auto n = static_cast<std::size_t>(std::floor(std::numbers::pi / step));
    const auto circle = oracle::arc(20.0, 0.0, step * static_cast<double>(n), n);
    for (double k : curvature_profile(circle)) CHECK(std::abs(k - 0.05) < 1e-4);
  }
  SUBCASE("relative error below 1e-3 for R in {5, 20, 100}") {
    for (double radius : {5.0, 20.0, 100.0}) {
      // Resampled from a dense chord approximation, as reference paths are.
      const auto dense = oracle::arc(radius, 0.0, 1.5, 20000);
      const auto k = curvature_profile(resample_polyline(dense, 1.0));
      double worst = 0.0;
      for (double v : k) worst = std::max(worst, std::abs(v - 1.0 / radius));
      CHECK(worst < 1e-3 / radius);
    }
  }
  SUBCASE("endpoints copy their neighbours") {
    const auto k = curvature_profile(oracle::arc(10.0, 0.0, 1.0, 10));
    CHECK(k.front() == k[1]);
    CHECK(k.back() == k[k.size() - 2]);
  }
}

TEST_CASE("pose frames invert each other") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Pose2 pose{{rng.uniform(-50, 50), rng.uniform(-50, 50)}, rng.uniform(-4, 4)};
    const Point2 p{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    CHECK(distance(pose.to_world(pose.to_local(p)), p) < 1e-9);
    CHECK(norm(pose.to_local(p)) == doctest::Approx(distance(p, pose.origin)));
  }
}
