#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "scenesynth/errors.hpp"
#include "scenesynth/reference_path.hpp"

using namespace scenesynth;

namespace {

SceneMap chain_map(int lanes, double length) {
  SceneMap map;
  map.city_tag = "MIA";
  for (int i = 0; i < lanes; ++i) {
    LaneSegment lane{"L" + std::to_string(i + 1), oracle::straight_line(length, 2.0, {length * i, 0.0}), {}, {}};
    if (i > 0) lane.predecessors.push_back("L" + std::to_string(i));
    if (i + 1 < lanes) lane.successors.push_back("L" + std::to_string(i + 2));
    map.add_lane(std::move(lane));
  }
  return map;
}

}  // namespace

TEST_CASE("single long lane gives one full-length path") {
  const SceneMap map = chain_map(1, 200.0);
  Rng rng(1);
  const auto paths = build_reference_paths(map, 100.0, rng);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].length() == doctest::Approx(200.0));
}

TEST_CASE("chain walk concatenates until the length is reached") {
  const SceneMap map = chain_map(3, 40.0);
  Rng rng(1);
  const auto path = build_reference_path(map, "L1", 100.0, rng);
  CHECK(path.lane_ids() == std::vector<std::string>{"L1", "L2", "L3"});
  CHECK(path.length() == doctest::Approx(120.0));
  // Junction points are not duplicated.
  const auto cum = path.cum_s();
  for (std::size_t i = 1; i < cum.size(); ++i) CHECK(cum[i] > cum[i - 1]);
}

TEST_CASE("fork selection is reproducible under a fixed seed") {
  SceneMap map;
  map.add_lane({"L1", oracle::straight_line(30, 1), {}, {"L2", "L3"}});
  map.add_lane({"L2", oracle::straight_line(30, 1, {30, 0}, 0.3), {"L1"}, {}});
  map.add_lane({"L3", oracle::straight_line(30, 1, {30, 0}, -0.3), {"L1"}, {}});
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    const auto p1 = walk_lanes(map, "L1", 50.0, a);
    const auto p2 = walk_lanes(map, "L1", 50.0, b);
    CHECK(p1 == p2);
    REQUIRE(p1.size() == 2);
    seen.insert(p1[1]);
  }
  CHECK(seen.size() == 2);  // both branches get used
}

TEST_CASE("empty map yields no paths") {
  Rng rng(0);
  CHECK(build_reference_paths(SceneMap{}, 10.0, rng).empty());
  CHECK_THROWS_AS(build_reference_paths(SceneMap{}, 0.0, rng), DomainError);
}

TEST_CASE("reference path sampling invariants") {
  const ReferencePath path(oracle::wavy_line(150.0, 4.0, 12.0), 1.0);
  const auto& cum = path.cum_s();
  CHECK(cum.front() == 0.0);
  for (std::size_t i = 0; i < cum.size(); ++i) CHECK(cum[i] == static_cast<double>(i) * path.spacing());
  for (double k : path.kappa()) CHECK(std::isfinite(k));
  // Samples are equally spaced along the source; chords on this gentle curve
  // match the spacing closely.
  for (std::size_t i = 1; i < path.size(); ++i) {
    CHECK(distance(path.samples()[i - 1], path.samples()[i]) == doctest::Approx(1.0).epsilon(1e-3));
  }
  // The straight case is uniform to 1e-6.
  const ReferencePath straight(oracle::straight_line(100.0, 3.0), 1.0);
  for (std::size_t i = 1; i < straight.size(); ++i) {
    CHECK(std::abs(distance(straight.samples()[i - 1], straight.samples()[i]) - 1.0) < 1e-6);
  }
}

TEST_CASE("position lookup") {
  const ReferencePath path(oracle::wavy_line(60.0, 2.0, 7.0), 1.0);
  for (std::size_t i = 0; i < path.size(); ++i) CHECK(path.position_at(path.cum_s()[i]) == path.samples()[i]);
  CHECK_THROWS_AS(path.position_at(-0.5), PathOverrunError);
  CHECK_THROWS_AS(path.position_at(path.length() + 0.5), PathOverrunError);
  const Point2 mid = path.position_at(10.5);
  CHECK(distance(mid, lerp(path.samples()[10], path.samples()[11], 0.5)) < 1e-12);
}

TEST_CASE("projection examples") {
  const ReferencePath path(Polyline({{0, 0}, {10, 0}}), 1.0);
  const auto on_sample = project_to_path(path.samples()[2], path);
  CHECK(on_sample.s == path.cum_s()[2]);
  CHECK(on_sample.lateral == 0.0);
  const auto left = project_to_path({5, 2}, path);
  CHECK(left.s == doctest::Approx(5.0));
  CHECK(left.lateral == doctest::Approx(2.0));
  CHECK(project_to_path({5, -2}, path).lateral == doctest::Approx(-2.0));
}

TEST_CASE("projection agrees with a densified nearest-point search") {
  const ReferencePath path(oracle::wavy_line(100.0, 5.0, 9.0), 1.0);
  // 10^4 densified samples along the path polyline.
  std::vector<std::pair<double, Point2>> dense;
  const double step = path.length() / 10000.0;
  for (int i = 0; i <= 10000; ++i) {
    const double s = std::min(path.length(), i * step);
    dense.emplace_back(s, path.position_at(s));
  }
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Point2 q{rng.uniform(-5, 105), rng.uniform(-12, 12)};
    const auto proj = project_to_path(q, path);
    auto best = dense.front();
    for (const auto& d : dense) {
      if (distance(d.second, q) < distance(best.second, q)) best = d;
    }
    CHECK(proj.distance <= distance(best.second, q) + 1e-9);
    // Ties between distant branches are possible on a wavy path; compare
    // distances there and positions everywhere else.
    if (std::abs(proj.s - best.first) > path.spacing()) {
      CHECK(proj.distance == doctest::Approx(distance(best.second, q)).epsilon(1e-6));
    }
    for (const auto& v : path.samples().points()) CHECK(proj.distance <= distance(v, q) + 1e-12);
  }
}
