#include "scenesynth/map_fixtures.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"
#include "scenesynth/rng.hpp"

namespace scenesynth {
namespace {

constexpr double kLaneWidth = 3.5;
constexpr double kPointStep = 2.0;

struct Pose {
  double x, y, theta;
};

using PoseRun = std::vector<Pose>;

PoseRun straight_piece(const Pose& start, double length) {
  const int n = std::max(1, static_cast<int>(std::ceil(length / kPointStep)));
  PoseRun run{start};
  for (int k = 1; k <= n; ++k) {
    const double d = length * k / n;
    run.push_back({start.x + d * std::cos(start.theta), start.y + d * std::sin(start.theta), start.theta});
  }
  return run;
}

// Circular arc; positive sweep turns left.
PoseRun arc_piece(const Pose& start, double radius, double sweep) {
  const double sign = sweep >= 0.0 ? 1.0 : -1.0;
  const double cx = start.x - sign * radius * std::sin(start.theta);
  const double cy = start.y + sign * radius * std::cos(start.theta);
  const int n = std::max(2, static_cast<int>(std::ceil(radius * std::abs(sweep) / kPointStep)));
  PoseRun run{start};
  for (int k = 1; k <= n; ++k) {
    const double th = start.theta + sweep * k / n;
    run.push_back({cx + sign * radius * std::sin(th), cy - sign * radius * std::cos(th), th});
  }
  return run;
}

Polyline offset_line(const PoseRun& run, double offset) {
  std::vector<Point2> pts;
  pts.reserve(run.size());
  for (const Pose& p : run) {
    pts.push_back({p.x - offset * std::sin(p.theta), p.y + offset * std::cos(p.theta)});
  }
  return Polyline(std::move(pts));
}

void link(SceneMap& map, const std::string& from, const std::string& to) {
  map.lanes.at(from).successors.push_back(to);
  map.lanes.at(to).predecessors.push_back(from);
}

}  // namespace

SceneMap straight_two_lane_map(double lane_length, double point_spacing) {
  SceneMap map;
  map.city_tag = "PIT";
  const int n = std::max(1, static_cast<int>(std::round(lane_length / point_spacing)));
  for (int lane = 0; lane < 2; ++lane) {
    std::vector<Point2> pts;
    for (int k = 0; k <= n; ++k) pts.push_back({lane * lane_length + lane_length * k / n, 0.0});
    map.add_lane(LaneSegment{fmt::format("L{}", lane + 1), Polyline(std::move(pts)), {}, {}});
  }
  link(map, "L1", "L2");
  return map;
}

SceneMap procedural_city_map(std::uint64_t seed, int road_count) {
  Rng rng(derive_seed(seed, 0x6d6170));
  SceneMap map;
  map.city_tag = rng.bernoulli(0.5) ? "PIT" : "MIA";
  constexpr double kPi = std::numbers::pi;

  for (int r = 0; r < road_count; ++r) {
    Pose pose{rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0), rng.uniform(-kPi, kPi)};
    const int lane_count = 1 + static_cast<int>(rng.index(3));
    const int piece_count = 6 + static_cast<int>(rng.index(4));

    std::vector<PoseRun> pieces;
    for (int p = 0; p < piece_count; ++p) {
      PoseRun run = rng.bernoulli(0.5)
                        ? straight_piece(pose, rng.uniform(40.0, 100.0))
                        : arc_piece(pose, rng.uniform(40.0, 200.0),
                                    (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(10.0, 50.0) * kPi / 180.0);
      pose = run.back();
      pieces.push_back(std::move(run));
    }

    for (int l = 0; l < lane_count; ++l) {
      const double offset = kLaneWidth * (l - 0.5 * (lane_count - 1));
      for (int p = 0; p < piece_count; ++p) {
        map.add_lane(LaneSegment{fmt::format("r{}_l{}_p{}", r, l, p), offset_line(pieces[p], offset), {}, {}});
        if (p > 0) link(map, fmt::format("r{}_l{}_p{}", r, l, p - 1), fmt::format("r{}_l{}_p{}", r, l, p));
      }
    }

    // Right-turn branch off the right-most lane at an interior piece boundary.
    if (piece_count > 2 && rng.bernoulli(0.75)) {
      const int p = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(piece_count - 2)));
      const double offset = -kLaneWidth * 0.5 * (lane_count - 1);
      const Pose end = pieces[p].back();
      const Pose branch_start{end.x - offset * std::sin(end.theta), end.y + offset * std::cos(end.theta),
                              end.theta};
      const PoseRun turn = arc_piece(branch_start, rng.uniform(20.0, 40.0), -kPi / 2.0);
      const PoseRun tail = straight_piece(turn.back(), rng.uniform(60.0, 120.0));
      const std::string parent = fmt::format("r{}_l0_p{}", r, p);
      const std::string b0 = fmt::format("r{}_b0", r);
      const std::string b1 = fmt::format("r{}_b1", r);
      map.add_lane(LaneSegment{b0, offset_line(turn, 0.0), {}, {}});
      map.add_lane(LaneSegment{b1, offset_line(tail, 0.0), {}, {}});
      link(map, parent, b0);
      link(map, b0, b1);
    }
  }
  validate_map(map);
  return map;
}

SceneMap generate_map_fixture(const std::string& kind, std::uint64_t seed) {
  if (kind == "straight") return straight_two_lane_map();
  if (kind == "city") return procedural_city_map(seed);
  throw DomainError(fmt::format("unknown map fixture kind '{}'", kind));
}

}  // namespace scenesynth
