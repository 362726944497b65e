#include "scenesynth/reference_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"

namespace scenesynth {

ReferencePath::ReferencePath(const Polyline& source, double spacing, std::vector<std::string> lane_ids)
    : lane_ids_(std::move(lane_ids)), spacing_(spacing) {
  Polyline resampled = resample_polyline(source, spacing);
  std::vector<Point2> pts(resampled.points().begin(), resampled.points().end());
  const double last_gap = source.length() - static_cast<double>(pts.size() - 2) * spacing;
  if (std::abs(last_gap - spacing) > 1e-6) pts.pop_back();
  if (pts.size() < 3) {
    throw DomainError(fmt::format("reference path of length {:.3f} m is shorter than two samples",
                                  source.length()));
  }
  samples_ = Polyline(std::move(pts));
  cum_s_.resize(samples_.size());
  for (std::size_t i = 0; i < cum_s_.size(); ++i) cum_s_[i] = static_cast<double>(i) * spacing;
  kappa_ = curvature_profile(samples_);
}

std::pair<std::size_t, double> ReferencePath::locate(double s) const {
  constexpr double kSlack = 1e-9;
  if (!(s >= -kSlack && s <= length() + kSlack)) {
    throw PathOverrunError(fmt::format("arc-length {} outside path [0, {}]", s, length()));
  }
  s = std::clamp(s, 0.0, length());
  const std::size_t last_seg = cum_s_.size() - 2;
  const auto i = std::min(static_cast<std::size_t>(s / spacing_), last_seg);
  return {i, (s - cum_s_[i]) / spacing_};
}

Point2 ReferencePath::position_at(double s) const {
  const auto [i, f] = locate(s);
  if (f == 0.0) return samples_[i];
  if (f >= 1.0) return samples_[i + 1];
  return lerp(samples_[i], samples_[i + 1], f);
}

double ReferencePath::curvature_at(double s) const {
  const auto [i, f] = locate(s);
  return kappa_[i] + f * (kappa_[i + 1] - kappa_[i]);
}

double ReferencePath::heading_at_sample(std::size_t i) const {
  const std::size_t j = std::min(i, samples_.size() - 2);
  const Point2 d = samples_[j + 1] - samples_[j];
  return std::atan2(d.y, d.x);
}

Polyline concatenate_lanes(const SceneMap& map, const std::vector<std::string>& lane_ids) {
  std::vector<Point2> pts;
  for (const auto& id : lane_ids) {
    const auto it = map.lanes.find(id);
    if (it == map.lanes.end()) throw ValidationError(fmt::format("unknown lane '{}'", id));
    for (const Point2& p : it->second.centerline.points()) {
      if (!pts.empty() && distance(pts.back(), p) <= 1e-6) continue;
      pts.push_back(p);
    }
  }
  return Polyline(std::move(pts));
}

namespace {

struct Walker {
  const SceneMap& map;
  double min_length;
  Rng& rng;
  std::set<std::string> visited;
  std::vector<std::string> route;
  std::vector<std::string> best;
  double best_length = -1.0;

  bool visit(const std::string& id, double acc) {
    visited.insert(id);
    route.push_back(id);
    const LaneSegment& lane = map.lanes.at(id);
    acc += lane.centerline.length();
    if (acc > best_length) {
      best_length = acc;
      best = route;
    }
    if (acc >= min_length) return true;

    std::vector<std::string> next;
    for (const auto& s : lane.successors) {
      if (!visited.contains(s)) next.push_back(s);
    }
    rng.shuffle(next);
    for (const auto& s : next) {
      if (visited.contains(s)) continue;
      if (visit(s, acc)) return true;
    }
    route.pop_back();
    return false;
  }
};

}  // namespace

std::vector<std::string> walk_lanes(const SceneMap& map, const std::string& start_lane,
                                    double min_length, Rng& rng) {
  if (!map.lanes.contains(start_lane)) {
    throw ValidationError(fmt::format("unknown start lane '{}'", start_lane));
  }
  Walker walker{map, min_length, rng, {}, {}, {}, -1.0};
  if (walker.visit(start_lane, 0.0)) return walker.route;
  return walker.best;
}

ReferencePath build_reference_path(const SceneMap& map, const std::string& start_lane,
                                   double min_length, Rng& rng, double spacing) {
  if (!(min_length > 0.0)) throw DomainError("min_length must be positive");
  auto ids = walk_lanes(map, start_lane, min_length, rng);
  const Polyline joined = concatenate_lanes(map, ids);
  return ReferencePath(joined, spacing, std::move(ids));
}

std::vector<ReferencePath> build_reference_paths(const SceneMap& map, double min_length, Rng& rng,
                                                 double spacing) {
  if (!(min_length > 0.0)) throw DomainError("min_length must be positive");
  std::vector<ReferencePath> paths;
  for (const auto& [id, lane] : map.lanes) {
    try {
      paths.push_back(build_reference_path(map, id, min_length, rng, spacing));
    } catch (const DomainError&) {
      // Route too short to carry two samples.
    }
  }
  return paths;
}

PathProjection project_to_path(Point2 pos, const ReferencePath& path) {
  const auto pts = path.samples().points();
  PathProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point2 a = pts[i];
    const Point2 d = pts[i + 1] - a;
    const double len2 = dot(d, d);
    const double f = std::clamp(dot(pos - a, d) / len2, 0.0, 1.0);
    const Point2 foot = f == 0.0 ? a : (f == 1.0 ? pts[i + 1] : lerp(a, pts[i + 1], f));
    const double dist = distance(pos, foot);
    if (dist < best.distance) {
      best.distance = dist;
      best.s = path.cum_s()[i] + f * path.spacing();
      best.lateral = std::copysign(dist, cross(d, pos - a));
    }
  }
  return best;
}

}  // namespace scenesynth
