#include "scenesynth/augment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"

namespace scenesynth::augment {

std::string to_string(TurnKind kind) {
  return kind == TurnKind::SingleTurn ? "SingleTurn" : "DoubleTurn";
}

TurnKind turn_kind_from_string(const std::string& name) {
  if (name == "SingleTurn" || name == "single") return TurnKind::SingleTurn;
  if (name == "DoubleTurn" || name == "double") return TurnKind::DoubleTurn;
  throw DomainError(fmt::format("unknown turn kind '{}'", name));
}

void TurnTransformParams::validate() const {
  if (!(magnitude >= 1.0 && magnitude <= 10.0)) {
    throw DomainError(fmt::format("alpha1 must lie in [1, 10], got {}", magnitude));
  }
  if (!(exponent > 1.0)) throw DomainError(fmt::format("alpha2 must exceed 1, got {}", exponent));
  if (!(turn_length > 0.0)) throw DomainError(fmt::format("s_t must be positive, got {}", turn_length));
  if (kind == TurnKind::DoubleTurn && !(turn_spacing > 0.0)) {
    throw DomainError(fmt::format("beta must be positive, got {}", turn_spacing));
  }
  if (!std::isfinite(onset) || !is_finite(frame.origin) || !std::isfinite(frame.heading)) {
    throw DomainError("warp onset and frame must be finite");
  }
}

double q_alpha(double x, double alpha1, double alpha2, double turn_length) {
  if (!(x >= 0.0 && x <= turn_length)) {
    throw DomainError(fmt::format("q_alpha argument {} outside [0, {}]", x, turn_length));
  }
  // alpha1 / s_t^alpha2 * x^alpha2, arranged so that q(s_t) == alpha1 exactly.
  return alpha1 * std::pow(x / turn_length, alpha2);
}

double f_single_turn(double x, const TurnTransformParams& p) {
  if (x < 0.0) return 0.0;
  if (x <= p.turn_length) return q_alpha(x, p.magnitude, p.exponent, p.turn_length);
  return (x - p.turn_length) * p.exit_slope() + p.magnitude;
}

double f_double_turn(double x, const TurnTransformParams& p) {
  if (p.kind != TurnKind::DoubleTurn) throw DomainError("f_double_turn called with SingleTurn params");
  return f_single_turn(x, p) - f_single_turn(x - p.turn_spacing, p);
}

double warp_offset(double x, const TurnTransformParams& p) {
  return p.kind == TurnKind::SingleTurn ? f_single_turn(x, p) : f_double_turn(x, p);
}

Point2 warp_point(Point2 world, const TurnTransformParams& p) {
  Point2 local = p.frame.to_local(world);
  if (local.x < p.onset) return world;
  local.y += warp_offset(local.x - p.onset, p);
  return p.frame.to_world(local);
}

namespace {

// Frame-local x intervals where the warp is nonlinear. Everywhere else it is
// affine, so straight segments stay straight and need no extra points.
bool crosses_ramp(double x0, double x1, const TurnTransformParams& p) {
  const double lo = std::min(x0, x1) - p.onset;
  const double hi = std::max(x0, x1) - p.onset;
  auto overlaps = [&](double a, double b) { return hi >= a && lo <= b; };
  if (overlaps(0.0, p.turn_length)) return true;
  return p.kind == TurnKind::DoubleTurn && overlaps(p.turn_spacing, p.turn_spacing + p.turn_length);
}

}  // namespace

SceneMap densify_ramps(const SceneMap& map, const TurnTransformParams& p, double max_step) {
  p.validate();
  if (!(max_step > 0.0)) throw DomainError("densify step must be positive");
  const double stretch = 1.0 + p.exit_slope();
  SceneMap out = map;
  for (auto& [id, lane] : out.lanes) {
    const auto src = lane.centerline.points();
    std::vector<Point2> pts;
    pts.reserve(src.size());
    pts.push_back(src[0]);
    for (std::size_t i = 1; i < src.size(); ++i) {
      const Point2 a = src[i - 1];
      const Point2 b = src[i];
      if (crosses_ramp(p.frame.to_local(a).x, p.frame.to_local(b).x, p)) {
        const auto n = static_cast<std::size_t>(std::ceil(distance(a, b) * stretch / max_step));
        for (std::size_t k = 1; k < n; ++k) pts.push_back(lerp(a, b, static_cast<double>(k) / static_cast<double>(n)));
      }
      pts.push_back(b);
    }
    if (pts.size() != src.size()) lane.centerline = Polyline(std::move(pts));
  }
  return out;
}

SceneMap apply_transform(const SceneMap& map, const TurnTransformParams& p) {
  p.validate();
  SceneMap out;
  out.city_tag = map.city_tag;
  for (const auto& [id, lane] : map.lanes) {
    std::vector<Point2> pts;
    pts.reserve(lane.centerline.size());
    for (const Point2& q : lane.centerline.points()) pts.push_back(warp_point(q, p));
    out.lanes.emplace(id, LaneSegment{id, Polyline(std::move(pts)), lane.predecessors, lane.successors});
  }
  return out;
}

TurnTransformParams sample_transform_params(Rng& rng, const ReferencePath& path, double s_lo, double s_hi,
                                            const AugmentRanges& ranges) {
  TurnTransformParams p;
  p.kind = rng.index(2) == 0 ? TurnKind::SingleTurn : TurnKind::DoubleTurn;
  p.onset = ranges.onset;
  p.magnitude = rng.uniform(ranges.magnitude_min, ranges.magnitude_max);
  p.exponent = ranges.exponent;
  p.turn_length = ranges.turn_length;
  p.turn_spacing = ranges.turn_spacing;
  if (ranges.max_slope) {
    p.magnitude = std::max(1.0, std::min(p.magnitude, *ranges.max_slope * p.turn_length / p.exponent));
  }

  const auto& cum = path.cum_s();
  auto lo = std::lower_bound(cum.begin(), cum.end(), std::max(0.0, s_lo)) - cum.begin();
  auto hi = std::upper_bound(cum.begin(), cum.end(), s_hi) - cum.begin();
  if (hi <= lo) {
    lo = 0;
    hi = static_cast<std::ptrdiff_t>(cum.size());
  }
  const auto i = static_cast<std::size_t>(lo) + rng.index(static_cast<std::size_t>(hi - lo));
  p.frame = Pose2{path.samples()[i], path.heading_at_sample(i)};
  return p;
}

TurnTransformParams sample_transform_params(Rng& rng, const ReferencePath& path, const AugmentRanges& ranges) {
  return sample_transform_params(rng, path, 0.0, path.length(), ranges);
}

}  // namespace scenesynth::augment
