#include "scenesynth/geometry.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"

namespace scenesynth {

Polyline::Polyline(std::vector<Point2> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw ValidationError(fmt::format("polyline needs at least 2 points, got {}", points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!is_finite(points_[i])) {
      throw ValidationError(fmt::format("polyline point {} is not finite", i));
    }
    if (i > 0 && distance(points_[i - 1], points_[i]) <= kMinSpacing) {
      throw ValidationError(fmt::format("polyline points {} and {} coincide", i - 1, i));
    }
  }
}

std::vector<double> Polyline::cumulative_length() const {
  std::vector<double> cum(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cum[i] = cum[i - 1] + distance(points_[i - 1], points_[i]);
  }
  return cum;
}

double Polyline::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) total += distance(points_[i - 1], points_[i]);
  return total;
}

Point2 Polyline::point_at(double s) const {
  if (s <= 0.0) return points_.front();
  double acc = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double seg = distance(points_[i - 1], points_[i]);
    if (s <= acc + seg) return lerp(points_[i - 1], points_[i], (s - acc) / seg);
    acc += seg;
  }
  return points_.back();
}

Polyline resample_polyline(const Polyline& line, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw DomainError(fmt::format("resample spacing must be positive, got {}", spacing));
  }
  const auto pts = line.points();
  const std::vector<double> cum = line.cumulative_length();
  const double total = cum.back();

  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(total / spacing) + 2);
  out.push_back(pts.front());

  std::size_t seg = 1;
  for (std::size_t k = 1;; ++k) {
    const double s = static_cast<double>(k) * spacing;
    if (s >= total - Polyline::kMinSpacing) break;
    while (cum[seg] < s) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    out.push_back(lerp(pts[seg - 1], pts[seg], (s - cum[seg - 1]) / len));
  }
  out.push_back(pts.back());
  return Polyline(std::move(out));
}

double menger_curvature(Point2 a, Point2 b, Point2 c) {
  const double ab = distance(a, b);
  const double bc = distance(b, c);
  const double ca = distance(c, a);
  const double denom = ab * bc * ca;
  if (denom == 0.0) return 0.0;
  // 4 * signed triangle area / product of side lengths.
  return 2.0 * cross(b - a, c - a) / denom;
}

std::vector<double> curvature_profile(const Polyline& line) {
  if (line.size() < 3) {
    throw DomainError(fmt::format("curvature needs at least 3 points, got {}", line.size()));
  }
  const auto pts = line.points();
  std::vector<double> kappa(pts.size(), 0.0);
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    kappa[i] = menger_curvature(pts[i - 1], pts[i], pts[i + 1]);
  }
  kappa.front() = kappa[1];
  kappa.back() = kappa[pts.size() - 2];
  return kappa;
}

}  // namespace scenesynth
