#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace scenesynth {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double k, Point2 p) { return {k * p.x, k * p.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline Point2 lerp(Point2 a, Point2 b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

// Rotation by `angle` radians about the origin.
inline Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// Planar pose used as the anchor frame of a map warp.
struct Pose2 {
  Point2 origin;
  double heading = 0.0;

  Point2 to_local(Point2 world) const { return rotate(world - origin, -heading); }
  Point2 to_world(Point2 local) const { return rotate(local, heading) + origin; }

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// Ordered point sequence with at least two points and no coincident
// neighbours. Construction validates; the members are read-only afterwards.
class Polyline {
 public:
  static constexpr double kMinSpacing = 1e-9;

  Polyline() = default;
  explicit Polyline(std::vector<Point2> points);

  std::span<const Point2> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  const Point2& front() const { return points_.front(); }
  const Point2& back() const { return points_.back(); }

  // Cumulative arc-length at each vertex, starting at 0.
  std::vector<double> cumulative_length() const;
  double length() const;

  // Point at arc-length s, clamped to [0, length()].
  Point2 point_at(double s) const;

  friend bool operator==(const Polyline&, const Polyline&) = default;

 private:
  std::vector<Point2> points_;
};

// Points spaced `spacing` apart in arc-length along `line`; the final point is
// always the input endpoint, so only the last gap may be shorter. A polyline
// shorter than `spacing` resamples to its two endpoints.
Polyline resample_polyline(const Polyline& line, double spacing);

// Three-point circumscribed-circle curvature at each interior vertex (signed,
// left turns positive); endpoints copy their neighbour. Requires >= 3 points.
std::vector<double> curvature_profile(const Polyline& line);

// Signed Menger curvature of the triangle (a, b, c). Collinear -> 0.
double menger_curvature(Point2 a, Point2 b, Point2 c);

}  // namespace scenesynth
