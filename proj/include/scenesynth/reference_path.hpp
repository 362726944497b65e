#pragma once

#include <string>
#include <vector>

#include "scenesynth/geometry.hpp"
#include "scenesynth/map.hpp"
#include "scenesynth/rng.hpp"

namespace scenesynth {

// Arc-length parameterized path along connected lane centerlines.
//
// `samples` are spaced exactly `spacing` apart in arc-length of the source
// centerlines, so cum_s[i] == i * spacing. Positions between samples are
// linear interpolations of the neighbouring samples.
class ReferencePath {
 public:
  static constexpr double kDefaultSpacing = 1.0;

  ReferencePath() = default;

  // Resamples `source` at `spacing` and attaches the curvature profile. A
  // trailing partial gap is dropped to keep the sample spacing uniform.
  ReferencePath(const Polyline& source, double spacing, std::vector<std::string> lane_ids = {});

  const Polyline& samples() const { return samples_; }
  const std::vector<double>& cum_s() const { return cum_s_; }
  const std::vector<double>& kappa() const { return kappa_; }
  const std::vector<std::string>& lane_ids() const { return lane_ids_; }
  double spacing() const { return spacing_; }
  double length() const { return cum_s_.back(); }
  std::size_t size() const { return cum_s_.size(); }

  // Throws PathOverrunError when s lies outside [0, length()].
  Point2 position_at(double s) const;
  double curvature_at(double s) const;

  // Unit tangent direction (radians) of the segment leaving sample i.
  double heading_at_sample(std::size_t i) const;

 private:
  // Segment index and fraction for arc-length s.
  std::pair<std::size_t, double> locate(double s) const;

  Polyline samples_;
  std::vector<double> cum_s_;
  std::vector<double> kappa_;
  std::vector<std::string> lane_ids_;
  double spacing_ = kDefaultSpacing;
};

// Concatenation of the given lanes' centerlines, skipping the duplicated
// junction point between a lane and its successor.
Polyline concatenate_lanes(const SceneMap& map, const std::vector<std::string>& lane_ids);

// Seeded random depth-first walk over successor edges from `start_lane`
// until the accumulated length reaches `min_length`. Returns the longest
// route found when the reachable graph is shorter.
std::vector<std::string> walk_lanes(const SceneMap& map, const std::string& start_lane,
                                    double min_length, Rng& rng);

ReferencePath build_reference_path(const SceneMap& map, const std::string& start_lane,
                                   double min_length, Rng& rng,
                                   double spacing = ReferencePath::kDefaultSpacing);

// One path per seed lane, seed lanes in id order.
std::vector<ReferencePath> build_reference_paths(const SceneMap& map, double min_length, Rng& rng,
                                                 double spacing = ReferencePath::kDefaultSpacing);

struct PathProjection {
  double s = 0.0;
  double lateral = 0.0;  // left positive
  double distance = 0.0;
};

PathProjection project_to_path(Point2 pos, const ReferencePath& path);

}  // namespace scenesynth
