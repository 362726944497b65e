#pragma once

#include <optional>
#include <string>

#include "scenesynth/geometry.hpp"
#include "scenesynth/map.hpp"
#include "scenesynth/reference_path.hpp"
#include "scenesynth/rng.hpp"

namespace scenesynth::augment {

enum class TurnKind { SingleTurn, DoubleTurn };

std::string to_string(TurnKind kind);
TurnKind turn_kind_from_string(const std::string& name);

// Lateral warp y -> y + f(x - onset) applied in `frame`, where f is a single
// turn (power-law ramp of length turn_length joined C1 to a straight line) or
// a double turn (a single turn minus the same turn delayed by turn_spacing).
struct TurnTransformParams {
  TurnKind kind = TurnKind::SingleTurn;
  double onset = 10.0;         // b: frame-local x where the warp starts
  double magnitude = 1.0;      // alpha1, lateral offset reached at the end of the ramp
  double exponent = 20.0;      // alpha2, ramp sharpness
  double turn_length = 10.0;   // s_t
  double turn_spacing = 20.0;  // beta, DoubleTurn only
  Pose2 frame;

  // Throws DomainError when a field is out of range.
  void validate() const;
  // Slope of the straight branch after the ramp, alpha1 * alpha2 / s_t.
  double exit_slope() const { return magnitude * exponent / turn_length; }

  friend bool operator==(const TurnTransformParams&, const TurnTransformParams&) = default;
};

// Ramp alpha1 / s_t^alpha2 * x^alpha2 on 0 <= x <= s_t.
double q_alpha(double x, double alpha1, double alpha2, double turn_length);

double f_single_turn(double x, const TurnTransformParams& p);
double f_double_turn(double x, const TurnTransformParams& p);
// Dispatches on p.kind.
double warp_offset(double x, const TurnTransformParams& p);

Point2 warp_point(Point2 world, const TurnTransformParams& p);

// Warps every lane point; ids, connectivity and point counts are unchanged.
SceneMap apply_transform(const SceneMap& map, const TurnTransformParams& p);

// Inserts collinear points into segments that cross a ramp so that, once
// warped, no step there is longer than about `max_step`. With the published
// exponent the ramp bends by up to ~87 degrees within two meters, far below
// typical map point spacing. The warp is affine elsewhere, so other
// segments are left alone. Geometry is unchanged before warping.
SceneMap densify_ramps(const SceneMap& map, const TurnTransformParams& p, double max_step = 0.25);

// Ranges for sampled parameters. Defaults are the published synthesis table.
struct AugmentRanges {
  double onset = 10.0;
  double magnitude_min = 1.0;
  double magnitude_max = 10.0;
  double exponent = 20.0;
  double turn_length = 10.0;
  double turn_spacing = 20.0;
  // When set, alpha1 is clamped so that exit_slope() <= max_slope (never
  // below alpha1 = 1). Unset reproduces the published ranges.
  std::optional<double> max_slope;
};

// Kind uniform over {single, double}, alpha1 uniform in its range, the frame
// anchored at a uniformly chosen path sample in [s_lo, s_hi] with the local
// path tangent as heading.
TurnTransformParams sample_transform_params(Rng& rng, const ReferencePath& path, double s_lo, double s_hi,
                                            const AugmentRanges& ranges = {});
TurnTransformParams sample_transform_params(Rng& rng, const ReferencePath& path,
                                            const AugmentRanges& ranges = {});

}  // namespace scenesynth::augment
