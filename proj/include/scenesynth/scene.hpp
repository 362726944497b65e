#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scenesynth/augment.hpp"
#include "scenesynth/geometry.hpp"
#include "scenesynth/map.hpp"
#include "scenesynth/planner.hpp"

namespace scenesynth {

inline constexpr std::size_t kSceneSamples = 50;
inline constexpr std::size_t kHistorySamples = 20;
inline constexpr double kSampleInterval = 0.1;

struct SceneMetadata {
  bool augmented = false;
  std::optional<augment::TurnTransformParams> transform;
  std::uint64_t planner_seed = 0;
  double desired_speed = 0.0;
  double initial_speed = 0.0;
  double plan_cost = 0.0;
  Point2 crop_center;
  double crop_radius = 0.0;

  friend bool operator==(const SceneMetadata&, const SceneMetadata&) = default;
};

// One synthetic single-agent record: 50 samples at 10 Hz, the first 20 of
// which are history.
struct Scene {
  std::string scene_id;
  std::string city_tag;
  SceneMap map_crop;
  std::vector<planner::TimedPoint> trajectory;
  SceneMetadata metadata;

  static bool is_history(std::size_t sample) { return sample < kHistorySamples; }
};

// Structural invariants only (sample count, uniform timestamps, finite
// points, crop containment). Throws ValidationError.
void check_scene_invariants(const Scene& scene);

// Every invariant plus kinematic sanity: finite-difference speeds in
// [0, 25] m/s and accelerations in [-5, 3] m/s^2. Returns one message per
// violation; empty means valid.
std::vector<std::string> scene_violations(const Scene& scene);

inline constexpr double kMaxSceneSpeed = 25.0;
inline constexpr double kMinSceneAccel = -5.0;
inline constexpr double kMaxSceneAccel = 3.0;

// Scene file: a `# key: value` header (metadata, then the map crop in the
// lane schema on `#| ` lines), the CSV column line, and one row per sample:
//   TIMESTAMP,TRACK_ID,OBJECT_TYPE,X,Y,CITY_NAME
// with OBJECT_TYPE = AGENT and coordinates to 9 decimal places.
void write_scene(std::ostream& out, const Scene& scene);
std::string scene_to_string(const Scene& scene);
void save_scene(const std::string& path, const Scene& scene);

// Throws ParseError (with line number) on malformed input and
// ValidationError when the record breaks a scene invariant.
Scene parse_scene(std::istream& in, const std::string& source = "<scene>");
Scene read_scene(const std::string& path);

std::string scene_file_name(const std::string& scene_id);

}  // namespace scenesynth
