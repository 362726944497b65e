#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scenesynth/augment.hpp"
#include "scenesynth/planner.hpp"
#include "scenesynth/refine.hpp"
#include "scenesynth/rng.hpp"
#include "scenesynth/scene.hpp"

namespace scenesynth::synthesis {

// 165k of the 370k published scenes were generated on augmented maps.
inline constexpr double kDefaultAugmentedFraction = 165.0 / 370.0;

struct GenerationConfig {
  std::uint64_t seed = 0;
  std::size_t n_scenes = 100;
  double augmented_fraction = kDefaultAugmentedFraction;
  double crop_radius = 100.0;
  double desired_speed_min = 6.0;
  double desired_speed_max = 15.0;
  // v0 ~ U[lo * v_d, hi * v_d], clamped to >= 0.
  double initial_speed_lo = 0.8;
  double initial_speed_hi = 1.2;
  double path_spacing = 0.25;
  int max_attempts = 5;
  // Planner template; desired_speed is overwritten per scene.
  planner::PlannerParams planner;
  refine::RefinementParams refinement;
  augment::AugmentRanges augment;
  std::string output_dir = "scenes";

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Lanes with at least one point inside the disc. Each kept lane is trimmed to
// the span between its first and last inside points; an edge survives only
// when both lanes keep the shared junction point.
SceneMap crop_map(const SceneMap& map, Point2 center, double radius);

// One scene on `map`: optional warp (probability augmented_fraction), a
// random reference path, sampled v_d and v0, plan, refinement, crop.
// Throws PlanningFailure / PathOverrunError / DomainError on failure.
Scene generate_scene(const SceneMap& map, Rng& rng, const GenerationConfig& cfg, const std::string& scene_id);
// Same, with the augmentation decision made by the caller.
Scene generate_scene(const SceneMap& map, Rng& rng, const GenerationConfig& cfg, const std::string& scene_id,
                     bool augmented);

struct SceneOutcome {
  std::string scene_id;
  std::string file;
  bool written = false;
  bool reused = false;  // already present on disk
  bool augmented = false;
  std::string city;
  int attempts = 0;
  std::string failure;
};

struct DatasetManifest {
  std::vector<SceneOutcome> scenes;
  std::size_t original = 0;
  std::size_t augmented = 0;
  std::map<std::string, std::size_t> per_city;
  std::string path;
};

// Scene for (seed, index), retrying with fresh attempt sub-seeds. Whether
// the scene is augmented is fixed per index; the map is drawn per attempt.
SceneOutcome generate_indexed_scene(std::span<const SceneMap> maps, const GenerationConfig& cfg, std::size_t index,
                                    Scene* scene_out);

std::string scene_id_for(std::size_t index);

// Writes cfg.n_scenes scene files and manifest.json into cfg.output_dir.
// Existing scene files are kept (resume). Output is independent of
// `workers`. One log line per scene goes to `log` when non-null.
DatasetManifest generate_dataset(std::span<const SceneMap> maps, const GenerationConfig& cfg, int workers = 1,
                                 std::ostream* log = nullptr);

inline constexpr const char* kManifestName = "manifest.json";

}  // namespace scenesynth::synthesis
