#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scenesynth/geometry.hpp"
#include "scenesynth/rng.hpp"
#include "scenesynth/scene.hpp"

namespace scenesynth::pretrain {

enum class ElementKind { Lane, Trajectory };
enum class Task { MapRecon, TrajRecon };

std::string to_string(ElementKind kind);
std::string to_string(Task task);

// Attribute columns of every vector:
//   0: timestamp of the vector's start point (trajectory; 0 for lanes)
//   1: 1 if the start point is a history sample (trajectory; 0 for lanes)
//   2: index of the vector within its polyline
inline constexpr std::size_t kAttributeWidth = 3;

struct VectorFeature {
  Point2 start;
  Point2 end;
  int polyline_id = 0;
  ElementKind kind = ElementKind::Lane;
  std::array<double, kAttributeWidth> attributes{};
  bool padding = false;  // start == end (stationary trajectory step)

  friend bool operator==(const VectorFeature&, const VectorFeature&) = default;
};

// Lanes take polyline ids 0..N-1 in lane-id order; the trajectory takes N.
struct VectorizedScene {
  std::string scene_id;
  std::vector<VectorFeature> vectors;
  std::vector<std::string> lane_ids;
  int trajectory_id = -1;
};

VectorizedScene vectorize_scene(const Scene& scene);

// Rebuilds each polyline's points from its consecutive vectors.
std::map<int, std::vector<Point2>> reassemble_polylines(std::span<const VectorFeature> vectors);

struct MaskPlaceholder {
  int polyline_id = 0;
  ElementKind kind = ElementKind::Lane;
  Point2 first_point;

  friend bool operator==(const MaskPlaceholder&, const MaskPlaceholder&) = default;
};

struct TargetPolyline {
  int polyline_id = 0;
  ElementKind kind = ElementKind::Lane;
  std::vector<Point2> points;

  friend bool operator==(const TargetPolyline&, const TargetPolyline&) = default;
};

// Visible vectors and masked-element placeholders are kept apart so that a
// trainer decides itself how mask tokens enter the network.
struct PretrainSample {
  std::string scene_id;
  Task task = Task::MapRecon;
  std::vector<VectorFeature> visible;
  std::vector<MaskPlaceholder> masked_placeholders;
  std::vector<TargetPolyline> targets;

  std::vector<int> masked_ids() const;
  friend bool operator==(const PretrainSample&, const PretrainSample&) = default;
};

// round_half_up(ratio * lanes)
std::size_t mask_count(std::size_t lanes, double ratio);

// Masks round_half_up(ratio * N) lane polylines chosen uniformly; the
// trajectory stays visible. Needs >= 2 lanes.
PretrainSample mask_map(const VectorizedScene& scene, double ratio, Rng& rng);

// Masks the single trajectory polyline; lanes stay visible.
PretrainSample mask_trajectory(const VectorizedScene& scene);

// Independent draw per scene: MapRecon with probability map_fraction.
std::vector<Task> draw_tasks(std::size_t n, double map_fraction, Rng& rng);

// A scene drawn for MapRecon that has fewer than two lanes (a crop of one
// long lane, say) falls back to TrajRecon instead of failing the batch.
PretrainSample assign_task(const VectorizedScene& scene, double map_fraction, double map_ratio, Rng& rng);

// One rng per batch (and per epoch, so scenes can change task between
// epochs): tasks are drawn first, then the map masks.
std::vector<PretrainSample> assign_tasks(std::span<const VectorizedScene> batch, double map_fraction, Rng& rng,
                                         double map_ratio = 0.5);

// Mean over points of |dx| + |dy|.
double map_recon_loss(std::span<const Point2> pred, std::span<const Point2> target);

inline constexpr std::size_t kTrajectoryModes = 6;
inline constexpr double kModeRegularizationWeight = 0.05;

struct TrajReconLoss {
  double loss = 0.0;
  std::size_t best_mode = 0;
  std::array<double, kTrajectoryModes> mode_losses{};
};

// Best-mode L1 plus reg_weight times the mean L1 of the other five modes.
// Ties pick the lowest mode index.
TrajReconLoss traj_recon_loss(std::span<const std::vector<Point2>> preds, std::span<const Point2> target,
                              double reg_weight = kModeRegularizationWeight);

// Sample file (format version 1):
//   # sample_format: 1
//   # scene_id: <id>
//   # task: MapRecon | TrajRecon
//   # masked: <id> <id> ...
//   # placeholder: <polyline_id> <kind> <x> <y>     (one per masked polyline)
//   kind,polyline_id,x0,y0,x1,y1,t,is_history,vector_index,padding
//   <one row per visible vector>
//   # targets
//   polyline_id,kind,point_index,x,y
//   <one row per target point>
// Numbers use the shortest round-trip decimal form, so reading is lossless.
void write_sample(std::ostream& out, const PretrainSample& sample);
std::string sample_to_string(const PretrainSample& sample);
PretrainSample parse_sample(std::istream& in, const std::string& source = "<sample>");
PretrainSample read_sample(const std::string& path);

// Throws ValidationError if the partition, first-point retention or target
// invariants do not hold.
void check_sample_invariants(const PretrainSample& sample);

}  // namespace scenesynth::pretrain
