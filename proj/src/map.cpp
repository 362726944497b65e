#include "scenesynth/map.hpp"

#include <fmt/format.h>

#include "scenesynth/errors.hpp"

namespace scenesynth {

void SceneMap::add_lane(LaneSegment lane) {
  const std::string id = lane.id;
  if (!lanes.emplace(id, std::move(lane)).second) {
    throw ValidationError(fmt::format("duplicate lane id '{}'", id));
  }
}

std::size_t SceneMap::edge_count() const {
  std::size_t edges = 0;
  for (const auto& [id, lane] : lanes) edges += lane.successors.size();
  return edges;
}

void validate_map(const SceneMap& map) {
  for (const auto& [id, lane] : map.lanes) {
    if (id != lane.id) throw ValidationError(fmt::format("lane key '{}' != id '{}'", id, lane.id));
    for (const auto& pred : lane.predecessors) {
      if (!map.lanes.contains(pred)) {
        throw ValidationError(fmt::format("lane '{}' has dangling predecessor '{}'", id, pred));
      }
    }
    for (const auto& succ : lane.successors) {
      auto it = map.lanes.find(succ);
      if (it == map.lanes.end()) {
        throw ValidationError(fmt::format("lane '{}' has dangling successor '{}'", id, succ));
      }
      const double gap = distance(lane.centerline.back(), it->second.centerline.front());
      if (gap > SceneMap::kContinuityTolerance) {
        throw ValidationError(
            fmt::format("successor '{}' starts {:.3f} m from the end of lane '{}'", succ, gap, id));
      }
    }
  }
}

}  // namespace scenesynth
