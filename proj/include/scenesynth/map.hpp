#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "scenesynth/geometry.hpp"

namespace scenesynth {

struct LaneSegment {
  std::string id;
  Polyline centerline;
  std::vector<std::string> predecessors;
  std::vector<std::string> successors;

  friend bool operator==(const LaneSegment&, const LaneSegment&) = default;
};

// Lane graph of one city region. Lanes are keyed (and iterated) by id.
struct SceneMap {
  // A successor must start within this distance of its predecessor's end.
  static constexpr double kContinuityTolerance = 0.5;

  std::string city_tag;
  std::map<std::string, LaneSegment> lanes;

  // Inserts a lane; throws ValidationError on a duplicate id.
  void add_lane(LaneSegment lane);

  std::size_t edge_count() const;

  friend bool operator==(const SceneMap&, const SceneMap&) = default;
};

// Throws ValidationError on dangling connectivity or a successor that does
// not start near its predecessor's end.
void validate_map(const SceneMap& map);

// Line-oriented map schema:
//   city <tag>
//   lane <id>
//   pt <x> <y>
//   succ <id>
//   pred <id>
// `#` starts a comment. `pt/succ/pred` rows belong to the last `lane` header.
SceneMap parse_map(std::istream& in, const std::string& source = "<map>");
SceneMap load_map(const std::string& path);
void write_map(std::ostream& out, const SceneMap& map);
void save_map(const std::string& path, const SceneMap& map);

}  // namespace scenesynth
