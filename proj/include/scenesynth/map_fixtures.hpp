#pragma once

#include <cstdint>
#include <string>

#include "scenesynth/map.hpp"

namespace scenesynth {

// Hand-shaped maps for tests and demos. Real HD maps (e.g. Argoverse vector
// maps) are converted offline to the lane schema; see docs/map_format.md.

// Two straight lanes L1 -> L2 along +x, each `lane_length` long.
SceneMap straight_two_lane_map(double lane_length = 100.0, double point_spacing = 2.0);

// Procedural city map: several multi-lane roads built from straight and
// circular-arc pieces, plus branch lanes that fork off to the right. Every
// successor starts exactly at its predecessor's end point.
SceneMap procedural_city_map(std::uint64_t seed, int road_count = 4);

// `kind` is "straight" or "city".
SceneMap generate_map_fixture(const std::string& kind, std::uint64_t seed);

}  // namespace scenesynth
