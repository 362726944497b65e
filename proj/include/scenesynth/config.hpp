#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenesynth/synthesis.hpp"

namespace scenesynth {

struct MapSource {
  std::vector<std::string> files;  // lane-schema map files; empty -> fixtures
  std::string fixture = "city";
  int fixture_count = 4;
  std::uint64_t fixture_seed = 7;
};

struct MaskOptions {
  std::string task = "combined";  // map | traj | combined
  double map_fraction = 0.7;
  double map_ratio = 0.5;
  std::uint64_t seed = 0;
};

struct AnalysisOptions {
  double speed_bin_width = 0.5;
  double speed_max = 30.0;
  int heading_bins = 72;
  double miss_threshold = 2.0;
};

// Full batch configuration. Loaded from JSON; every key is optional and
// unknown keys are rejected. See docs/config.md for the key reference.
struct RunConfig {
  synthesis::GenerationConfig generation;
  MapSource maps;
  int workers = 1;
  MaskOptions mask;
  AnalysisOptions analysis;

  void validate() const;
};

// Throws ConfigError naming the offending key.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

// Generation settings that determine dataset bytes (no output_dir, no
// worker count); echoed into every manifest.
nlohmann::json generation_config_echo(const synthesis::GenerationConfig& cfg);

std::vector<SceneMap> load_maps(const MapSource& source);

}  // namespace scenesynth
