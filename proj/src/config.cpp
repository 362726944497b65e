#include "scenesynth/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"
#include "scenesynth/map_fixtures.hpp"

namespace scenesynth {
namespace {

using nlohmann::json;

// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError(fmt::format("{}: expected an object", name("")));
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(fmt::format("{}: wrong type", name(key)));
    }
  }

  void get_optional(const std::string& key, std::optional<double>& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return;
    if (!it->is_number()) throw ConfigError(fmt::format("{}: wrong type", name(key)));
    out = it->get<double>();
  }

  // Returns nullptr when the key is absent.
  const json* child(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string name(const std::string& key) const {
    if (prefix_.empty()) return key;
    return key.empty() ? prefix_ : prefix_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError(fmt::format("{}: unknown key", name(key)));
    }
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void read_planner(const json& doc, planner::PlannerParams& p) {
  ObjectReader r(doc, "planner");
  r.get("actions", p.action_set);
  r.get("dt", p.dt);
  r.get("w_accel", p.w_accel);
  r.get("w_curvature", p.w_curvature);
  r.get("w_speed", p.w_speed);
  r.get("horizon", p.horizon);
  r.get("abs_curvature", p.abs_curvature);
  r.get("s_resolution", p.s_resolution);
  r.get("v_resolution", p.v_resolution);
  r.finish();
}

void read_refinement(const json& doc, refine::RefinementParams& p) {
  ObjectReader r(doc, "refinement");
  r.get("w_accel", p.w_accel);
  r.get("w_jerk", p.w_jerk);
  r.get("w_track", p.w_track);
  r.get("dt_fine", p.dt_fine);
  r.get("substeps", p.substeps);
  r.get("regularization", p.regularization);
  r.finish();
}

void read_augment(const json& doc, augment::AugmentRanges& a) {
  ObjectReader r(doc, "augment");
  r.get("onset", a.onset);
  r.get("alpha1_min", a.magnitude_min);
  r.get("alpha1_max", a.magnitude_max);
  r.get("alpha2", a.exponent);
  r.get("turn_length", a.turn_length);
  r.get("turn_spacing", a.turn_spacing);
  r.get_optional("max_slope", a.max_slope);
  r.finish();
}

void read_range(const json& doc, const std::string& name, const char* lo_key, const char* hi_key, double& lo,
                double& hi) {
  ObjectReader r(doc, name);
  r.get(lo_key, lo);
  r.get(hi_key, hi);
  r.finish();
}

}  // namespace

void RunConfig::validate() const {
  generation.validate();
  if (workers < 1) throw ConfigError("workers: must be >= 1");
  if (maps.files.empty() && maps.fixture_count < 1) throw ConfigError("maps.fixture_count: must be >= 1");
  if (mask.task != "map" && mask.task != "traj" && mask.task != "combined") {
    throw ConfigError(fmt::format("mask.task: must be map, traj or combined, got '{}'", mask.task));
  }
  if (!(mask.map_fraction >= 0.0 && mask.map_fraction <= 1.0)) throw ConfigError("mask.map_fraction: must lie in [0, 1]");
  if (!(mask.map_ratio > 0.0 && mask.map_ratio <= 1.0)) throw ConfigError("mask.map_ratio: must lie in (0, 1]");
  if (!(analysis.speed_bin_width > 0.0 && analysis.speed_max > analysis.speed_bin_width)) {
    throw ConfigError("analysis.speed_bin_width: needs 0 < width < speed_max");
  }
  if (analysis.heading_bins < 1) throw ConfigError("analysis.heading_bins: must be >= 1");
  if (!(analysis.miss_threshold >= 0.0)) throw ConfigError("analysis.miss_threshold: must be >= 0");
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  auto& g = cfg.generation;
  ObjectReader r(doc, "");
  r.get("seed", g.seed);
  r.get("n_scenes", g.n_scenes);
  r.get("augmented_fraction", g.augmented_fraction);
  r.get("crop_radius", g.crop_radius);
  r.get("path_spacing", g.path_spacing);
  r.get("max_attempts", g.max_attempts);
  r.get("output_dir", g.output_dir);
  r.get("workers", cfg.workers);
  if (const json* c = r.child("desired_speed")) {
    read_range(*c, "desired_speed", "min", "max", g.desired_speed_min, g.desired_speed_max);
  }
  if (const json* c = r.child("initial_speed_factor")) {
    read_range(*c, "initial_speed_factor", "lo", "hi", g.initial_speed_lo, g.initial_speed_hi);
  }
  if (const json* c = r.child("planner")) read_planner(*c, g.planner);
  if (const json* c = r.child("refinement")) read_refinement(*c, g.refinement);
  if (const json* c = r.child("augment")) read_augment(*c, g.augment);
  if (const json* c = r.child("maps")) {
    ObjectReader m(*c, "maps");
    m.get("files", cfg.maps.files);
    m.get("fixture", cfg.maps.fixture);
    m.get("fixture_count", cfg.maps.fixture_count);
    m.get("fixture_seed", cfg.maps.fixture_seed);
    m.finish();
  }
  if (const json* c = r.child("mask")) {
    ObjectReader m(*c, "mask");
    m.get("task", cfg.mask.task);
    m.get("map_fraction", cfg.mask.map_fraction);
    m.get("map_ratio", cfg.mask.map_ratio);
    m.get("seed", cfg.mask.seed);
    m.finish();
  }
  if (const json* c = r.child("analysis")) {
    ObjectReader a(*c, "analysis");
    a.get("speed_bin_width", cfg.analysis.speed_bin_width);
    a.get("speed_max", cfg.analysis.speed_max);
    a.get("heading_bins", cfg.analysis.heading_bins);
    a.get("miss_threshold", cfg.analysis.miss_threshold);
    a.finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return run_config_from_json(doc);
}

json generation_config_echo(const synthesis::GenerationConfig& g) {
  json augment = {{"onset", g.augment.onset},
                  {"alpha1_min", g.augment.magnitude_min},
                  {"alpha1_max", g.augment.magnitude_max},
                  {"alpha2", g.augment.exponent},
                  {"turn_length", g.augment.turn_length},
                  {"turn_spacing", g.augment.turn_spacing}};
  augment["max_slope"] = g.augment.max_slope ? json(*g.augment.max_slope) : json(nullptr);
  return {
      {"seed", g.seed},
      {"n_scenes", g.n_scenes},
      {"augmented_fraction", g.augmented_fraction},
      {"crop_radius", g.crop_radius},
      {"path_spacing", g.path_spacing},
      {"max_attempts", g.max_attempts},
      {"desired_speed", {{"min", g.desired_speed_min}, {"max", g.desired_speed_max}}},
      {"initial_speed_factor", {{"lo", g.initial_speed_lo}, {"hi", g.initial_speed_hi}}},
      {"planner",
       {{"actions", g.planner.action_set},
        {"dt", g.planner.dt},
        {"w_accel", g.planner.w_accel},
        {"w_curvature", g.planner.w_curvature},
        {"w_speed", g.planner.w_speed},
        {"horizon", g.planner.horizon},
        {"abs_curvature", g.planner.abs_curvature},
        {"s_resolution", g.planner.s_resolution},
        {"v_resolution", g.planner.v_resolution}}},
      {"refinement",
       {{"w_accel", g.refinement.w_accel},
        {"w_jerk", g.refinement.w_jerk},
        {"w_track", g.refinement.w_track},
        {"dt_fine", g.refinement.dt_fine},
        {"substeps", g.refinement.substeps},
        {"regularization", g.refinement.regularization}}},
      {"augment", augment},
  };
}

json to_json(const RunConfig& cfg) {
  json doc = generation_config_echo(cfg.generation);
  doc["output_dir"] = cfg.generation.output_dir;
  doc["workers"] = cfg.workers;
  doc["maps"] = {{"files", cfg.maps.files},
                 {"fixture", cfg.maps.fixture},
                 {"fixture_count", cfg.maps.fixture_count},
                 {"fixture_seed", cfg.maps.fixture_seed}};
  doc["mask"] = {{"task", cfg.mask.task},
                 {"map_fraction", cfg.mask.map_fraction},
                 {"map_ratio", cfg.mask.map_ratio},
                 {"seed", cfg.mask.seed}};
  doc["analysis"] = {{"speed_bin_width", cfg.analysis.speed_bin_width},
                     {"speed_max", cfg.analysis.speed_max},
                     {"heading_bins", cfg.analysis.heading_bins},
                     {"miss_threshold", cfg.analysis.miss_threshold}};
  return doc;
}

std::vector<SceneMap> load_maps(const MapSource& source) {
  std::vector<SceneMap> maps;
  if (!source.files.empty()) {
    for (const auto& f : source.files) maps.push_back(load_map(f));
    return maps;
  }
  for (int i = 0; i < source.fixture_count; ++i) {
    maps.push_back(generate_map_fixture(source.fixture, source.fixture_seed + static_cast<std::uint64_t>(i)));
  }
  return maps;
}

}  // namespace scenesynth
