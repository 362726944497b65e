#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"
#include "scenesynth/scene.hpp"
#include "scenesynth/text_util.hpp"

namespace scenesynth {
namespace {

constexpr const char* kColumns = "TIMESTAMP,TRACK_ID,OBJECT_TYPE,X,Y,CITY_NAME";
constexpr const char* kTrackId = "ego";
constexpr int kFormatVersion = 1;

std::vector<double> sample_speeds(const Scene& scene) {
  std::vector<double> v;
  for (std::size_t i = 1; i < scene.trajectory.size(); ++i) {
    const auto& a = scene.trajectory[i - 1];
    const auto& b = scene.trajectory[i];
    v.push_back(distance(a.pos, b.pos) / (b.t - a.t));
  }
  return v;
}

}  // namespace

void check_scene_invariants(const Scene& scene) {
  const auto& traj = scene.trajectory;
  if (traj.size() != kSceneSamples) {
    throw ValidationError(fmt::format("scene '{}' has {} samples, expected {}", scene.scene_id, traj.size(),
                                      kSceneSamples));
  }
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (!is_finite(traj[i].pos) || !std::isfinite(traj[i].t)) {
      throw ValidationError(fmt::format("scene '{}' sample {} is not finite", scene.scene_id, i));
    }
    const double expected = traj[0].t + static_cast<double>(i) * kSampleInterval;
    if (std::abs(traj[i].t - expected) > 1e-6) {
      throw ValidationError(fmt::format("scene '{}' sample {} has timestamp {} (expected {:.1f} s spacing)",
                                        scene.scene_id, i, traj[i].t, kSampleInterval));
    }
  }
  const double radius = scene.metadata.crop_radius;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (distance(traj[i].pos, scene.metadata.crop_center) > radius + 1e-9) {
      throw ValidationError(
          fmt::format("scene '{}' sample {} lies outside the {} m crop", scene.scene_id, i, radius));
    }
  }
}

std::vector<std::string> scene_violations(const Scene& scene) {
  std::vector<std::string> out;
  try {
    check_scene_invariants(scene);
    validate_map(scene.map_crop);
  } catch (const Error& e) {
    out.emplace_back(e.what());
    return out;
  }
  const auto speeds = sample_speeds(scene);
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    if (!(speeds[i] >= 0.0 && speeds[i] <= kMaxSceneSpeed)) {
      out.push_back(fmt::format("speed {:.3f} m/s at sample {} outside [0, {}]", speeds[i], i + 1, kMaxSceneSpeed));
    }
  }
  for (std::size_t i = 1; i < speeds.size(); ++i) {
    const double a = (speeds[i] - speeds[i - 1]) / kSampleInterval;
    if (!(a >= kMinSceneAccel && a <= kMaxSceneAccel)) {
      out.push_back(fmt::format("acceleration {:.3f} m/s^2 at sample {} outside [{}, {}]", a, i + 1,
                                kMinSceneAccel, kMaxSceneAccel));
    }
  }
  return out;
}

void write_scene(std::ostream& out, const Scene& scene) {
  const SceneMetadata& m = scene.metadata;
  out << fmt::format("# scene_format: {}\n", kFormatVersion);
  out << fmt::format("# scene_id: {}\n", scene.scene_id);
  out << fmt::format("# city: {}\n", scene.city_tag);
  out << fmt::format("# history_samples: {}\n", kHistorySamples);
  out << fmt::format("# augmented: {}\n", m.augmented ? 1 : 0);
  if (m.transform) {
    const auto& p = *m.transform;
    out << fmt::format("# transform.kind: {}\n", augment::to_string(p.kind));
    out << fmt::format("# transform.onset: {}\n", p.onset);
    out << fmt::format("# transform.alpha1: {}\n", p.magnitude);
    out << fmt::format("# transform.alpha2: {}\n", p.exponent);
    out << fmt::format("# transform.turn_length: {}\n", p.turn_length);
    out << fmt::format("# transform.turn_spacing: {}\n", p.turn_spacing);
    out << fmt::format("# transform.frame_x: {}\n", p.frame.origin.x);
    out << fmt::format("# transform.frame_y: {}\n", p.frame.origin.y);
    out << fmt::format("# transform.frame_heading: {}\n", p.frame.heading);
  }
  out << fmt::format("# planner_seed: {}\n", m.planner_seed);
  out << fmt::format("# desired_speed: {}\n", m.desired_speed);
  out << fmt::format("# initial_speed: {}\n", m.initial_speed);
  out << fmt::format("# plan_cost: {}\n", m.plan_cost);
  out << fmt::format("# crop_center_x: {}\n", m.crop_center.x);
  out << fmt::format("# crop_center_y: {}\n", m.crop_center.y);
  out << fmt::format("# crop_radius: {}\n", m.crop_radius);
  std::ostringstream map_text;
  write_map(map_text, scene.map_crop);
  std::istringstream lines(map_text.str());
  for (std::string line; std::getline(lines, line);) out << "#| " << line << '\n';
  out << kColumns << '\n';
  for (const auto& s : scene.trajectory) {
    out << fmt::format("{:.9f},{},AGENT,{:.9f},{:.9f},{}\n", s.t, kTrackId, s.pos.x, s.pos.y, scene.city_tag);
  }
}

std::string scene_to_string(const Scene& scene) {
  std::ostringstream out;
  write_scene(out, scene);
  return out.str();
}

void save_scene(const std::string& path, const Scene& scene) { write_file_atomic(path, scene_to_string(scene)); }

Scene parse_scene(std::istream& in, const std::string& source) {
  Scene scene;
  std::map<std::string, std::pair<std::string, std::size_t>> header;
  std::ostringstream map_text;
  std::vector<std::pair<std::string, std::size_t>> row_cities;
  bool seen_columns = false;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    if (raw.rfind("#|", 0) == 0) {
      map_text << (raw.size() > 3 ? raw.substr(3) : std::string()) << '\n';
      continue;
    }
    if (raw[0] == '#') {
      const auto colon = raw.find(':');
      if (colon == std::string::npos) throw ParseError(source, line_no, "header line without ':'");
      header[std::string(trim(std::string_view(raw).substr(1, colon - 1)))] = {
          std::string(trim(std::string_view(raw).substr(colon + 1))), line_no};
      continue;
    }
    if (!seen_columns) {
      if (raw != kColumns) throw ParseError(source, line_no, fmt::format("expected column line '{}'", kColumns));
      seen_columns = true;
      continue;
    }
    const auto cols = split(raw, ',');
    if (cols.size() != 6) throw ParseError(source, line_no, fmt::format("expected 6 columns, got {}", cols.size()));
    const auto t = parse_double(cols[0]);
    const auto x = parse_double(cols[3]);
    const auto y = parse_double(cols[4]);
    if (!t || !x || !y) throw ParseError(source, line_no, "non-numeric TIMESTAMP, X or Y");
    if (cols[2] != "AGENT") throw ParseError(source, line_no, fmt::format("OBJECT_TYPE '{}' is not AGENT", cols[2]));
    if (cols[1] != kTrackId) throw ParseError(source, line_no, fmt::format("unexpected TRACK_ID '{}'", cols[1]));
    scene.trajectory.push_back({*t, {*x, *y}});
    row_cities.emplace_back(cols[5], line_no);
  }
  if (!seen_columns) throw ParseError(source, line_no, "missing column line");

  auto text = [&](const std::string& key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end()) throw ParseError(source, 0, fmt::format("missing header key '{}'", key));
    return it->second.first;
  };
  auto number = [&](const std::string& key) {
    const auto value = parse_double(text(key));
    if (!value) throw ParseError(source, header.at(key).second, fmt::format("header '{}' is not a number", key));
    return *value;
  };

  const auto version = parse_int(text("scene_format"));
  if (!version || *version != kFormatVersion) {
    throw ParseError(source, header.at("scene_format").second, "unsupported scene_format");
  }
  scene.scene_id = text("scene_id");
  scene.city_tag = text("city");
  for (const auto& [city, row] : row_cities) {
    if (city != scene.city_tag) {
      throw ParseError(source, row, fmt::format("CITY_NAME '{}' differs from header city '{}'", city, scene.city_tag));
    }
  }
  SceneMetadata& m = scene.metadata;
  m.augmented = text("augmented") == "1";
  if (header.contains("transform.kind")) {
    augment::TurnTransformParams p;
    p.kind = augment::turn_kind_from_string(text("transform.kind"));
    p.onset = number("transform.onset");
    p.magnitude = number("transform.alpha1");
    p.exponent = number("transform.alpha2");
    p.turn_length = number("transform.turn_length");
    p.turn_spacing = number("transform.turn_spacing");
    p.frame.origin = {number("transform.frame_x"), number("transform.frame_y")};
    p.frame.heading = number("transform.frame_heading");
    m.transform = p;
  }
  const auto seed = parse_uint(text("planner_seed"));
  if (!seed) throw ParseError(source, header.at("planner_seed").second, "planner_seed is not an unsigned integer");
  m.planner_seed = *seed;
  m.desired_speed = number("desired_speed");
  m.initial_speed = number("initial_speed");
  m.plan_cost = number("plan_cost");
  m.crop_center = {number("crop_center_x"), number("crop_center_y")};
  m.crop_radius = number("crop_radius");

  std::istringstream map_in(map_text.str());
  scene.map_crop = parse_map(map_in, source + " (map block)");

  check_scene_invariants(scene);
  return scene;
}

Scene read_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open scene file '{}'", path));
  return parse_scene(in, path);
}

std::string scene_file_name(const std::string& scene_id) { return fmt::format("scene_{}.csv", scene_id); }

}  // namespace scenesynth
