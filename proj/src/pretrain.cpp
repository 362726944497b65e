#include "scenesynth/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"
#include "scenesynth/text_util.hpp"

namespace scenesynth::pretrain {
namespace {

constexpr int kSampleFormat = 1;
constexpr const char* kVectorColumns = "kind,polyline_id,x0,y0,x1,y1,t,is_history,vector_index,padding";
constexpr const char* kTargetColumns = "polyline_id,kind,point_index,x,y";

ElementKind kind_from_string(const std::string& s, const std::string& source, std::size_t line) {
  if (s == "lane") return ElementKind::Lane;
  if (s == "trajectory") return ElementKind::Trajectory;
  throw ParseError(source, line, fmt::format("unknown element kind '{}'", s));
}

void append_polyline(std::vector<VectorFeature>& out, std::span<const Point2> pts, int id, ElementKind kind,
                     std::span<const double> times) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    VectorFeature v;
    v.start = pts[i];
    v.end = pts[i + 1];
    v.polyline_id = id;
    v.kind = kind;
    if (kind == ElementKind::Trajectory) {
      v.attributes[0] = times[i];
      v.attributes[1] = Scene::is_history(i) ? 1.0 : 0.0;
    }
    v.attributes[2] = static_cast<double>(i);
    v.padding = v.start == v.end;
    out.push_back(v);
  }
}

PretrainSample split_sample(const VectorizedScene& scene, const std::set<int>& masked, Task task) {
  PretrainSample sample;
  sample.scene_id = scene.scene_id;
  sample.task = task;
  for (const auto& v : scene.vectors) {
    if (!masked.contains(v.polyline_id)) sample.visible.push_back(v);
  }
  const auto polylines = reassemble_polylines(scene.vectors);
  for (int id : masked) {
    const auto& pts = polylines.at(id);
    const ElementKind kind = id == scene.trajectory_id ? ElementKind::Trajectory : ElementKind::Lane;
    sample.masked_placeholders.push_back({id, kind, pts.front()});
    sample.targets.push_back({id, kind, pts});
  }
  return sample;
}

double l1_mean(std::span<const Point2> pred, std::span<const Point2> target) {
  if (pred.size() != target.size()) {
    throw DomainError(fmt::format("point count mismatch: {} predicted vs {} target", pred.size(), target.size()));
  }
  if (target.empty()) throw DomainError("reconstruction loss needs at least one point");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    total += std::abs(pred[i].x - target[i].x) + std::abs(pred[i].y - target[i].y);
  }
  return total / static_cast<double>(pred.size());
}

}  // namespace

std::string to_string(ElementKind kind) { return kind == ElementKind::Lane ? "lane" : "trajectory"; }
std::string to_string(Task task) { return task == Task::MapRecon ? "MapRecon" : "TrajRecon"; }

VectorizedScene vectorize_scene(const Scene& scene) {
  VectorizedScene out;
  out.scene_id = scene.scene_id;
  int id = 0;
  for (const auto& [lane_id, lane] : scene.map_crop.lanes) {
    append_polyline(out.vectors, lane.centerline.points(), id++, ElementKind::Lane, {});
    out.lane_ids.push_back(lane_id);
  }
  std::vector<Point2> pts;
  std::vector<double> times;
  for (const auto& s : scene.trajectory) {
    pts.push_back(s.pos);
    times.push_back(s.t);
  }
  out.trajectory_id = id;
  append_polyline(out.vectors, pts, id, ElementKind::Trajectory, times);
  return out;
}

std::map<int, std::vector<Point2>> reassemble_polylines(std::span<const VectorFeature> vectors) {
  std::map<int, std::vector<Point2>> out;
  for (const auto& v : vectors) {
    auto& pts = out[v.polyline_id];
    if (pts.empty()) pts.push_back(v.start);
    pts.push_back(v.end);
  }
  return out;
}

std::vector<int> PretrainSample::masked_ids() const {
  std::vector<int> ids;
  for (const auto& p : masked_placeholders) ids.push_back(p.polyline_id);
  return ids;
}

std::size_t mask_count(std::size_t lanes, double ratio) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(lanes) + 0.5));
}

PretrainSample mask_map(const VectorizedScene& scene, double ratio, Rng& rng) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw DomainError(fmt::format("mask ratio {} outside (0, 1]", ratio));
  std::vector<int> lanes;
  for (const auto& v : scene.vectors) {
    if (v.kind == ElementKind::Lane && (lanes.empty() || lanes.back() != v.polyline_id)) {
      lanes.push_back(v.polyline_id);
    }
  }
  lanes.erase(std::unique(lanes.begin(), lanes.end()), lanes.end());
  if (lanes.size() < 2) {
    throw DomainError(fmt::format("scene '{}' has {} lane(s); map masking needs at least 2", scene.scene_id,
                                  lanes.size()));
  }
  rng.shuffle(lanes);
  const std::set<int> masked(lanes.begin(), lanes.begin() + static_cast<std::ptrdiff_t>(mask_count(lanes.size(), ratio)));
  return split_sample(scene, masked, Task::MapRecon);
}

PretrainSample mask_trajectory(const VectorizedScene& scene) {
  std::set<int> trajectories;
  for (const auto& v : scene.vectors) {
    if (v.kind == ElementKind::Trajectory) trajectories.insert(v.polyline_id);
  }
  if (trajectories.size() != 1) {
    throw DomainError(fmt::format("scene '{}' has {} trajectories; trajectory masking needs exactly one",
                                  scene.scene_id, trajectories.size()));
  }
  return split_sample(scene, trajectories, Task::TrajRecon);
}

std::vector<Task> draw_tasks(std::size_t n, double map_fraction, Rng& rng) {
  if (!(map_fraction >= 0.0 && map_fraction <= 1.0)) {
    throw DomainError(fmt::format("map fraction {} outside [0, 1]", map_fraction));
  }
  std::vector<Task> tasks(n);
  for (auto& t : tasks) t = rng.uniform() < map_fraction ? Task::MapRecon : Task::TrajRecon;
  return tasks;
}

namespace {

PretrainSample mask_for(Task task, const VectorizedScene& scene, double map_ratio, Rng& rng) {
  if (task == Task::MapRecon && scene.lane_ids.size() >= 2) return mask_map(scene, map_ratio, rng);
  return mask_trajectory(scene);
}

}  // namespace

PretrainSample assign_task(const VectorizedScene& scene, double map_fraction, double map_ratio, Rng& rng) {
  return mask_for(draw_tasks(1, map_fraction, rng).front(), scene, map_ratio, rng);
}

std::vector<PretrainSample> assign_tasks(std::span<const VectorizedScene> batch, double map_fraction, Rng& rng,
                                         double map_ratio) {
  const auto tasks = draw_tasks(batch.size(), map_fraction, rng);
  std::vector<PretrainSample> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.push_back(mask_for(tasks[i], batch[i], map_ratio, rng));
  }
  return out;
}

double map_recon_loss(std::span<const Point2> pred, std::span<const Point2> target) {
  return l1_mean(pred, target);
}

TrajReconLoss traj_recon_loss(std::span<const std::vector<Point2>> preds, std::span<const Point2> target,
                              double reg_weight) {
  if (preds.size() != kTrajectoryModes) {
    throw DomainError(fmt::format("expected {} candidate trajectories, got {}", kTrajectoryModes, preds.size()));
  }
  TrajReconLoss out;
  for (std::size_t m = 0; m < kTrajectoryModes; ++m) {
    out.mode_losses[m] = l1_mean(preds[m], target);
    if (out.mode_losses[m] < out.mode_losses[out.best_mode]) out.best_mode = m;
  }
  double others = 0.0;
  for (std::size_t m = 0; m < kTrajectoryModes; ++m) {
    if (m != out.best_mode) others += out.mode_losses[m];
  }
  out.loss = out.mode_losses[out.best_mode] + reg_weight * others / static_cast<double>(kTrajectoryModes - 1);
  return out;
}

void check_sample_invariants(const PretrainSample& sample) {
  if (sample.targets.empty()) throw ValidationError(fmt::format("sample '{}' has no targets", sample.scene_id));
  if (sample.targets.size() != sample.masked_placeholders.size()) {
    throw ValidationError(fmt::format("sample '{}' has {} targets for {} placeholders", sample.scene_id,
                                      sample.targets.size(), sample.masked_placeholders.size()));
  }
  std::set<int> masked;
  for (std::size_t i = 0; i < sample.targets.size(); ++i) {
    const auto& ph = sample.masked_placeholders[i];
    const auto& tg = sample.targets[i];
    if (ph.polyline_id != tg.polyline_id || tg.points.size() < 2) {
      throw ValidationError(fmt::format("sample '{}' target {} does not match its placeholder", sample.scene_id, i));
    }
    if (!(ph.first_point == tg.points.front())) {
      throw ValidationError(fmt::format("sample '{}' placeholder {} does not retain the first point",
                                        sample.scene_id, ph.polyline_id));
    }
    masked.insert(ph.polyline_id);
  }
  for (const auto& v : sample.visible) {
    if (masked.contains(v.polyline_id)) {
      throw ValidationError(
          fmt::format("sample '{}' leaks masked polyline {} into the visible set", sample.scene_id, v.polyline_id));
    }
  }
}

void write_sample(std::ostream& out, const PretrainSample& s) {
  out << fmt::format("# sample_format: {}\n", kSampleFormat);
  out << fmt::format("# scene_id: {}\n", s.scene_id);
  out << fmt::format("# task: {}\n", to_string(s.task));
  out << "# masked:";
  for (int id : s.masked_ids()) out << ' ' << id;
  out << '\n';
  for (const auto& p : s.masked_placeholders) {
    out << fmt::format("# placeholder: {} {} {} {}\n", p.polyline_id, to_string(p.kind), p.first_point.x,
                       p.first_point.y);
  }
  out << kVectorColumns << '\n';
  for (const auto& v : s.visible) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(v.kind), v.polyline_id, v.start.x, v.start.y,
                       v.end.x, v.end.y, v.attributes[0], v.attributes[1], v.attributes[2], v.padding ? 1 : 0);
  }
  out << "# targets\n" << kTargetColumns << '\n';
  for (const auto& t : s.targets) {
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      out << fmt::format("{},{},{},{},{}\n", t.polyline_id, to_string(t.kind), i, t.points[i].x, t.points[i].y);
    }
  }
}

std::string sample_to_string(const PretrainSample& sample) {
  std::ostringstream out;
  write_sample(out, sample);
  return out.str();
}

PretrainSample parse_sample(std::istream& in, const std::string& source) {
  PretrainSample s;
  std::vector<int> masked;
  bool in_targets = false;
  bool seen_format = false;
  std::string raw;
  std::size_t line_no = 0;

  auto number = [&](const std::string& token) {
    const auto v = parse_double(token);
    if (!v) throw ParseError(source, line_no, fmt::format("'{}' is not a number", token));
    return *v;
  };
  auto integer = [&](const std::string& token) {
    const auto v = parse_int(token);
    if (!v) throw ParseError(source, line_no, fmt::format("'{}' is not an integer", token));
    return static_cast<int>(*v);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() || raw == kVectorColumns || raw == kTargetColumns) continue;
    if (raw == "# targets") {
      in_targets = true;
      continue;
    }
    if (raw[0] == '#') {
      const auto colon = raw.find(':');
      if (colon == std::string::npos) throw ParseError(source, line_no, "header line without ':'");
      const std::string key(trim(std::string_view(raw).substr(1, colon - 1)));
      const auto values = split_ws(std::string_view(raw).substr(colon + 1));
      if (key == "sample_format") {
        if (values.size() != 1 || integer(values[0]) != kSampleFormat) {
          throw ParseError(source, line_no, "unsupported sample_format");
        }
        seen_format = true;
      } else if (key == "scene_id") {
        s.scene_id = values.empty() ? "" : values[0];
      } else if (key == "task") {
        if (values.size() != 1 || (values[0] != "MapRecon" && values[0] != "TrajRecon")) {
          throw ParseError(source, line_no, "task must be MapRecon or TrajRecon");
        }
        s.task = values[0] == "MapRecon" ? Task::MapRecon : Task::TrajRecon;
      } else if (key == "masked") {
        for (const auto& v : values) masked.push_back(integer(v));
      } else if (key == "placeholder") {
        if (values.size() != 4) throw ParseError(source, line_no, "placeholder needs id, kind, x, y");
        s.masked_placeholders.push_back(
            {integer(values[0]), kind_from_string(values[1], source, line_no), {number(values[2]), number(values[3])}});
      } else {
        throw ParseError(source, line_no, fmt::format("unknown header key '{}'", key));
      }
      continue;
    }
    const auto cols = split(raw, ',');
    if (!in_targets) {
      if (cols.size() != 10) throw ParseError(source, line_no, fmt::format("expected 10 columns, got {}", cols.size()));
      VectorFeature v;
      v.kind = kind_from_string(cols[0], source, line_no);
      v.polyline_id = integer(cols[1]);
      v.start = {number(cols[2]), number(cols[3])};
      v.end = {number(cols[4]), number(cols[5])};
      for (std::size_t a = 0; a < kAttributeWidth; ++a) v.attributes[a] = number(cols[6 + a]);
      v.padding = integer(cols[9]) != 0;
      s.visible.push_back(v);
    } else {
      if (cols.size() != 5) throw ParseError(source, line_no, fmt::format("expected 5 columns, got {}", cols.size()));
      const int id = integer(cols[0]);
      const ElementKind kind = kind_from_string(cols[1], source, line_no);
      const int index = integer(cols[2]);
      if (s.targets.empty() || s.targets.back().polyline_id != id) s.targets.push_back({id, kind, {}});
      if (index != static_cast<int>(s.targets.back().points.size())) {
        throw ParseError(source, line_no, "target point indices must be consecutive from 0");
      }
      s.targets.back().points.push_back({number(cols[3]), number(cols[4])});
    }
  }
  if (!seen_format) throw ParseError(source, line_no, "missing sample_format header");
  if (masked != s.masked_ids()) throw ParseError(source, line_no, "masked ids disagree with placeholders");
  check_sample_invariants(s);
  return s;
}

PretrainSample read_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open sample file '{}'", path));
  return parse_sample(in, path);
}

}  // namespace scenesynth::pretrain
