#include "scenesynth/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"
#include "scenesynth/config.hpp"
#include "scenesynth/errors.hpp"
#include "scenesynth/text_util.hpp"

namespace scenesynth::synthesis {
namespace fs = std::filesystem;
namespace {

// Extra path kept in front of the start and past the farthest reachable
// point, in meters.
constexpr double kPathLead = 5.0;
constexpr double kStartWindow = 50.0;
// The warp anchor is drawn from this stretch of path ahead of the start so
// that the turn lands on the planned trajectory.
constexpr double kAnchorWindow = 30.0;
constexpr int kStartLaneDraws = 16;
// Attempt slot reserved for per-index decisions; real attempts count from 0.
constexpr std::uint64_t kDecisionStream = ~std::uint64_t{0};

}  // namespace

void GenerationConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError(fmt::format("{}: {}", field, why));
  };
  if (n_scenes < 1) fail("n_scenes", "must be >= 1");
  if (!(augmented_fraction >= 0.0 && augmented_fraction <= 1.0)) {
    fail("augmented_fraction", fmt::format("must lie in [0, 1], got {}", augmented_fraction));
  }
  if (!(crop_radius > 0.0)) fail("crop_radius", "must be positive");
  if (!(desired_speed_min >= 0.0 && desired_speed_max >= desired_speed_min)) {
    fail("desired_speed", "needs 0 <= min <= max");
  }
  if (!(initial_speed_lo >= 0.0 && initial_speed_hi >= initial_speed_lo)) {
    fail("initial_speed_factor", "needs 0 <= lo <= hi");
  }
  if (!(path_spacing > 0.0)) fail("path_spacing", "must be positive");
  if (max_attempts < 1) fail("max_attempts", "must be >= 1");
  if (!(augment.magnitude_min >= 1.0 && augment.magnitude_max <= 10.0 &&
        augment.magnitude_min <= augment.magnitude_max)) {
    fail("augment.alpha1", "range must lie within [1, 10]");
  }
  if (!(augment.exponent > 1.0)) fail("augment.alpha2", "must exceed 1");
  if (!(augment.turn_length > 0.0)) fail("augment.turn_length", "must be positive");
  if (!(augment.turn_spacing > 0.0)) fail("augment.turn_spacing", "must be positive");
  if (augment.max_slope && !(*augment.max_slope > 0.0)) fail("augment.max_slope", "must be positive");
  try {
    planner.validate();
  } catch (const DomainError& e) {
    fail("planner", e.what());
  }
  try {
    refinement.validate();
  } catch (const DomainError& e) {
    fail("refinement", e.what());
  }
  if (std::abs(refinement.substeps * refinement.dt_fine - planner.dt) > 1e-12) {
    fail("refinement.substeps", "substeps * dt_fine must equal planner.dt");
  }
  if (std::abs(refinement.dt_fine - kSampleInterval) > 1e-12) {
    fail("refinement.dt_fine", fmt::format("scenes are sampled at {} s", kSampleInterval));
  }
}

SceneMap crop_map(const SceneMap& map, Point2 center, double radius) {
  struct Span {
    std::size_t first, last, size;
  };
  std::map<std::string, Span> kept;
  SceneMap out;
  out.city_tag = map.city_tag;
  for (const auto& [id, lane] : map.lanes) {
    const auto pts = lane.centerline.points();
    std::size_t first = pts.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (distance(pts[i], center) <= radius) {
        first = std::min(first, i);
        last = i;
      }
    }
    if (first >= pts.size() || last == first) continue;
    kept[id] = Span{first, last, pts.size()};
    out.lanes.emplace(id, LaneSegment{id, Polyline({pts.begin() + static_cast<std::ptrdiff_t>(first),
                                                    pts.begin() + static_cast<std::ptrdiff_t>(last) + 1}),
                                      {}, {}});
  }
  auto joined = [&](const std::string& from, const std::string& to) {
    const auto a = kept.find(from);
    const auto b = kept.find(to);
    return a != kept.end() && b != kept.end() && a->second.last + 1 == a->second.size && b->second.first == 0;
  };
  for (const auto& [id, span] : kept) {
    const LaneSegment& src = map.lanes.at(id);
    LaneSegment& dst = out.lanes.at(id);
    for (const auto& s : src.successors) {
      if (joined(id, s)) dst.successors.push_back(s);
    }
    for (const auto& p : src.predecessors) {
      if (joined(p, id)) dst.predecessors.push_back(p);
    }
  }
  return out;
}

Scene generate_scene(const SceneMap& map, Rng& rng, const GenerationConfig& cfg, const std::string& scene_id) {
  const bool augmented = rng.bernoulli(cfg.augmented_fraction);
  return generate_scene(map, rng, cfg, scene_id, augmented);
}

Scene generate_scene(const SceneMap& map, Rng& rng, const GenerationConfig& cfg, const std::string& scene_id,
                     bool augmented) {
  if (map.lanes.empty()) throw DomainError("map has no lanes");

  planner::PlannerParams pp = cfg.planner;
  pp.desired_speed = rng.uniform(cfg.desired_speed_min, cfg.desired_speed_max);
  const double v0 =
      std::max(0.0, rng.uniform(cfg.initial_speed_lo * pp.desired_speed, cfg.initial_speed_hi * pp.desired_speed));

  // Farthest reachable arc-length under the largest action.
  const double plan_time = planner::horizon_steps({0.0, v0, 0.0}, pp) * pp.dt;
  const double max_accel = std::max(0.0, *std::max_element(pp.action_set.begin(), pp.action_set.end()));
  const double travel = v0 * plan_time + 0.5 * max_accel * plan_time * plan_time;

  // Start lanes close to a dead end cannot carry the horizon; redraw them
  // (rejection sampling, so the start stays uniform over usable lanes).
  std::string start_lane;
  ReferencePath path;
  double start_hi = 0.0;
  for (int draw = 0; draw < kStartLaneDraws; ++draw) {
    auto lane_it = map.lanes.begin();
    std::advance(lane_it, static_cast<std::ptrdiff_t>(rng.index(map.lanes.size())));
    start_lane = lane_it->first;
    path = build_reference_path(map, start_lane, travel + kStartWindow + 2.0 * kPathLead, rng, cfg.path_spacing);
    start_hi = path.length() - travel - kPathLead;
    if (start_hi >= kPathLead) break;
  }
  if (start_hi < kPathLead) {
    throw PlanningFailure(fmt::format("reference path from '{}' is {:.1f} m, too short for {:.1f} m of travel",
                                      start_lane, path.length(), travel));
  }
  const auto& cum = path.cum_s();
  const auto lo = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), kPathLead) - cum.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), start_hi) - cum.begin());
  double s_start = cum[lo + rng.index(hi - lo)];

  Scene scene;
  scene.scene_id = scene_id;
  scene.city_tag = map.city_tag;
  SceneMap scene_map = map;

  if (augmented) {
    const auto params = augment::sample_transform_params(rng, path, s_start, s_start + kAnchorWindow, cfg.augment);
    const Point2 start_pos = path.position_at(s_start);
    scene_map = augment::apply_transform(augment::densify_ramps(map, params), params);
    path = ReferencePath(concatenate_lanes(scene_map, path.lane_ids()), cfg.path_spacing, path.lane_ids());
    s_start = project_to_path(start_pos, path).s;
    if (path.length() - s_start < travel + kPathLead) {
      throw PlanningFailure("warped reference path too short for the horizon");
    }
    scene.metadata.transform = params;
  }

  const planner::CoarsePlan plan = planner::astar_plan(path, {s_start, v0, 0.0}, pp);
  const refine::RefinedTrajectory refined = refine::refine_trajectory(plan, cfg.refinement, v0, s_start);
  if (refined.s_values.size() < kSceneSamples) {
    throw PlanningFailure(fmt::format("refined trajectory has {} samples, need {}", refined.s_values.size(),
                                      kSceneSamples));
  }

  scene.trajectory.reserve(kSceneSamples);
  for (std::size_t i = 0; i < kSceneSamples; ++i) {
    scene.trajectory.push_back({static_cast<double>(i) * kSampleInterval, path.position_at(refined.s_values[i])});
  }

  scene.metadata.augmented = augmented;
  scene.metadata.desired_speed = pp.desired_speed;
  scene.metadata.initial_speed = v0;
  scene.metadata.plan_cost = plan.total_cost;
  scene.metadata.crop_center = scene.trajectory[kSceneSamples / 2].pos;
  scene.metadata.crop_radius = cfg.crop_radius;
  scene.map_crop = crop_map(scene_map, scene.metadata.crop_center, cfg.crop_radius);

  check_scene_invariants(scene);
  if (const auto violations = scene_violations(scene); !violations.empty()) {
    throw PlanningFailure(fmt::format("scene rejected: {}", violations.front()));
  }
  return scene;
}

std::string scene_id_for(std::size_t index) { return fmt::format("{:07d}", index); }

SceneOutcome generate_indexed_scene(std::span<const SceneMap> maps, const GenerationConfig& cfg, std::size_t index,
                                    Scene* scene_out) {
  SceneOutcome outcome;
  outcome.scene_id = scene_id_for(index);
  outcome.file = scene_file_name(outcome.scene_id);
  // Decided once per index so that retries cannot skew the augmented share.
  Rng decision(derive_seed(cfg.seed, index, kDecisionStream));
  const bool augmented = decision.bernoulli(cfg.augmented_fraction);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const std::uint64_t stream = derive_seed(cfg.seed, index, static_cast<std::uint64_t>(attempt));
    Rng rng(stream);
    const SceneMap& map = maps[rng.index(maps.size())];
    outcome.attempts = attempt + 1;
    try {
      Scene scene = generate_scene(map, rng, cfg, outcome.scene_id, augmented);
      scene.metadata.planner_seed = stream;
      outcome.augmented = scene.metadata.augmented;
      outcome.city = scene.city_tag;
      outcome.failure.clear();
      if (scene_out) *scene_out = std::move(scene);
      return outcome;
    } catch (const Error& e) {
      outcome.failure = e.what();
    }
  }
  return outcome;
}

namespace {

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(fmt::format("output directory '{}' cannot be created", dir.string()));
  }
  const fs::path probe = dir / ".write_probe";
  try {
    write_file_atomic(probe.string(), "probe\n");
  } catch (const Error&) {
    throw Error(fmt::format("output directory '{}' is not writable", dir.string()));
  }
  fs::remove(probe, ec);
}

}  // namespace

DatasetManifest generate_dataset(std::span<const SceneMap> maps, const GenerationConfig& cfg, int workers,
                                 std::ostream* log) {
  cfg.validate();
  if (maps.empty()) throw ConfigError("maps: at least one map is required");
  const fs::path dir(cfg.output_dir);
  ensure_writable(dir);

  std::vector<SceneOutcome> outcomes(cfg.n_scenes);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::mutex error_mutex;
  std::string fatal;

  auto work = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= cfg.n_scenes) return;
      const auto started = std::chrono::steady_clock::now();
      SceneOutcome outcome;
      double cost = 0.0;
      try {
        const std::string id = scene_id_for(index);
        const fs::path file = dir / scene_file_name(id);
        bool done = false;
        if (fs::exists(file)) {
          try {
            const Scene existing = read_scene(file.string());
            outcome = SceneOutcome{id, file.filename().string(), true, true, existing.metadata.augmented,
                                   existing.city_tag, 0, {}};
            cost = existing.metadata.plan_cost;
            done = true;
          } catch (const Error&) {
            // Unreadable leftover; regenerate it.
          }
        }
        if (!done) {
          Scene scene;
          outcome = generate_indexed_scene(maps, cfg, index, &scene);
          if (outcome.failure.empty()) {
            save_scene(file.string(), scene);
            outcome.written = true;
            cost = scene.metadata.plan_cost;
          }
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (fatal.empty()) fatal = e.what();
        return;
      }
      const double wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << fmt::format("scene={} status={} attempts={} augmented={} cost={:.3f} wall_ms={:.2f}{}\n",
                            outcome.scene_id,
                            outcome.reused ? "reused" : (outcome.written ? "written" : "skipped"),
                            outcome.attempts, outcome.augmented ? 1 : 0, cost, wall_ms,
                            outcome.failure.empty() ? "" : " reason=\"" + outcome.failure + "\"");
      }
      outcomes[index] = std::move(outcome);
    }
  };

  const int n_threads = std::max(1, workers);
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
  }
  if (!fatal.empty()) throw Error(fatal);

  DatasetManifest manifest;
  manifest.path = (dir / kManifestName).string();
  nlohmann::json scenes = nlohmann::json::array();
  nlohmann::json skipped = nlohmann::json::array();
  for (auto& o : outcomes) {
    if (o.written) {
      (o.augmented ? manifest.augmented : manifest.original) += 1;
      manifest.per_city[o.city] += 1;
      scenes.push_back({{"id", o.scene_id}, {"file", o.file}, {"augmented", o.augmented}, {"city", o.city}});
    } else {
      skipped.push_back({{"id", o.scene_id}, {"reason", o.failure}});
    }
  }
  manifest.scenes = std::move(outcomes);

  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["seed"] = cfg.seed;
  doc["n_scenes_requested"] = cfg.n_scenes;
  doc["n_scenes_written"] = manifest.original + manifest.augmented;
  doc["counts"] = {{"original", manifest.original}, {"augmented", manifest.augmented}};
  doc["per_city"] = manifest.per_city;
  doc["scenes"] = std::move(scenes);
  doc["skipped"] = std::move(skipped);
  doc["config"] = generation_config_echo(cfg);
  const std::string text = doc.dump(2) + "\n";

  bool unchanged = false;
  if (fs::exists(manifest.path)) {
    try {
      unchanged = read_file(manifest.path) == text;
    } catch (const Error&) {
    }
  }
  if (!unchanged) write_file_atomic(manifest.path, text);
  return manifest;
}

}  // namespace scenesynth::synthesis
