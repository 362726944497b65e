#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "scenesynth/errors.hpp"
#include "scenesynth/map_fixtures.hpp"
#include "scenesynth/synthesis.hpp"

using namespace scenesynth;
using namespace scenesynth::synthesis;
namespace fs = std::filesystem;

TEST_CASE("generate_scene is deterministic") {
  const SceneMap map = procedural_city_map(3);
  GenerationConfig cfg;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (bool augmented : {false, true}) {
      Rng a(seed), b(seed);
      std::string first, second;
      try {
        first = scene_to_string(generate_scene(map, a, cfg, "0000001", augmented));
      } catch (const Error& e) {
        first = e.what();
      }
      try {
        second = scene_to_string(generate_scene(map, b, cfg, "0000001", augmented));
      } catch (const Error& e) {
        second = e.what();
      }
      CHECK(first == second);
    }
  }
}

TEST_CASE("straight lane gives a collinear trajectory") {
  const SceneMap map = straight_two_lane_map(300.0);
  GenerationConfig cfg;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Scene s = generate_scene(map, rng, cfg, scene_id_for(seed), false);
    CHECK_FALSE(s.metadata.augmented);
    CHECK(scene_violations(s).empty());
    for (const auto& p : s.trajectory) CHECK(std::abs(p.pos.y) <= 0.1);
    // Forward motion along the lane.
    CHECK(s.trajectory.back().pos.x > s.trajectory.front().pos.x);
    CHECK(s.metadata.desired_speed >= 6.0);
    CHECK(s.metadata.desired_speed <= 15.0);
    CHECK(s.metadata.initial_speed >= 0.8 * s.metadata.desired_speed - 1e-12);
    CHECK(s.metadata.initial_speed <= 1.2 * s.metadata.desired_speed + 1e-12);
  }
}

TEST_CASE("augmented scenes carry their transform") {
  const SceneMap map = procedural_city_map(11);
  GenerationConfig cfg;
  int made = 0;
  for (std::uint64_t seed = 0; seed < 20 && made < 5; ++seed) {
    Rng rng(seed);
    try {
      const Scene s = generate_scene(map, rng, cfg, scene_id_for(seed), true);
      CHECK(s.metadata.augmented);
      REQUIRE(s.metadata.transform.has_value());
      CHECK(s.metadata.transform->magnitude >= 1.0);
      CHECK(s.metadata.transform->magnitude <= 10.0);
      CHECK(scene_violations(s).empty());
      ++made;
    } catch (const PlanningFailure&) {
    }
  }
  CHECK(made == 5);
}

TEST_CASE("crop_map") {
  const SceneMap map = straight_two_lane_map(100.0, 2.0);  // L1: x in [0, 100], L2: [100, 200]
  SUBCASE("disc inside one lane") {
    const SceneMap c = crop_map(map, {50, 0}, 10.0);
    REQUIRE(c.lanes.size() == 1);
    const auto& pts = c.lanes.at("L1").centerline;
    CHECK(pts.front().x == 40.0);
    CHECK(pts.back().x == 60.0);
    CHECK(c.edge_count() == 0);
  }
  SUBCASE("disc over the junction keeps the edge") {
    const SceneMap c = crop_map(map, {100, 0}, 10.0);
    CHECK(c.lanes.size() == 2);
    CHECK(c.edge_count() == 1);
    validate_map(c);
  }
  SUBCASE("far away disc keeps nothing") { CHECK(crop_map(map, {0, 500}, 10.0).lanes.empty()); }
}

TEST_CASE("dataset generation") {
  const auto dir = oracle::temp_dir("dataset");
  GenerationConfig cfg;
  cfg.n_scenes = 10;
  cfg.seed = 5;
  cfg.output_dir = dir.string();
  const std::vector<SceneMap> maps{procedural_city_map(1), procedural_city_map(2)};

  const auto manifest = generate_dataset(maps, cfg);
  CHECK(manifest.scenes.size() == 10);
  CHECK(manifest.original + manifest.augmented == 10);
  std::size_t per_city = 0;
  for (const auto& [city, n] : manifest.per_city) per_city += n;
  CHECK(per_city == 10);
  const auto doc = nlohmann::json::parse(std::ifstream(dir / kManifestName));
  CHECK(doc["scenes"].size() == 10);
  for (const auto& entry : doc["scenes"]) {
    const fs::path file = dir / entry["file"].get<std::string>();
    REQUIRE(fs::exists(file));
    CHECK(scene_violations(read_scene(file.string())).empty());
  }

  SUBCASE("rerun rewrites nothing") {
    std::map<std::string, fs::file_time_type> stamps;
    std::map<std::string, std::string> bytes;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() != ".csv") continue;
      stamps[e.path().string()] = fs::last_write_time(e.path());
      bytes[e.path().string()] = oracle::read_text(e.path());
    }
    const auto again = generate_dataset(maps, cfg);
    for (const auto& s : again.scenes) CHECK(s.reused);
    for (const auto& [path, t] : stamps) {
      CHECK(fs::last_write_time(path) == t);
      CHECK(oracle::read_text(path) == bytes[path]);
    }
  }
  SUBCASE("worker count does not change the bytes") {
    const auto other = oracle::temp_dir("dataset_workers");
    auto cfg4 = cfg;
    cfg4.output_dir = other.string();
    generate_dataset(maps, cfg4, 4);
    for (const auto& e : fs::directory_iterator(dir)) {
      CHECK(oracle::read_text(e.path()) == oracle::read_text(other / e.path().filename()));
    }
  }
}

TEST_CASE("augmented fraction extremes") {
  const std::vector<SceneMap> maps{procedural_city_map(4)};
  for (double fraction : {0.0, 1.0}) {
    const auto dir = oracle::temp_dir("fraction");
    GenerationConfig cfg;
    cfg.n_scenes = 8;
    cfg.augmented_fraction = fraction;
    cfg.output_dir = dir.string();
    const auto m = generate_dataset(maps, cfg);
    CHECK(m.augmented == (fraction == 1.0 ? 8u : 0u));
  }
}

TEST_CASE("unwritable output fails before any work") {
  const auto dir = oracle::temp_dir("unwritable");
  const fs::path blocker = dir / "file";
  std::ofstream(blocker) << "x";
  GenerationConfig cfg;
  cfg.n_scenes = 3;
  cfg.output_dir = (blocker / "scenes").string();
  const std::vector<SceneMap> maps{straight_two_lane_map()};
  CHECK_THROWS_AS(generate_dataset(maps, cfg), Error);
  CHECK_THROWS_AS(generate_dataset({}, cfg), ConfigError);
}

TEST_CASE("configuration checks") {
  GenerationConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.augmented_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.n_scenes = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.desired_speed_min = 20.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(scene_id_for(42) == "0000042");
}
