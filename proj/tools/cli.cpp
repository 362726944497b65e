#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "scenesynth/analysis.hpp"
#include "scenesynth/augment.hpp"
#include "scenesynth/config.hpp"
#include "scenesynth/errors.hpp"
#include "scenesynth/map.hpp"
#include "scenesynth/map_fixtures.hpp"
#include "scenesynth/plot.hpp"
#include "scenesynth/pretrain.hpp"
#include "scenesynth/scene.hpp"
#include "scenesynth/synthesis.hpp"
#include "scenesynth/text_util.hpp"

namespace scenesynth::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Sorted regular files in `dir` named <prefix>*<suffix>.
std::vector<fs::path> list_files(const std::string& dir, std::string_view prefix, std::string_view suffix) {
  if (!fs::is_directory(dir)) throw Error(fmt::format("'{}' is not a directory", dir));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.starts_with(prefix) && name.ends_with(suffix)) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<Scene> load_scene_dir(const std::string& dir) {
  const auto files = list_files(dir, "scene_", ".csv");
  if (files.empty()) throw Error(fmt::format("no scene files in '{}'", dir));
  std::vector<Scene> scenes;
  scenes.reserve(files.size());
  for (const auto& f : files) scenes.push_back(read_scene(f.string()));
  return scenes;
}

AnalysisOptions analysis_options(const std::string& config_path) {
  if (config_path.empty()) return {};
  return load_run_config(config_path).analysis;
}

// --- make-map ---------------------------------------------------------------

struct MakeMapArgs {
  std::string fixture = "city";
  std::uint64_t seed = 7;
  std::string out;
};

int cmd_make_map(const MakeMapArgs& a, std::ostream& out) {
  save_map(a.out, generate_map_fixture(a.fixture, a.seed));
  out << fmt::format("wrote {} map to {}\n", a.fixture, a.out);
  return kOk;
}

// --- augment-map ------------------------------------------------------------

struct AugmentMapArgs {
  std::string map;
  std::uint64_t seed = 0;
  std::string out;
  std::string kind;  // empty: sampled
};

json transform_to_json(const augment::TurnTransformParams& p) {
  return {{"kind", augment::to_string(p.kind)},
          {"onset", p.onset},
          {"alpha1", p.magnitude},
          {"alpha2", p.exponent},
          {"turn_length", p.turn_length},
          {"beta", p.turn_spacing},
          {"frame", {{"x", p.frame.origin.x}, {"y", p.frame.origin.y}, {"heading", p.frame.heading}}}};
}

int cmd_augment_map(const AugmentMapArgs& a, std::ostream& out) {
  const SceneMap map = load_map(a.map);
  validate_map(map);
  if (map.lanes.empty()) throw ValidationError(fmt::format("{}: map has no lanes", a.map));

  const augment::AugmentRanges ranges;
  Rng rng(a.seed);
  auto lane = map.lanes.begin();
  std::advance(lane, static_cast<std::ptrdiff_t>(rng.index(map.lanes.size())));
  const double reach = ranges.onset + ranges.turn_spacing + 2.0 * ranges.turn_length;
  const ReferencePath path = build_reference_path(map, lane->first, reach, rng, 0.25);
  auto params = augment::sample_transform_params(rng, path, ranges);
  if (!a.kind.empty()) params.kind = augment::turn_kind_from_string(a.kind);

  save_map(a.out, augment::apply_transform(augment::densify_ramps(map, params), params));
  json sidecar = transform_to_json(params);
  sidecar["seed"] = a.seed;
  sidecar["anchor_lane"] = lane->first;
  const std::string sidecar_path = a.out + ".params.json";
  write_file_atomic(sidecar_path, sidecar.dump(2) + "\n");
  out << fmt::format("wrote {} ({}, alpha1={:.4f}) and {}\n", a.out, augment::to_string(params.kind),
                     params.magnitude, sidecar_path);
  return kOk;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string config;
  int workers = 0;  // 0: from config
  std::string out_dir;
  bool quiet = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(a.config);
  if (a.workers != 0) cfg.workers = a.workers;
  if (!a.out_dir.empty()) cfg.generation.output_dir = a.out_dir;
  cfg.validate();
  const auto maps = load_maps(cfg.maps);
  for (const auto& m : maps) validate_map(m);

  const auto started = std::chrono::steady_clock::now();
  const auto manifest = synthesis::generate_dataset(maps, cfg.generation, cfg.workers, a.quiet ? nullptr : &err);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::size_t written = manifest.original + manifest.augmented;
  const std::size_t skipped = cfg.generation.n_scenes - written;
  out << fmt::format("scenes={} augmented={} skipped={} wall_s={:.3f} throughput={:.1f} scenes/s\n", written,
                     manifest.augmented, skipped, secs, secs > 0.0 ? static_cast<double>(written) / secs : 0.0);
  out << fmt::format("manifest: {}\n", manifest.path);
  if (skipped > 0) {
    err << fmt::format("error: {} scene(s) failed after {} attempts; see manifest 'skipped'\n", skipped,
                       cfg.generation.max_attempts);
    return kDataFailure;
  }
  return kOk;
}

// --- mask -------------------------------------------------------------------

struct MaskArgs {
  std::string scenes;
  std::string task = "combined";
  double map_fraction = 0.7;
  double map_ratio = 0.5;
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

int cmd_mask(const MaskArgs& a, std::ostream& out) {
  const auto scenes = load_scene_dir(a.scenes);
  std::vector<pretrain::VectorizedScene> batch;
  batch.reserve(scenes.size());
  for (const auto& s : scenes) batch.push_back(pretrain::vectorize_scene(s));

  Rng rng(a.seed);
  std::vector<pretrain::PretrainSample> samples;
  samples.reserve(batch.size());
  if (a.task == "combined") {
    samples = pretrain::assign_tasks(batch, a.map_fraction, rng, a.map_ratio);
  } else {
    for (const auto& v : batch) {
      samples.push_back(a.task == "map" ? pretrain::mask_map(v, a.map_ratio, rng) : pretrain::mask_trajectory(v));
    }
  }

  fs::create_directories(a.out);
  std::size_t map_tasks = 0;
  for (const auto& s : samples) {
    pretrain::check_sample_invariants(s);
    if (s.task == pretrain::Task::MapRecon) ++map_tasks;
    write_file_atomic((fs::path(a.out) / fmt::format("sample_{}.csv", s.scene_id)).string(),
                      pretrain::sample_to_string(s));
  }
  out << fmt::format("samples={} map_recon={} traj_recon={} map_fraction={:.4f}\n", samples.size(), map_tasks,
                     samples.size() - map_tasks,
                     static_cast<double>(map_tasks) / static_cast<double>(samples.size()));
  return kOk;
}

// --- stats ------------------------------------------------------------------

struct StatsArgs {
  std::string a;
  std::string b;
  std::string config;
  std::string out;
};

json histogram_summary(const analysis::Histogram& h1, const analysis::Histogram& h2) {
  const auto r = analysis::compare_distributions(h1, h2);
  return {{"overlap", r.overlap}, {"jsd", r.jsd}, {"samples_a", h1.total()}, {"samples_b", h2.total()}};
}

int cmd_stats(const StatsArgs& args, std::ostream& out) {
  const AnalysisOptions opt = analysis_options(args.config);
  const auto a = load_scene_dir(args.a);
  const auto b = load_scene_dir(args.b);
  json report;
  report["scenes_a"] = a.size();
  report["scenes_b"] = b.size();
  report["speed"] = histogram_summary(analysis::speed_distribution(a, opt.speed_bin_width, opt.speed_max),
                                      analysis::speed_distribution(b, opt.speed_bin_width, opt.speed_max));
  report["heading"] = histogram_summary(analysis::heading_distribution(a, opt.heading_bins),
                                        analysis::heading_distribution(b, opt.heading_bins));
  const std::string text = report.dump(2) + "\n";
  if (!args.out.empty()) write_file_atomic(args.out, text);
  out << text;
  return kOk;
}

// --- validate ---------------------------------------------------------------

struct ValidateArgs {
  std::string scenes;
  bool samples = false;
};

// Returns the number of problems found; each is reported as "path: message".
std::size_t validate_manifest(const fs::path& dir, std::size_t scene_files, std::ostream& err) {
  const fs::path path = dir / synthesis::kManifestName;
  if (!fs::exists(path)) return 0;
  std::size_t problems = 0;
  json doc;
  try {
    doc = json::parse(read_file(path.string()));
  } catch (const std::exception& e) {
    err << fmt::format("{}: {}\n", path.string(), e.what());
    return 1;
  }
  const auto& listed = doc.value("scenes", json::array());
  std::size_t augmented = 0;
  for (const auto& entry : listed) {
    const std::string file = entry.value("file", "");
    if (!fs::exists(dir / file)) {
      err << fmt::format("{}: lists missing scene file '{}'\n", path.string(), file);
      ++problems;
      continue;
    }
    if (entry.value("augmented", false)) ++augmented;
  }
  if (listed.size() != scene_files) {
    err << fmt::format("{}: lists {} scenes, directory holds {}\n", path.string(), listed.size(), scene_files);
    ++problems;
  }
  if (doc.contains("counts") && doc["counts"].value("augmented", std::size_t{0}) != augmented) {
    err << fmt::format("{}: augmented count does not match scene entries\n", path.string());
    ++problems;
  }
  return problems;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  const auto files = list_files(a.scenes, "scene_", ".csv");
  if (files.empty()) throw Error(fmt::format("no scene files in '{}'", a.scenes));
  std::size_t bad_files = 0;
  std::size_t augmented = 0;
  for (const auto& f : files) {
    const std::string path = f.string();
    std::vector<std::string> problems;
    try {
      const std::string text = read_file(path);
      std::istringstream in(text);
      const Scene scene = parse_scene(in, path);
      problems = scene_violations(scene);
      if (scene_file_name(scene.scene_id) != f.filename().string()) {
        problems.push_back(fmt::format("scene_id '{}' does not match the file name", scene.scene_id));
      }
      if (scene_to_string(scene) != text) problems.emplace_back("re-serialization does not reproduce the file");
      if (scene.metadata.augmented) ++augmented;
    } catch (const Error& e) {
      problems.emplace_back(e.what());
    }
    for (const auto& p : problems) err << fmt::format("{}: {}\n", path, p);
    if (!problems.empty()) ++bad_files;
  }
  std::size_t bad_samples = 0;
  std::size_t sample_count = 0;
  if (a.samples) {
    for (const auto& f : list_files(a.scenes, "sample_", ".csv")) {
      ++sample_count;
      try {
        pretrain::check_sample_invariants(pretrain::read_sample(f.string()));
      } catch (const Error& e) {
        err << fmt::format("{}: {}\n", f.string(), e.what());
        ++bad_samples;
      }
    }
  }
  const std::size_t manifest_problems = validate_manifest(a.scenes, files.size(), err);
  out << fmt::format("checked={} invalid={} augmented={} augmented_fraction={:.4f}", files.size(), bad_files,
                     augmented, static_cast<double>(augmented) / static_cast<double>(files.size()));
  if (a.samples) out << fmt::format(" samples={} invalid_samples={}", sample_count, bad_samples);
  out << fmt::format(" manifest_problems={}\n", manifest_problems);
  return bad_files + bad_samples + manifest_problems == 0 ? kOk : kDataFailure;
}

// --- plot -------------------------------------------------------------------

struct PlotArgs {
  std::string scenes;
  std::string out;
  std::string config;
  bool svg = false;
};

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  const AnalysisOptions opt = analysis_options(a.config);
  const auto scenes = load_scene_dir(a.scenes);
  fs::create_directories(a.out);
  const fs::path dir(a.out);
  const auto speed = analysis::speed_distribution(scenes, opt.speed_bin_width, opt.speed_max);
  const auto heading = analysis::heading_distribution(scenes, opt.heading_bins);
  plot::save_histogram_csv((dir / "speed_hist.csv").string(), speed);
  plot::save_histogram_csv((dir / "heading_hist.csv").string(), heading);
  plot::save_cloud_csv((dir / "endpoints.csv").string(), analysis::endpoint_cloud(scenes));
  if (a.svg) {
    plot::save_histogram_svg((dir / "speed_hist.svg").string(), speed, "speed (m/s)");
    plot::save_histogram_svg((dir / "heading_hist.svg").string(), heading, "heading (rad)");
  }
  out << fmt::format("wrote plot data for {} scenes to {}\n", scenes.size(), a.out);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic driving-scene generation and pretraining data preparation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  MakeMapArgs make_map;
  auto* c_make = app.add_subcommand("make-map", "Write a procedural map fixture");
  c_make->add_option("--fixture", make_map.fixture, "straight | city")
      ->check(CLI::IsMember({"straight", "city"}))
      ->capture_default_str();
  c_make->add_option("--seed", make_map.seed, "Fixture seed")->capture_default_str();
  c_make->add_option("--out", make_map.out, "Output map file")->required();

  AugmentMapArgs aug;
  auto* c_aug = app.add_subcommand("augment-map", "Warp a map with one sampled turn transform");
  c_aug->add_option("--map", aug.map, "Input map file")->required();
  c_aug->add_option("--seed", aug.seed, "Sampling seed")->required();
  c_aug->add_option("--out", aug.out, "Output map file; parameters go to <out>.params.json")->required();
  c_aug->add_option("--kind", aug.kind, "Force the turn kind")->check(CLI::IsMember({"single", "double"}));

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Generate a scene dataset");
  c_gen->add_option("--config", gen.config, "JSON run configuration")->required();
  c_gen->add_option("--workers", gen.workers, "Worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);
  c_gen->add_option("--out", gen.out_dir, "Output directory (overrides the config)");
  c_gen->add_flag("--quiet", gen.quiet, "Suppress per-scene log lines");

  MaskArgs mask;
  auto* c_mask = app.add_subcommand("mask", "Build masked pretraining samples from a scene directory");
  c_mask->add_option("--scenes", mask.scenes, "Scene directory")->required();
  auto* o_task = c_mask->add_option("--task", mask.task, "map | traj | combined")
      ->check(CLI::IsMember({"map", "traj", "combined"}))
      ->capture_default_str();
  auto* o_fraction = c_mask->add_option("--map-fraction", mask.map_fraction, "Share of map-reconstruction samples (combined)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  auto* o_ratio = c_mask->add_option("--map-ratio", mask.map_ratio, "Share of lanes masked per map sample")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  auto* o_seed = c_mask->add_option("--seed", mask.seed, "Masking seed")->capture_default_str();
  c_mask->add_option("--out", mask.out, "Output directory")->required();
  c_mask->add_option("--config", mask.config, "JSON run configuration (mask section); flags take precedence");

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Compare speed and heading distributions of two scene directories");
  c_stats->add_option("--a", stats.a, "First scene directory")->required();
  c_stats->add_option("--b", stats.b, "Second scene directory")->required();
  c_stats->add_option("--config", stats.config, "JSON run configuration (analysis section)");
  c_stats->add_option("--out", stats.out, "Also write the JSON report here");

  ValidateArgs val;
  auto* c_val = app.add_subcommand("validate", "Check every scene file (and manifest) in a directory");
  c_val->add_option("--scenes", val.scenes, "Scene directory")->required();
  c_val->add_flag("--samples", val.samples, "Also check sample_*.csv files in the same directory");

  PlotArgs plot_args;
  auto* c_plot = app.add_subcommand("plot", "Emit histogram and endpoint tables for a scene directory");
  c_plot->add_option("--scenes", plot_args.scenes, "Scene directory")->required();
  c_plot->add_option("--out", plot_args.out, "Output directory")->required();
  c_plot->add_option("--config", plot_args.config, "JSON run configuration (analysis section)");
  c_plot->add_flag("--svg", plot_args.svg, "Also render SVG histograms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kUsageError;
  }

  try {
    if (*c_make) return cmd_make_map(make_map, out);
    if (*c_aug) return cmd_augment_map(aug, out);
    if (*c_gen) return cmd_generate(gen, out, err);
    if (*c_mask) {
      if (!mask.config.empty()) {
        const RunConfig cfg = load_run_config(mask.config);
        if (o_task->count() == 0) mask.task = cfg.mask.task;
        if (o_fraction->count() == 0) mask.map_fraction = cfg.mask.map_fraction;
        if (o_ratio->count() == 0) mask.map_ratio = cfg.mask.map_ratio;
        if (o_seed->count() == 0) mask.seed = cfg.mask.seed;
      }
      return cmd_mask(mask, out);
    }
    if (*c_stats) return cmd_stats(stats, out);
    if (*c_val) return cmd_validate(val, out, err);
    if (*c_plot) return cmd_plot(plot_args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataFailure;
  }
  return kUsageError;
}

}  // namespace scenesynth::cli
