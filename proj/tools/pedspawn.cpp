// pedspawn command line: run / stats / debug-maps / synth.
//
// Exit codes: 0 success, 1 configuration error, 2 data error.
// Log level from PEDSPAWN_LOG_LEVEL (error, warn, info, debug; default info).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "pedspawn/error.hpp"
#include "pedspawn/io/cityscapes.hpp"
#include "pedspawn/io/png.hpp"
#include "pedspawn/pipeline/augment.hpp"
#include "pedspawn/pipeline/config.hpp"
#include "pedspawn/pipeline/discover.hpp"
#include "pedspawn/pipeline/run.hpp"
#include "pedspawn/pipeline/stats.hpp"
#include "pedspawn/synthetic.hpp"

namespace fs = std::filesystem;
using namespace pedspawn;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("PEDSPAWN_LOG_LEVEL");
  const std::string v = env ? env : "info";
  if (v == "error") return Level::Error;
  if (v == "warn") return Level::Warn;
  if (v == "debug") return Level::Debug;
  return Level::Info;
}

void log(Level level, const std::string& msg) {
  static const Level threshold = log_level();
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= threshold) std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

pipeline::PipelineConfig load_config(const std::optional<fs::path>& path) {
  if (!path) return {};
  if (!fs::is_regular_file(*path)) throw ConfigError("config file not found: " + path->string());
  nlohmann::json doc;
  try {
    doc = io::read_json_file(*path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return pipeline::config_from_json(doc, path->parent_path());
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed, std::optional<int> jobs, bool preview,
            const std::optional<fs::path>& input, const std::optional<fs::path>& output) {
  auto config = load_config(config_path);
  if (seed) config.seed = *seed;
  if (jobs) config.jobs = *jobs;
  if (preview) config.preview = true;
  if (input) config.input_root = *input;
  if (output) config.output_root = *output;
  config.validate();

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = pipeline::run(config, [](const std::string& id, const pipeline::AugmentRecord& r) {
    if (r.skipped) {
      log(Level::Warn, id + ": skipped (" + r.skip_reason + ")");
    } else {
      log(Level::Debug, id + ": placed " + std::to_string(r.placements.size()) + "/" + std::to_string(r.requested) +
                            (r.exhausted ? " (spawn exhausted)" : ""));
    }
  });
  for (const auto& w : result.warnings) log(Level::Warn, w);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log(Level::Info, "processed " + std::to_string(result.processed) + " images (" + std::to_string(result.skipped) +
                       " skipped) in " + std::to_string(secs) + " s -> " + config.output_root.string());
  return 0;
}

int cmd_stats(const fs::path& root) {
  const auto s = pipeline::stats(root);
  std::cout << s.to_json().dump(2) << "\n";
  for (const auto& p : s.problems) log(Level::Warn, p);
  return s.problems.empty() ? 0 : 2;
}

GrayImage cloud_topdown(const WorldCloud& cloud, const GroundGrid& spawn, const pipeline::PipelineConfig& config) {
  const auto& spec = spawn.spec();
  GrayImage img(spec.nx, spec.nz, 255);
  for (const auto& p : cloud) {
    auto c = spec.cell_of(p.position.x, p.position.z);
    if (!c) continue;
    const int row = spec.nz - 1 - c->second;
    const double hgt = p.position.height;
    if (hgt >= config.obstacle_band.min_height && hgt <= config.obstacle_band.max_height) {
      img(c->first, row) = 0;
    } else if (img(c->first, row) != 0) {
      img(c->first, row) = 170;
    }
  }
  return img;
}

int cmd_debug_maps(const fs::path& image, const std::optional<fs::path>& config_path, const fs::path& out_dir) {
  auto config = load_config(config_path);
  config.validate(false);
  const auto ref = pipeline::scene_from_image(image);
  const auto data = pipeline::load_scene(ref);
  const auto assets = pipeline::load_assets(pipeline::resolve_asset_paths(config));
  Rng rng(derive_seed(config.seed, ref.id));
  const auto sample = pipeline::augment_image(ref.id, data, assets, config, rng);

  fs::create_directories(out_dir);
  const fs::path base = out_dir / ref.stem;
  io::write_gray_png(base.string() + "_point_cloud.png", cloud_topdown(sample.cloud, sample.spawn_map, config));
  io::write_gray_png(base.string() + "_spawn_map.png", grid_to_image(sample.spawn_map));
  io::write_gray_png(base.string() + "_collision_map.png", grid_to_image(sample.collision_map));
  io::write_rgb_png(base.string() + "_blending.png", sample.rgb);
  std::cout << pipeline::record_to_json(sample.record).dump(2) << "\n";
  log(Level::Info, "debug maps written to " + out_dir.string());
  return 0;
}

int cmd_synth(const fs::path& root, int count, std::uint64_t seed, int width, int height) {
  if (count < 1 || width < 16 || height < 16) throw ConfigError("synth: count >= 1 and image size >= 16 required");
  const auto stems = synthetic::write_toy_dataset(root, count, seed, width, height);
  log(Level::Info, "wrote " + std::to_string(stems.size()) + " synthetic scenes under " + root.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pedspawn: insert virtual pedestrians into stereo street scenes"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "augment every scene of a Cityscapes-layout tree");
  fs::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<fs::path> input, output;
  bool preview = false;
  run->add_option("--config", config_path, "JSON configuration file")->required();
  run->add_option("--seed", seed, "global seed (overrides config)");
  run->add_option("--jobs", jobs, "worker threads (overrides config)");
  run->add_option("--input", input, "input root (overrides config)");
  run->add_option("--output", output, "output root (overrides config)");
  run->add_flag("--preview", preview, "also write RGB|semantic|instance preview sheets");

  auto* stats = app.add_subcommand("stats", "class-balance and consistency statistics of an emitted dataset");
  fs::path stats_root;
  stats->add_option("output_root", stats_root, "emitted dataset root")->required();

  auto* debug = app.add_subcommand("debug-maps", "dump point cloud, spawn map, collision map and blend for one image");
  fs::path debug_image;
  std::optional<fs::path> debug_config;
  fs::path debug_out = "debug_maps";
  debug->add_option("image", debug_image, "path to a *_leftImg8bit.png inside a Cityscapes tree")->required();
  debug->add_option("--config", debug_config, "JSON configuration file");
  debug->add_option("--out", debug_out, "output directory");

  auto* synth = app.add_subcommand("synth", "write a synthetic Cityscapes-layout toy dataset");
  fs::path synth_root;
  int synth_count = 5, synth_w = 512, synth_h = 256;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_root, "output root")->required();
  synth->add_option("--count", synth_count, "number of scenes");
  synth->add_option("--seed", synth_seed, "scene seed");
  synth->add_option("--width", synth_w, "image width");
  synth->add_option("--height", synth_h, "image height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path, seed, jobs, preview, input, output);
    if (*stats) return cmd_stats(stats_root);
    if (*debug) return cmd_debug_maps(debug_image, debug_config, debug_out);
    if (*synth) return cmd_synth(synth_root, synth_count, synth_seed, synth_w, synth_h);
  } catch (const ConfigError& e) {
    log(Level::Error, e.what());
    return 1;
  } catch (const DataError& e) {
    log(Level::Error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return 2;
  }
  return 0;
}
