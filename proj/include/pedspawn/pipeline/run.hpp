#ifndef PEDSPAWN_PIPELINE_RUN_HPP
#define PEDSPAWN_PIPELINE_RUN_HPP

// Batch driver. Output layout under output_root:
//   leftImg8bit/<split>/<city>/<stem>_leftImg8bit.png        composited RGB
//   gtFine/<split>/<city>/<stem>_gtFine_labelIds.png         8-bit labels
//   gtFine/<split>/<city>/<stem>_gtFine_instanceIds.png      16-bit instances
//   manifests/<split>/<city>/<stem>_manifest.json            per-image record
//   preview/<split>/<city>/<stem>_preview.png                optional
//   run_manifest.json                                        all records, in id order
//
// Every image draws from its own stream seeded by (seed, scene id), and the
// manifest is assembled in discovery order, so outputs do not depend on the
// worker count.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "pedspawn/error.hpp"
#include "pedspawn/io/obj.hpp"
#include "pedspawn/io/png.hpp"
#include "pedspawn/io/sha256.hpp"
#include "pedspawn/pipeline/augment.hpp"
#include "pedspawn/pipeline/config.hpp"
#include "pedspawn/pipeline/discover.hpp"
#include "pedspawn/pipeline/preview.hpp"

namespace pedspawn::pipeline {

inline constexpr const char* kToolVersion = "pedspawn 1.0.0";

struct OutputPaths {
  fs::path rgb, label_ids, instance_ids, manifest, preview;
};

inline OutputPaths output_paths(const fs::path& root, const std::string& relative_dir, const std::string& stem) {
  return {root / "leftImg8bit" / relative_dir / (stem + kLeftSuffix),
          root / "gtFine" / relative_dir / (stem + "_gtFine_labelIds.png"),
          root / "gtFine" / relative_dir / (stem + "_gtFine_instanceIds.png"),
          root / "manifests" / relative_dir / (stem + "_manifest.json"),
          root / "preview" / relative_dir / (stem + "_preview.png")};
}

inline std::vector<fs::path> resolve_asset_paths(const PipelineConfig& config) {
  if (!config.assets.empty()) return config.assets;
  std::vector<fs::path> found;
  if (fs::is_directory(config.asset_dir)) {
    for (const auto& e : fs::directory_iterator(config.asset_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".obj" && e.path().stem().string().rfind("fixture_", 0) != 0) {
        found.push_back(e.path());
      }
    }
  }
  std::sort(found.begin(), found.end());
  if (found.empty()) throw ConfigError("no pedestrian assets found in " + config.asset_dir.string());
  return found;
}

inline std::vector<PedestrianAsset> load_assets(const std::vector<fs::path>& paths) {
  std::vector<PedestrianAsset> assets;
  for (const auto& p : paths) assets.push_back(io::load_asset(p));
  return assets;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

/// Writes one augmented sample; returns the per-image manifest json.
inline nlohmann::json write_sample(const fs::path& root, const SceneRef& ref, const AugmentedSample& sample, bool preview) {
  nlohmann::json record = record_to_json(sample.record);
  const OutputPaths out = output_paths(root, ref.relative_dir, ref.stem);
  std::error_code ec;
  for (const fs::path* p : {&out.rgb, &out.label_ids, &out.manifest}) {
    fs::create_directories(p->parent_path(), ec);
    if (ec) throw DataError("cannot create directory " + p->parent_path().string() + ": " + ec.message());
  }
  nlohmann::json files = nlohmann::json::object();
  if (!sample.record.skipped) {
    io::write_rgb_png(out.rgb, sample.rgb);
    io::write_gray_png(out.label_ids, sample.semantic);
    io::write_gray_png(out.instance_ids, sample.instance);
    files["rgb"] = io::sha256_file(out.rgb);
    files["label_ids"] = io::sha256_file(out.label_ids);
    files["instance_ids"] = io::sha256_file(out.instance_ids);
    if (preview) {
      fs::create_directories(out.preview.parent_path(), ec);
      if (ec) throw DataError("cannot create directory " + out.preview.parent_path().string());
      io::write_rgb_png(out.preview, preview_sheet(sample.rgb, sample.semantic, sample.instance));
      files["preview"] = io::sha256_file(out.preview);
    }
  }
  record["sha256"] = files;
  write_text_file(out.manifest, record.dump(2) + "\n");
  return record;
}

struct RunResult {
  nlohmann::json manifest;
  std::size_t processed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

using ProgressFn = std::function<void(const std::string& id, const AugmentRecord& record)>;

inline RunResult run(const PipelineConfig& config, const ProgressFn& progress = {}) {
  config.validate();
  const auto asset_paths = resolve_asset_paths(config);
  const auto assets = load_assets(asset_paths);
  PipelineConfig effective = config;
  effective.assets = asset_paths;

  Discovery found = discover(config.input_root);
  const auto& scenes = found.scenes;
  std::vector<std::optional<nlohmann::json>> records(scenes.size());
  std::vector<std::string> errors(scenes.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= scenes.size()) return;
      try {
        const SceneData data = load_scene(scenes[i]);
        Rng rng(derive_seed(config.seed, scenes[i].id));
        const AugmentedSample sample = augment_image(scenes[i].id, data, assets, effective, rng);
        records[i] = write_sample(config.output_root, scenes[i], sample, config.preview);
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(scenes[i].id, sample.record);
        }
      } catch (const std::exception& e) {
        errors[i] = scenes[i].id + ": " + e.what();
        abort.store(true);
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(std::max<std::size_t>(1, scenes.size()))));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::size_t written = 0;
  for (const auto& r : records) written += r.has_value();
  for (const auto& e : errors) {
    if (!e.empty()) {
      throw DataError("run aborted after writing " + std::to_string(written) + " of " + std::to_string(scenes.size()) +
                      " images (partial output under " + config.output_root.string() + "); first failure: " + e);
    }
  }

  RunResult result;
  result.warnings = found.warnings;
  nlohmann::json images = nlohmann::json::array();
  for (auto& r : records) {
    if (r->at("skipped").get<bool>()) ++result.skipped;
    ++result.processed;
    images.push_back(std::move(*r));
  }
  result.manifest = {{"tool", kToolVersion},
                     {"config", config_to_json(effective)},
                     {"warnings", found.warnings},
                     {"images", images}};
  fs::create_directories(config.output_root);
  write_text_file(config.output_root / "run_manifest.json", result.manifest.dump(2) + "\n");
  return result;
}

}  // namespace pedspawn::pipeline

#endif  // PEDSPAWN_PIPELINE_RUN_HPP
