#ifndef PEDSPAWN_PIPELINE_CONFIG_HPP
#define PEDSPAWN_PIPELINE_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "pedspawn/camera.hpp"
#include "pedspawn/error.hpp"
#include "pedspawn/ground_grid.hpp"
#include "pedspawn/isolation_forest.hpp"
#include "pedspawn/render.hpp"
#include "pedspawn/scene_analysis.hpp"

#ifndef PEDSPAWN_DEFAULT_ASSET_DIR
#define PEDSPAWN_DEFAULT_ASSET_DIR "assets"
#endif

namespace pedspawn::pipeline {

struct PipelineConfig {
  std::filesystem::path input_root;
  std::filesystem::path output_root;
  std::vector<std::filesystem::path> assets;  ///< OBJ files; empty means every *.obj in the asset dir
  std::filesystem::path asset_dir = PEDSPAWN_DEFAULT_ASSET_DIR;
  int peds_min = 1;
  int peds_max = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool preview = false;

  double max_range = kDefaultMaxRange;
  double ground_tau = 0.3;
  ObstacleBand obstacle_band{};

  double x_min = -20.0, x_max = 20.0, z_min = 0.0, z_max = 60.0;
  double cell_size = 0.25;
  SpawnParams spawn{};

  SpawnQuery query{};
  double height_min = 1.55;
  double height_max = 1.90;

  RenderParams render{};

  GridSpec grid_spec() const { return GridSpec::covering(x_min, x_max, z_min, z_max, cell_size); }

  /// Throws ConfigError on any violated constraint. Paths are checked only
  /// when check_paths is set.
  void validate(bool check_paths = true) const {
    auto fail = [](const std::string& why) { throw ConfigError("config: " + why); };
    if (peds_min < 0 || peds_min > peds_max || peds_max > kMaxInstancesPerImage) {
      fail("require 0 <= peds_min <= peds_max <= 999");
    }
    if (jobs < 1) fail("jobs must be >= 1");
    if (!(max_range > 0.0)) fail("camera.max_range must be positive");
    if (ground_tau < 0.0) fail("ground.tau must be non-negative");
    if (obstacle_band.min_height > obstacle_band.max_height) fail("collision band is empty");
    if (!(cell_size > 0.0) || !(x_max > x_min) || !(z_max > z_min)) fail("grid range or cell size invalid");
    if (spawn.contamination < 0.0 || spawn.contamination >= 1.0) fail("forest.contamination must be in [0, 1)");
    if (spawn.min_points_per_cell < 1) fail("grid.min_points_per_cell must be >= 1");
    if (spawn.forest.trees < 1 || spawn.forest.subsample < 2) fail("forest.trees >= 1 and forest.subsample >= 2 required");
    if (!(query.footprint_radius > 0.0)) fail("placement.footprint_radius must be positive");
    if (query.depth_min > query.depth_max) fail("placement depth range is empty");
    if (!(height_min > 0.0) || height_min > height_max) fail("placement height range invalid");
    if (render.ambient < 0.0 || render.ambient > 1.0) fail("render.ambient must be in [0, 1]");
    if (!(render.light_dir.norm() > 0.0)) fail("render.light_dir must be non-zero");
    if (check_paths) {
      if (input_root.empty() || !std::filesystem::is_directory(input_root)) {
        fail("input_root does not exist: " + input_root.string());
      }
      if (output_root.empty()) fail("output_root is required");
    }
  }
};

namespace detail {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Parses the JSON config document. Relative paths resolve against base_dir.
inline PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::read_if;
  PipelineConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    if (j.contains("input_root")) c.input_root = resolve(j.at("input_root").get<std::string>());
    if (j.contains("output_root")) c.output_root = resolve(j.at("output_root").get<std::string>());
    if (j.contains("asset_dir")) c.asset_dir = resolve(j.at("asset_dir").get<std::string>());
    if (j.contains("assets")) {
      for (const auto& a : j.at("assets")) c.assets.push_back(resolve(a.get<std::string>()));
    }
    read_if(j, "peds_min", c.peds_min);
    read_if(j, "peds_max", c.peds_max);
    read_if(j, "seed", c.seed);
    read_if(j, "jobs", c.jobs);
    read_if(j, "preview", c.preview);
    if (auto it = j.find("camera"); it != j.end()) read_if(*it, "max_range", c.max_range);
    if (auto it = j.find("ground"); it != j.end()) read_if(*it, "tau", c.ground_tau);
    if (auto it = j.find("collision"); it != j.end()) {
      read_if(*it, "min_height", c.obstacle_band.min_height);
      read_if(*it, "max_height", c.obstacle_band.max_height);
    }
    if (auto it = j.find("grid"); it != j.end()) {
      read_if(*it, "x_min", c.x_min);
      read_if(*it, "x_max", c.x_max);
      read_if(*it, "z_min", c.z_min);
      read_if(*it, "z_max", c.z_max);
      read_if(*it, "cell_size", c.cell_size);
      read_if(*it, "min_points_per_cell", c.spawn.min_points_per_cell);
    }
    if (auto it = j.find("forest"); it != j.end()) {
      read_if(*it, "trees", c.spawn.forest.trees);
      read_if(*it, "subsample", c.spawn.forest.subsample);
      read_if(*it, "contamination", c.spawn.contamination);
      read_if(*it, "spatial_features", c.spawn.spatial_features);
    }
    if (auto it = j.find("placement"); it != j.end()) {
      read_if(*it, "depth_min", c.query.depth_min);
      read_if(*it, "depth_max", c.query.depth_max);
      read_if(*it, "footprint_radius", c.query.footprint_radius);
      read_if(*it, "height_min", c.height_min);
      read_if(*it, "height_max", c.height_max);
    }
    if (auto it = j.find("render"); it != j.end()) {
      read_if(*it, "ambient", c.render.ambient);
      if (it->contains("light_dir")) {
        const auto v = it->at("light_dir").get<std::vector<double>>();
        if (v.size() != 3) throw ConfigError("config: render.light_dir needs 3 components");
        c.render.light_dir = {v[0], v[1], v[2]};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

/// Full effective configuration, used as the manifest's config snapshot.
inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json assets = nlohmann::json::array();
  for (const auto& a : c.assets) assets.push_back(a.filename().string());
  return {
      {"peds_min", c.peds_min},
      {"peds_max", c.peds_max},
      {"seed", c.seed},
      {"assets", assets},
      {"camera", {{"max_range", c.max_range}}},
      {"ground", {{"tau", c.ground_tau}}},
      {"collision", {{"min_height", c.obstacle_band.min_height}, {"max_height", c.obstacle_band.max_height}}},
      {"grid",
       {{"x_min", c.x_min},
        {"x_max", c.x_max},
        {"z_min", c.z_min},
        {"z_max", c.z_max},
        {"cell_size", c.cell_size},
        {"min_points_per_cell", c.spawn.min_points_per_cell}}},
      {"forest",
       {{"trees", c.spawn.forest.trees},
        {"subsample", c.spawn.forest.subsample},
        {"contamination", c.spawn.contamination},
        {"spatial_features", c.spawn.spatial_features}}},
      {"placement",
       {{"depth_min", c.query.depth_min},
        {"depth_max", c.query.depth_max},
        {"footprint_radius", c.query.footprint_radius},
        {"height_min", c.height_min},
        {"height_max", c.height_max}}},
      {"render",
       {{"ambient", c.render.ambient},
        {"light_dir", {c.render.light_dir.x(), c.render.light_dir.y(), c.render.light_dir.z()}}}},
      {"preview", c.preview},
  };
}

}  // namespace pedspawn::pipeline

#endif  // PEDSPAWN_PIPELINE_CONFIG_HPP
