#ifndef PEDSPAWN_PIPELINE_AUGMENT_HPP
#define PEDSPAWN_PIPELINE_AUGMENT_HPP

// Single-image augmentation: stereo cloud -> spawn map -> collision map ->
// repeated {sample, pose, render, occupy} -> composite + ground truth.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"

#include "pedspawn/camera.hpp"
#include "pedspawn/io/cityscapes.hpp"
#include "pedspawn/io/png.hpp"
#include "pedspawn/mesh.hpp"
#include "pedspawn/pipeline/config.hpp"
#include "pedspawn/pipeline/discover.hpp"
#include "pedspawn/render.hpp"
#include "pedspawn/rng.hpp"
#include "pedspawn/scene_analysis.hpp"

namespace pedspawn::pipeline {

/// Decoded inputs of one scene.
struct SceneData {
  RgbImage rgb;
  DisparityMap disparity;
  CameraCalibration cal;
  LabelImage labels;
  InstanceImage instances;
};

inline SceneData load_scene(const SceneRef& ref) {
  SceneData s;
  s.rgb = io::read_rgb_png(ref.rgb);
  s.disparity = io::read_disparity_png(ref.disparity);
  s.cal = io::read_calibration(ref.camera, s.rgb.width(), s.rgb.height());
  s.labels = io::read_gray_png<LabelImage>(ref.label_ids);
  s.instances = io::read_gray_png<InstanceImage>(ref.instance_ids);
  if (!s.rgb.same_shape(s.disparity) || !s.rgb.same_shape(s.labels) || !s.rgb.same_shape(s.instances)) {
    throw DataError("scene " + ref.id + ": image, disparity and ground-truth sizes differ");
  }
  return s;
}

struct PlacementRecord {
  Placement placement;
  double footprint_radius = 0.0;
  double camera_depth = 0.0;
  std::uint16_t instance_id = 0;
  std::size_t visible_pixels = 0;
};

struct SpawnStats {
  std::size_t cloud_points = 0;
  std::size_t ground_candidates = 0;
  std::size_t ground_retained = 0;
  std::size_t spawnable_cells = 0;
  std::size_t blocked_cells = 0;
};

struct AugmentRecord {
  std::string id;
  bool skipped = false;
  std::string skip_reason;
  int requested = 0;
  bool exhausted = false;
  SpawnStats spawn;
  std::vector<PlacementRecord> placements;
};

struct AugmentedSample {
  RgbImage rgb;
  LabelImage semantic;
  InstanceImage instance;
  AugmentRecord record;
  GroundGrid spawn_map;      ///< before collision tracking
  GroundGrid collision_map;  ///< final state including placed pedestrians
  WorldCloud cloud;
};

inline AugmentedSample augment_image(const std::string& id, const SceneData& scene,
                                     const std::vector<PedestrianAsset>& assets, const PipelineConfig& config, Rng& rng) {
  if (assets.empty() && config.peds_max > 0) throw ConfigError("no pedestrian assets loaded");
  AugmentedSample out;
  out.rgb = scene.rgb;
  out.semantic = scene.labels;
  out.instance = scene.instances;
  out.record.id = id;
  const GridSpec spec = config.grid_spec();
  out.spawn_map = GroundGrid(spec);
  out.collision_map = GroundGrid(spec);

  const DepthMap depth = disparity_to_depth(scene.disparity, scene.cal, config.max_range);
  out.cloud = to_world(backproject(depth, scene.cal), scene.cal);
  out.record.spawn.cloud_points = out.cloud.size();
  if (out.cloud.empty()) {
    out.record.skipped = true;
    out.record.skip_reason = "no valid disparity";
    return out;
  }

  const WorldCloud candidates = ground_candidates(out.cloud, config.ground_tau);
  SpawnParams spawn_params = config.spawn;
  spawn_params.forest.seed = rng();
  SpawnMap spawn = build_spawn_map(candidates, spec, spawn_params);

  Raster<std::uint8_t> is_ground(scene.cal.image_w, scene.cal.image_h, 0);
  for (const auto& p : spawn.retained) is_ground(p.u, p.v) = 1;
  WorldCloud obstacles;
  for (const auto& p : out.cloud) {
    if (!is_ground(p.u, p.v)) obstacles.push_back(p);
  }
  out.spawn_map = spawn.grid;
  GroundGrid grid = build_collision_map(obstacles, spawn.grid, config.obstacle_band);
  restrict_to_view(grid, scene.cal);

  out.record.spawn.ground_candidates = candidates.size();
  out.record.spawn.ground_retained = spawn.retained.size();
  out.record.spawn.spawnable_cells = grid.count(CellState::Spawnable);
  out.record.spawn.blocked_cells = grid.count(CellState::Blocked);

  const CameraPose pose(scene.cal);
  const int requested = uniform_int(rng, config.peds_min, config.peds_max);
  out.record.requested = requested;
  const int first_index = next_person_index(scene.instances, io::kPersonLabel);
  if (first_index + requested - 1 > kMaxInstancesPerImage) {
    throw DataError("scene " + id + ": person instance ids would exceed 999");
  }

  std::vector<RenderLayer> layers;
  for (int k = 0; k < requested; ++k) {
    const auto footprint = sample_spawn(grid, rng, pose, config.query);
    if (!footprint) {
      out.record.exhausted = true;
      break;
    }
    const PedestrianAsset& asset = assets[uniform_index(rng, assets.size())];
    Placement placement;
    placement.asset_id = asset.asset_id;
    placement.x = footprint->x;
    placement.z = footprint->z;
    placement.heading = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
    placement.target_height = uniform_real(rng, config.height_min, config.height_max);
    placement.instance_index = first_index + k;

    layers.push_back(rasterize(pose_mesh(asset, placement), scene.cal, depth, config.render));
    occupy(grid, *footprint);

    PlacementRecord rec;
    rec.placement = placement;
    rec.footprint_radius = footprint->radius;
    rec.camera_depth = pose.to_camera({footprint->x, footprint->z, 0.0}).z();
    out.record.placements.push_back(rec);
  }
  out.collision_map = grid;

  const auto resolved = resolve_layers(layers, scene.cal.image_w, scene.cal.image_h);
  out.rgb = composite(scene.rgb, resolved.combined);
  GroundTruth gt = emit_ground_truth(scene.labels, scene.instances, layers, io::kPersonLabel, first_index);
  out.semantic = std::move(gt.semantic);
  out.instance = std::move(gt.instance);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.record.placements[i].instance_id = gt.instance_ids[i];
    out.record.placements[i].visible_pixels = gt.visible_pixels[i];
  }
  return out;
}

inline nlohmann::json record_to_json(const AugmentRecord& r) {
  nlohmann::json placements = nlohmann::json::array();
  for (const auto& p : r.placements) {
    placements.push_back({{"asset_id", p.placement.asset_id},
                          {"x", p.placement.x},
                          {"z", p.placement.z},
                          {"heading", p.placement.heading},
                          {"target_height", p.placement.target_height},
                          {"instance_index", p.placement.instance_index},
                          {"instance_id", p.instance_id},
                          {"footprint_radius", p.footprint_radius},
                          {"camera_depth", p.camera_depth},
                          {"visible_pixels", p.visible_pixels}});
  }
  return {{"id", r.id},
          {"skipped", r.skipped},
          {"skip_reason", r.skip_reason},
          {"requested", r.requested},
          {"placed", r.placements.size()},
          {"exhausted", r.exhausted},
          {"spawn",
           {{"cloud_points", r.spawn.cloud_points},
            {"ground_candidates", r.spawn.ground_candidates},
            {"ground_retained", r.spawn.ground_retained},
            {"spawnable_cells", r.spawn.spawnable_cells},
            {"blocked_cells", r.spawn.blocked_cells}}},
          {"placements", placements}};
}

}  // namespace pedspawn::pipeline

#endif  // PEDSPAWN_PIPELINE_AUGMENT_HPP
