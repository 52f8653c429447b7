#ifndef PEDSPAWN_SCENE_ANALYSIS_HPP
#define PEDSPAWN_SCENE_ANALYSIS_HPP

// Spawn map and collision map estimation from a world-frame stereo cloud.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <functional>
#include <iterator>
#include <numeric>
#include <span>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pedspawn/camera.hpp"
#include "pedspawn/ground_grid.hpp"
#include "pedspawn/isolation_forest.hpp"
#include "pedspawn/rng.hpp"

namespace pedspawn {

/// Points whose height lies in [-tau, +tau]. Order preserving.
inline WorldCloud ground_candidates(const WorldCloud& cloud, double tau = 0.3) {
  if (tau < 0.0) throw std::invalid_argument("ground_candidates: tau must be non-negative");
  WorldCloud out;
  std::copy_if(cloud.begin(), cloud.end(), std::back_inserter(out),
               [tau](const WorldCloudPoint& p) { return p.position.height >= -tau && p.position.height <= tau; });
  return out;
}

using GroundFeature = std::array<double, 3>;

inline GroundFeature ground_feature(const WorldPoint& p) { return {p.x, p.z, p.height}; }

inline IsolationForest<3> fit_isolation_forest(std::span<const GroundFeature> points, const IsolationForestParams& params) {
  return IsolationForest<3>::fit(points, params);
}

struct SpawnParams {
  double contamination = 0.02;
  int min_points_per_cell = 3;
  IsolationForestParams forest{};
  /// Score candidates on (x, z, height) instead of height alone. Spatial
  /// features make the grid periphery look anomalous on a uniform plane.
  bool spatial_features = false;
};

struct SpawnMap {
  GroundGrid grid;
  WorldCloud retained;  ///< ground points that survived outlier removal
  WorldCloud dropped;   ///< ground candidates rejected as outliers or outside the grid
};

/// Spawnable iff at least min_points retained ground points fall in the cell.
inline GroundGrid count_spawn_cells(const WorldCloud& retained, const GridSpec& spec, int min_points) {
  GroundGrid grid(spec);
  std::vector<int> counts(static_cast<std::size_t>(spec.nx) * spec.nz, 0);
  for (const auto& p : retained) {
    if (auto c = spec.cell_of(p.position.x, p.position.z)) ++counts[static_cast<std::size_t>(c->second) * spec.nx + c->first];
  }
  for (int iz = 0; iz < spec.nz; ++iz) {
    for (int ix = 0; ix < spec.nx; ++ix) {
      if (counts[static_cast<std::size_t>(iz) * spec.nx + ix] >= min_points) grid.set(ix, iz, CellState::Spawnable);
    }
  }
  return grid;
}

inline std::vector<double> ground_scores(const WorldCloud& points, const SpawnParams& params) {
  if (params.spatial_features) {
    std::vector<GroundFeature> features(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) features[i] = ground_feature(points[i].position);
    return fit_isolation_forest(features, params.forest).score(std::span<const GroundFeature>(features));
  }
  using Height = IsolationForest<1>::Point;
  std::vector<Height> features(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) features[i] = {points[i].position.height};
  return IsolationForest<1>::fit(features, params.forest).score(std::span<const Height>(features));
}

/// Isolation-forest cleanup of the ground candidates followed by cell counting.
/// Candidates outside the grid never reach the forest. A candidate is dropped
/// when its score is strictly above the score at rank floor(contamination * n),
/// so at most that many go and ties at the cut are kept.
inline SpawnMap build_spawn_map(const WorldCloud& candidates, const GridSpec& spec, const SpawnParams& params = {}) {
  if (params.contamination < 0.0 || params.contamination >= 1.0) {
    throw std::invalid_argument("build_spawn_map: contamination must be in [0, 1)");
  }
  SpawnMap result{GroundGrid(spec), {}, {}};
  WorldCloud inside;
  for (const auto& p : candidates) {
    (spec.cell_of(p.position.x, p.position.z) ? inside : result.dropped).push_back(p);
  }
  const auto n_drop = static_cast<std::size_t>(std::floor(params.contamination * static_cast<double>(inside.size())));
  if (n_drop == 0 || inside.size() < 2) {
    result.retained = std::move(inside);
  } else {
    const auto scores = ground_scores(inside, params);
    std::vector<double> sorted = scores;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n_drop), sorted.end(), std::greater<>());
    const double cut = sorted[n_drop];
    for (std::size_t i = 0; i < inside.size(); ++i) (scores[i] > cut ? result.dropped : result.retained).push_back(inside[i]);
  }
  result.grid = count_spawn_cells(result.retained, spec, params.min_points_per_cell);
  return result;
}

struct ObstacleBand {
  double min_height = 0.1;
  double max_height = 2.5;
};

/// Blocks every cell holding at least one obstacle point (any point not kept as
/// spawn-map ground) whose height lies in the band. Blocked overrides spawnable.
inline GroundGrid build_collision_map(const WorldCloud& obstacles, const GroundGrid& spawn, const ObstacleBand& band = {}) {
  GroundGrid grid = spawn;
  const auto& spec = grid.spec();
  for (const auto& p : obstacles) {
    if (p.position.height < band.min_height || p.position.height > band.max_height) continue;
    if (auto c = spec.cell_of(p.position.x, p.position.z)) grid.set(c->first, c->second, CellState::Blocked);
  }
  return grid;
}

/// Demotes spawnable cells that are not entirely inside the image to unknown:
/// the part of such a cell outside the view may hold an unseen obstacle.
inline void restrict_to_view(GroundGrid& grid, const CameraCalibration& cal) {
  const CameraPose pose(cal);
  const auto& spec = grid.spec();
  auto in_view = [&](double x, double z) {
    const auto p = project(pose.to_camera({x, z, 0.0}), cal);
    return p && p->u >= 0.0 && p->v >= 0.0 && p->u <= cal.image_w && p->v <= cal.image_h;
  };
  for (int iz = 0; iz < grid.nz(); ++iz) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      if (grid.at(ix, iz) != CellState::Spawnable) continue;
      const double x0 = spec.x_min + ix * spec.cell_size, z0 = spec.z_min + iz * spec.cell_size;
      const double x1 = x0 + spec.cell_size, z1 = z0 + spec.cell_size;
      if (!(in_view(x0, z0) && in_view(x1, z0) && in_view(x0, z1) && in_view(x1, z1))) {
        grid.set(ix, iz, CellState::Unknown);
      }
    }
  }
}

struct SpawnQuery {
  double depth_min = 4.0;
  double depth_max = 30.0;
  double footprint_radius = 0.35;
};

/// Cells whose centered footprint touches only spawnable cells, lies inside the
/// grid, and whose center sits at a camera depth inside the query range.
inline std::vector<std::pair<int, int>> eligible_spawn_cells(const GroundGrid& grid, const CameraPose& pose,
                                                             const SpawnQuery& q) {
  std::vector<std::pair<int, int>> out;
  const auto& spec = grid.spec();
  for (int iz = 0; iz < grid.nz(); ++iz) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      if (grid.at(ix, iz) != CellState::Spawnable) continue;
      const Footprint f{spec.center_x(ix), spec.center_z(iz), q.footprint_radius};
      if (!footprint_inside(spec, f)) continue;
      const double depth = pose.to_camera({f.x, f.z, 0.0}).z();
      if (depth < q.depth_min || depth > q.depth_max) continue;
      bool clear = true;
      for_each_disc_cell(spec, f, [&](int jx, int jz) { clear = clear && grid.at(jx, jz) == CellState::Spawnable; });
      if (clear) out.emplace_back(ix, iz);
    }
  }
  return out;
}

/// Uniform draw over eligible cells; std::nullopt once nothing is eligible.
inline std::optional<Footprint> sample_spawn(const GroundGrid& grid, Rng& rng, const CameraPose& pose, const SpawnQuery& q) {
  if (!(q.footprint_radius > 0.0)) throw std::invalid_argument("sample_spawn: footprint radius must be positive");
  const auto cells = eligible_spawn_cells(grid, pose, q);
  if (cells.empty()) return std::nullopt;
  const auto [ix, iz] = cells[uniform_index(rng, cells.size())];
  return Footprint{grid.spec().center_x(ix), grid.spec().center_z(iz), q.footprint_radius};
}

}  // namespace pedspawn

#endif  // PEDSPAWN_SCENE_ANALYSIS_HPP
