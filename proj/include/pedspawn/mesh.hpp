#ifndef PEDSPAWN_MESH_HPP
#define PEDSPAWN_MESH_HPP

// Triangle meshes for pedestrian assets. Asset and world vertices share the
// (x, height, z) component order: x right, height up, z forward.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pedspawn/raster.hpp"

namespace pedspawn {

struct MeshVertex {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  ///< zero when the source had none
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
};

struct Material {
  std::string name = "default";
  Rgb8 diffuse{200, 200, 200};
  std::shared_ptr<const RgbImage> texture;  ///< optional, sampled with uv

  Rgb8 sample(const Eigen::Vector2d& uv) const {
    if (!texture || texture->empty()) return diffuse;
    const double u = uv.x() - std::floor(uv.x());
    const double v = uv.y() - std::floor(uv.y());
    const int tx = std::clamp(static_cast<int>(u * texture->width()), 0, texture->width() - 1);
    const int ty = std::clamp(static_cast<int>((1.0 - v) * texture->height()), 0, texture->height() - 1);
    return (*texture)(tx, ty);
  }
};

struct MeshTriangle {
  std::array<MeshVertex, 3> v;
  int material = 0;

  Eigen::Vector3d face_normal() const {
    const Eigen::Vector3d n = (v[1].position - v[0].position).cross(v[2].position - v[0].position);
    const double len = n.norm();
    return len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::Zero();
  }
};

struct TriangleMesh {
  std::vector<MeshTriangle> triangles;
  std::vector<Material> materials{Material{}};

  struct Bounds {
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
  };

  Bounds bounds() const {
    Bounds b{Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity()),
             Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity())};
    for (const auto& t : triangles) {
      for (const auto& v : t.v) {
        b.lo = b.lo.cwiseMin(v.position);
        b.hi = b.hi.cwiseMax(v.position);
      }
    }
    return b;
  }
};

struct PedestrianAsset {
  std::string asset_id;
  TriangleMesh mesh;
  double native_height = 0.0;  ///< vertical extent of the mesh, meters

  /// Builds an asset from a mesh; native height is the mesh's vertical extent.
  static PedestrianAsset from_mesh(std::string id, TriangleMesh mesh) {
    if (mesh.triangles.empty()) throw std::invalid_argument("PedestrianAsset: mesh has no triangles");
    for (const auto& t : mesh.triangles) {
      for (const auto& v : t.v) {
        if (!v.position.allFinite()) throw std::invalid_argument("PedestrianAsset: non-finite vertex in " + id);
      }
      if (t.material < 0 || t.material >= static_cast<int>(mesh.materials.size())) {
        throw std::invalid_argument("PedestrianAsset: material index out of range in " + id);
      }
    }
    const auto b = mesh.bounds();
    PedestrianAsset a{std::move(id), std::move(mesh), b.hi.y() - b.lo.y()};
    return a;
  }
};

struct Placement {
  std::string asset_id;
  double x = 0.0;
  double z = 0.0;
  double heading = 0.0;        ///< radians, rotation about the vertical axis
  double target_height = 1.75; ///< meters
  int instance_index = 1;      ///< 1-based per image
};

/// Scales the asset to the target height, turns it by the heading about the
/// vertical axis and drops it so its lowest vertex touches the ground at
/// (placement.x, placement.z). The asset's own x/z origin is the pivot.
inline TriangleMesh pose_mesh(const PedestrianAsset& asset, const Placement& placement) {
  if (!(asset.native_height > 0.0) || !std::isfinite(asset.native_height)) {
    throw std::invalid_argument("pose_mesh: asset '" + asset.asset_id + "' has degenerate height");
  }
  if (!(placement.target_height > 0.0)) throw std::invalid_argument("pose_mesh: target height must be positive");
  const double s = placement.target_height / asset.native_height;
  const double c = std::cos(placement.heading);
  const double sn = std::sin(placement.heading);
  const double base = asset.mesh.bounds().lo.y();

  auto turn = [&](const Eigen::Vector3d& p) { return Eigen::Vector3d(c * p.x() + sn * p.z(), p.y(), -sn * p.x() + c * p.z()); };

  TriangleMesh out;
  out.materials = asset.mesh.materials;
  out.triangles.reserve(asset.mesh.triangles.size());
  for (const auto& t : asset.mesh.triangles) {
    MeshTriangle w = t;
    for (auto& v : w.v) {
      const Eigen::Vector3d r = turn(v.position * s);
      v.position = Eigen::Vector3d(r.x() + placement.x, (v.position.y() - base) * s, r.z() + placement.z);
      v.normal = turn(v.normal);
    }
    out.triangles.push_back(std::move(w));
  }
  return out;
}

}  // namespace pedspawn

#endif  // PEDSPAWN_MESH_HPP
