#ifndef PEDSPAWN_RENDER_HPP
#define PEDSPAWN_RENDER_HPP

// Software rasterization of posed meshes through the dataset camera, hard
// binary compositing and ground-truth emission.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "pedspawn/camera.hpp"
#include "pedspawn/mesh.hpp"
#include "pedspawn/raster.hpp"

namespace pedspawn {

using AlphaMask = Raster<std::uint8_t, struct AlphaTag>;

/// One rendered placement: alpha == 1 exactly where depth is finite.
struct RenderLayer {
  RgbImage rgb;
  AlphaMask alpha;
  DepthMap depth;

  RenderLayer() = default;
  RenderLayer(int w, int h)
      : rgb(w, h, Rgb8{0, 0, 0}), alpha(w, h, 0), depth(w, h, std::numeric_limits<double>::infinity()) {}

  std::size_t coverage() const {
    return static_cast<std::size_t>(std::count(alpha.pixels().begin(), alpha.pixels().end(), std::uint8_t{1}));
  }
};

struct RenderParams {
  /// Direction the light travels, world (x, height, z) components.
  Eigen::Vector3d light_dir{0.3, -1.0, 0.5};
  double ambient = 0.25;
  double near_plane = 0.05;
};

namespace detail {

struct ClipVertex {
  Eigen::Vector3d cam;     // camera frame position
  Eigen::Vector3d normal;  // world frame
  Eigen::Vector2d uv;
};

inline ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  return {a.cam + t * (b.cam - a.cam), a.normal + t * (b.normal - a.normal), a.uv + t * (b.uv - a.uv)};
}

// Sutherland-Hodgman against z >= near.
inline std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri, double near) {
  std::vector<ClipVertex> out;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = tri[i];
    const ClipVertex& b = tri[(i + 1) % 3];
    const bool a_in = a.cam.z() >= near;
    const bool b_in = b.cam.z() >= near;
    if (a_in) out.push_back(a);
    if (a_in != b_in) out.push_back(lerp(a, b, (near - a.cam.z()) / (b.cam.z() - a.cam.z())));
  }
  return out;
}

struct ScreenVertex {
  double x, y, inv_z;
  const ClipVertex* src;
};

// Screen y grows downward; an edge a->b of a triangle whose interior has
// positive edge function is top (horizontal, interior below) or left
// (interior to its right). Pixels exactly on such edges are owned by the
// triangle, so abutting triangles never share or drop a pixel.
inline bool owns_edge(const ScreenVertex& a, const ScreenVertex& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

inline double edge_fn(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Same sign convention as edge_fn, but always evaluated from the same end of
// the edge, so the two triangles sharing an edge see exactly negated values.
inline double shared_edge_fn(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  const bool swapped = a.y > b.y || (a.y == b.y && a.x > b.x);
  return swapped ? -edge_fn(b, a, px, py) : edge_fn(a, b, px, py);
}

}  // namespace detail

/// Perspective z-buffer rasterization. Pixel (u, v) is sampled at image
/// coordinate (u, v), the same convention backproject uses. A fragment
/// survives only in front of a valid scene depth; invalid scene depth never
/// occludes. Shading: max(ambient, n . l) with l pointing toward the light.
inline RenderLayer rasterize(const TriangleMesh& mesh, const CameraCalibration& cal, const DepthMap& scene_depth,
                             const RenderParams& params = {}) {
  if (scene_depth.width() != cal.image_w || scene_depth.height() != cal.image_h) {
    throw std::invalid_argument("rasterize: scene depth does not match calibration image size");
  }
  const int w = cal.image_w;
  const int h = cal.image_h;
  RenderLayer layer(w, h);
  const CameraPose pose(cal);
  const Eigen::Vector3d to_light = -params.light_dir.normalized();
  const Eigen::Vector3d camera_center(0.0, cal.cam_height, 0.0);

  for (const auto& tri : mesh.triangles) {
    const Material& material = mesh.materials.at(static_cast<std::size_t>(tri.material));
    Eigen::Vector3d face = tri.face_normal();
    // two-sided: orient normals toward the viewer
    const double facing = face.dot(camera_center - tri.v[0].position);
    const double flip = facing < 0.0 ? -1.0 : 1.0;

    std::array<detail::ClipVertex, 3> cv;
    for (int k = 0; k < 3; ++k) {
      const auto& p = tri.v[k].position;
      const Eigen::Vector3d n = tri.v[k].normal.squaredNorm() > 0.0 ? tri.v[k].normal : face;
      cv[k] = {pose.to_camera({p.x(), p.z(), p.y()}), flip * n, tri.v[k].uv};
    }
    const auto poly = detail::clip_near(cv, params.near_plane);
    if (poly.size() < 3) continue;

    std::vector<detail::ScreenVertex> sv;
    sv.reserve(poly.size());
    for (const auto& c : poly) {
      sv.push_back({cal.fx * c.cam.x() / c.cam.z() + cal.cx, cal.fy * c.cam.y() / c.cam.z() + cal.cy, 1.0 / c.cam.z(), &c});
    }

    for (std::size_t k = 1; k + 1 < sv.size(); ++k) {
      detail::ScreenVertex a = sv[0], b = sv[k], c = sv[k + 1];
      double area = detail::edge_fn(a, b, c.x, c.y);
      if (area == 0.0 || !std::isfinite(area)) continue;
      if (area < 0.0) {
        std::swap(b, c);
        area = -area;
      }
      const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({a.x, b.x, c.x}))));
      const int x1 = std::min(w - 1, static_cast<int>(std::floor(std::max({a.x, b.x, c.x}))));
      const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({a.y, b.y, c.y}))));
      const int y1 = std::min(h - 1, static_cast<int>(std::floor(std::max({a.y, b.y, c.y}))));
      const bool own_bc = detail::owns_edge(b, c), own_ca = detail::owns_edge(c, a), own_ab = detail::owns_edge(a, b);

      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double e0 = detail::shared_edge_fn(b, c, x, y);  // weight of a
          const double e1 = detail::shared_edge_fn(c, a, x, y);  // weight of b
          const double e2 = detail::shared_edge_fn(a, b, x, y);  // weight of c
          if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) continue;
          if ((e0 == 0.0 && !own_bc) || (e1 == 0.0 && !own_ca) || (e2 == 0.0 && !own_ab)) continue;

          const double wa = e0 / area * a.inv_z, wb = e1 / area * b.inv_z, wc = e2 / area * c.inv_z;
          const double inv_z = wa + wb + wc;
          const double z = 1.0 / inv_z;
          if (!(z < layer.depth(x, y))) continue;
          const double scene = scene_depth(x, y);
          if (is_valid(scene) && !(z < scene)) continue;

          const Eigen::Vector3d n = (wa * a.src->normal + wb * b.src->normal + wc * c.src->normal) * z;
          const Eigen::Vector2d uv = (wa * a.src->uv + wb * b.src->uv + wc * c.src->uv) * z;
          const double len = n.norm();
          const double lambert = len > 0.0 ? std::max(0.0, n.dot(to_light) / len) : 0.0;
          const double intensity = std::max(params.ambient, lambert);
          const Rgb8 base = material.sample(uv);
          Rgb8 shaded;
          for (int ch = 0; ch < 3; ++ch) {
            shaded[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(base[ch] * intensity), 0L, 255L));
          }
          layer.rgb(x, y) = shaded;
          layer.alpha(x, y) = 1;
          layer.depth(x, y) = z;
        }
      }
    }
  }
  return layer;
}

/// Per-pixel nearest-layer resolution. winner(x, y) is the index of the
/// closest covering layer, or -1.
struct ResolvedLayers {
  RenderLayer combined;
  Raster<int> winner;
};

inline ResolvedLayers resolve_layers(std::span<const RenderLayer> layers, int w, int h) {
  ResolvedLayers out{RenderLayer(w, h), Raster<int>(w, h, -1)};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.rgb.width() != w || l.rgb.height() != h || !l.alpha.same_shape(l.rgb) || !l.depth.same_shape(l.rgb)) {
      throw std::invalid_argument("resolve_layers: layer dimension mismatch");
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (l.alpha(x, y) != 1 || !(l.depth(x, y) < out.combined.depth(x, y))) continue;
        out.combined.rgb(x, y) = l.rgb(x, y);
        out.combined.alpha(x, y) = 1;
        out.combined.depth(x, y) = l.depth(x, y);
        out.winner(x, y) = static_cast<int>(i);
      }
    }
  }
  return out;
}

/// Hard binary blend: layer colour where alpha == 1, frame colour elsewhere.
inline RgbImage composite(const RgbImage& frame, const RenderLayer& layer) {
  require_same_shape(frame, layer.rgb, "composite");
  require_same_shape(frame, layer.alpha, "composite");
  RgbImage out = frame;
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      if (layer.alpha(x, y) == 1) out(x, y) = layer.rgb(x, y);
    }
  }
  return out;
}

struct GroundTruth {
  LabelImage semantic;
  InstanceImage instance;
  std::vector<std::size_t> visible_pixels;   ///< per layer
  std::vector<std::uint16_t> instance_ids;   ///< per layer
};

inline constexpr int kMaxInstancesPerImage = 999;

/// Writes the person label and person_label * 1000 + index for every pixel a
/// layer wins; layer i gets index first_index + i. All other pixels keep the
/// base maps untouched.
inline GroundTruth emit_ground_truth(const LabelImage& base_semantic, const InstanceImage& base_instance,
                                     std::span<const RenderLayer> layers, std::uint8_t person_label = 24,
                                     int first_index = 1) {
  require_same_shape(base_semantic, base_instance, "emit_ground_truth");
  if (first_index < 0 || first_index + static_cast<int>(layers.size()) - 1 > kMaxInstancesPerImage) {
    throw std::invalid_argument("emit_ground_truth: more than 999 person instances in one image");
  }
  const int w = base_semantic.width();
  const int h = base_semantic.height();
  const auto resolved = resolve_layers(layers, w, h);
  GroundTruth gt{base_semantic, base_instance, std::vector<std::size_t>(layers.size(), 0), {}};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    gt.instance_ids.push_back(static_cast<std::uint16_t>(person_label * 1000 + first_index + static_cast<int>(i)));
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int win = resolved.winner(x, y);
      if (win < 0) continue;
      gt.semantic(x, y) = person_label;
      gt.instance(x, y) = gt.instance_ids[static_cast<std::size_t>(win)];
      ++gt.visible_pixels[static_cast<std::size_t>(win)];
    }
  }
  return gt;
}

/// Smallest 1-based person instance index not already used by the base map.
inline int next_person_index(const InstanceImage& base_instance, std::uint8_t person_label = 24) {
  int highest = 0;
  bool any = false;
  for (auto id : base_instance.pixels()) {
    if (id >= 1000 && id / 1000 == person_label) {
      highest = std::max(highest, id % 1000);
      any = true;
    }
  }
  return any ? highest + 1 : 1;
}

}  // namespace pedspawn

#endif  // PEDSPAWN_RENDER_HPP
