#ifndef PEDSPAWN_SYNTHETIC_HPP
#define PEDSPAWN_SYNTHETIC_HPP

// Analytic stereo scenes (ground plane + axis-aligned boxes) rendered by ray
// casting into the same artifacts a Cityscapes frame provides. Used for toy
// datasets and as ground truth in tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pedspawn/camera.hpp"
#include "pedspawn/io/cityscapes.hpp"
#include "pedspawn/io/png.hpp"
#include "pedspawn/pipeline/augment.hpp"
#include "pedspawn/pipeline/run.hpp"
#include "pedspawn/rng.hpp"

namespace pedspawn::synthetic {

inline constexpr std::uint8_t kRoadLabel = 7;
inline constexpr std::uint8_t kBuildingLabel = 11;
inline constexpr std::uint8_t kSkyLabel = 23;

/// Box resting on the ground: [x0, x1] x [z0, z1] footprint, top at `height`.
struct Box {
  double x0 = 0.0, x1 = 1.0, z0 = 0.0, z1 = 1.0, height = 1.0;
  Rgb8 color{150, 90, 60};
  std::uint8_t label = kBuildingLabel;
};

struct Scene {
  CameraCalibration cal;
  std::vector<Box> boxes;
  double ground_range = 80.0;  ///< ground beyond this camera depth returns no disparity
  bool ground = true;
};

/// Cityscapes-like camera resampled to width x height.
inline CameraCalibration toy_calibration(int width = 512, int height = 256) {
  CameraCalibration c;
  const double s = width / 2048.0;
  c.fx = 2262.52 * s;
  c.fy = 2265.3017905988554 * (height / 1024.0);
  c.cx = 1096.98 * s;
  c.cy = 513.137 * (height / 1024.0);
  c.baseline = 0.209313;
  c.cam_height = 1.22;
  c.pitch = 0.038;
  c.roll = 0.0;
  c.yaw = -0.0195;
  c.image_w = width;
  c.image_h = height;
  return c;
}

enum class HitKind { None, Ground, Box };

struct Hit {
  HitKind kind = HitKind::None;
  int box = -1;
  double depth = 0.0;  ///< camera-frame Z
  WorldPoint point;
};

/// First surface hit by the ray through pixel (u, v).
inline Hit cast(const Scene& scene, const CameraPose& pose, double u, double v) {
  const auto& cal = scene.cal;
  // scaled so the camera-frame Z component is 1: ray parameter t == camera depth
  const Eigen::Vector3d dir_cam((u - cal.cx) / cal.fx, (v - cal.cy) / cal.fy, 1.0);
  const Eigen::Vector3d level = pose.rotation() * dir_cam;
  const double dx = level.x(), dz = level.z(), dh = -level.y();
  const double ox = 0.0, oz = 0.0, oh = cal.cam_height;

  Hit best;
  double best_t = std::numeric_limits<double>::infinity();
  if (scene.ground && dh < 0.0) {
    const double t = -oh / dh;
    if (t <= scene.ground_range) {
      best_t = t;
      best.kind = HitKind::Ground;
    }
  }
  for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
    const Box& b = scene.boxes[i];
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    auto slab = [&](double o, double d, double lo, double hi) {
      if (d == 0.0) return o >= lo && o <= hi;
      double a = (lo - o) / d, c = (hi - o) / d;
      if (a > c) std::swap(a, c);
      t0 = std::max(t0, a);
      t1 = std::min(t1, c);
      return t0 <= t1;
    };
    if (slab(ox, dx, b.x0, b.x1) && slab(oz, dz, b.z0, b.z1) && slab(oh, dh, 0.0, b.height) && t0 > 0.0 && t0 < best_t) {
      best_t = t0;
      best.kind = HitKind::Box;
      best.box = static_cast<int>(i);
    }
  }
  if (best.kind != HitKind::None) {
    best.depth = best_t;
    best.point = {ox + best_t * dx, oz + best_t * dz, oh + best_t * dh};
  }
  return best;
}

inline Rgb8 ground_color(const WorldPoint& p) {
  const bool tile = (static_cast<long>(std::floor(p.x)) + static_cast<long>(std::floor(p.z))) % 2 == 0;
  return tile ? Rgb8{112, 108, 104} : Rgb8{96, 94, 92};
}

/// Ray-cast the scene into Cityscapes-style inputs. Box instances get plain
/// label ids (non-instance classes) in the instance map.
inline pipeline::SceneData render(const Scene& scene) {
  scene.cal.validate();
  const int w = scene.cal.image_w, h = scene.cal.image_h;
  pipeline::SceneData out;
  out.cal = scene.cal;
  out.rgb = RgbImage(w, h);
  out.disparity = DisparityMap(w, h, kInvalid);
  out.labels = LabelImage(w, h, kSkyLabel);
  out.instances = InstanceImage(w, h, kSkyLabel);
  const CameraPose pose(scene.cal);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Hit hit = cast(scene, pose, u, v);
      switch (hit.kind) {
        case HitKind::None:
          out.rgb(u, v) = {135, 170, 215};
          continue;
        case HitKind::Ground:
          out.rgb(u, v) = ground_color(hit.point);
          out.labels(u, v) = out.instances(u, v) = kRoadLabel;
          break;
        case HitKind::Box: {
          const Box& b = scene.boxes[static_cast<std::size_t>(hit.box)];
          out.rgb(u, v) = b.color;
          out.labels(u, v) = out.instances(u, v) = b.label;
          break;
        }
      }
      out.disparity(u, v) = scene.cal.fx * scene.cal.baseline / hit.depth;
    }
  }
  return out;
}

/// Quantizes disparity exactly as a round trip through the 16-bit PNG would.
inline DisparityMap quantize(const DisparityMap& d) { return io::decode_disparity(io::encode_disparity(d)); }

/// Writes the five Cityscapes artifacts of one scene under root.
inline void write_scene(const std::filesystem::path& root, const std::string& relative_dir, const std::string& stem,
                        const pipeline::SceneData& data) {
  const auto ref = pipeline::scene_paths(root, relative_dir, stem);
  for (const auto* p : {&ref.rgb, &ref.disparity, &ref.camera, &ref.label_ids}) {
    std::filesystem::create_directories(p->parent_path());
  }
  io::write_rgb_png(ref.rgb, data.rgb);
  io::write_disparity_png(ref.disparity, data.disparity);
  pipeline::write_text_file(ref.camera, io::calibration_to_json(data.cal).dump(4) + "\n");
  io::write_gray_png(ref.label_ids, data.labels);
  io::write_gray_png(ref.instance_ids, data.instances);
}

/// Random street-like scene: open ground with a few boxes (cars, poles) kept
/// off a free corridor in front of the camera.
inline Scene random_scene(std::uint64_t seed, const CameraCalibration& cal) {
  Rng rng(seed);
  Scene s;
  s.cal = cal;
  const int n = uniform_int(rng, 2, 5);
  for (int i = 0; i < n; ++i) {
    Box b;
    const bool left = uniform01(rng) < 0.5;
    const double x = left ? uniform_real(rng, -9.0, -3.0) : uniform_real(rng, 3.0, 9.0);
    const double z = uniform_real(rng, 7.0, 28.0);
    const double wx = uniform_real(rng, 0.4, 2.0), wz = uniform_real(rng, 0.4, 4.5);
    b.x0 = x - wx / 2;
    b.x1 = x + wx / 2;
    b.z0 = z - wz / 2;
    b.z1 = z + wz / 2;
    b.height = uniform_real(rng, 0.8, 1.6);
    b.color = {static_cast<std::uint8_t>(uniform_int(rng, 40, 220)), static_cast<std::uint8_t>(uniform_int(rng, 40, 220)),
               static_cast<std::uint8_t>(uniform_int(rng, 40, 220))};
    b.label = 26;  // car
    s.boxes.push_back(b);
  }
  return s;
}

/// A toy Cityscapes tree of `count` random scenes under <root>/{...}/train/toy/.
inline std::vector<std::string> write_toy_dataset(const std::filesystem::path& root, int count, std::uint64_t seed,
                                                  int width = 512, int height = 256) {
  std::vector<std::string> stems;
  const auto cal = toy_calibration(width, height);
  for (int i = 0; i < count; ++i) {
    char stem[64];
    std::snprintf(stem, sizeof(stem), "toy_%06d_%06d", i, 19);
    write_scene(root, "train/toy", stem, render(random_scene(derive_seed(seed, static_cast<std::uint64_t>(i)), cal)));
    stems.push_back(stem);
  }
  return stems;
}

}  // namespace pedspawn::synthetic

#endif  // PEDSPAWN_SYNTHETIC_HPP
