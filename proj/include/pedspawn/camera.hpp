#ifndef PEDSPAWN_CAMERA_HPP
#define PEDSPAWN_CAMERA_HPP

// Pinhole stereo camera: disparity -> depth -> point cloud, forward projection
// and the rigid camera <-> world transform.
//
// Conventions:
//   camera frame  X right, Y down, Z forward (optical axis), meters
//   world frame   x right, z forward on the ground plane, height up; the
//                 ground is height == 0 and the camera sits at
//                 (0, cam_height, 0) in world coordinates
//   extrinsics    Cityscapes sign conventions: positive pitch tilts the
//                 optical axis down, positive yaw turns it left, positive
//                 roll lowers the right image border

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "pedspawn/raster.hpp"

namespace pedspawn {

inline constexpr double kInvalid = std::numeric_limits<double>::quiet_NaN();

/// True for finite, strictly positive disparity or depth samples.
inline bool is_valid(double value) { return std::isfinite(value) && value > 0.0; }

struct CameraCalibration {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double baseline = 0.0;    ///< stereo baseline, meters
  double cam_height = 0.0;  ///< optical center above ground, meters
  double pitch = 0.0;
  double roll = 0.0;
  double yaw = 0.0;
  int image_w = 0;
  int image_h = 0;

  void validate() const {
    auto fail = [](const std::string& why) { throw std::invalid_argument("CameraCalibration: " + why); };
    if (!(fx > 0.0) || !(fy > 0.0)) fail("focal lengths must be positive");
    if (!(baseline > 0.0)) fail("baseline must be positive");
    if (image_w <= 0 || image_h <= 0) fail("image size must be positive");
    if (!(cx >= 0.0 && cx < image_w) || !(cy >= 0.0 && cy < image_h)) fail("principal point outside image");
    if (!std::isfinite(pitch) || !std::isfinite(roll) || !std::isfinite(yaw) || !std::isfinite(cam_height)) {
      fail("extrinsics must be finite");
    }
  }

  /// Same camera with the sensor resampled by `factor` (intrinsics scale, extrinsics unchanged).
  CameraCalibration scaled(double factor) const {
    CameraCalibration out = *this;
    out.fx *= factor;
    out.fy *= factor;
    out.cx *= factor;
    out.cy *= factor;
    out.image_w = static_cast<int>(std::lround(image_w * factor));
    out.image_h = static_cast<int>(std::lround(image_h * factor));
    return out;
  }
};

using DisparityMap = Raster<double, struct DisparityTag>;
using DepthMap = Raster<double, struct DepthTag>;

struct CloudPoint {
  Eigen::Vector3d position;  ///< camera frame
  int u = 0;
  int v = 0;
};
using PointCloud = std::vector<CloudPoint>;

struct WorldPoint {
  double x = 0.0;
  double z = 0.0;
  double height = 0.0;
};

struct WorldCloudPoint {
  WorldPoint position;
  int u = 0;
  int v = 0;
};
using WorldCloud = std::vector<WorldCloudPoint>;

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

inline constexpr double kDefaultMaxRange = 200.0;

/// fx * baseline / disparity, rounded as if evaluated exactly. The product is
/// carried as an unevaluated double-double sum and the quotient gets one
/// Newton correction, so the result does not pick up the two independent
/// roundings of the naive expression.
inline double depth_from_disparity(double fx, double baseline, double disparity) {
  const double p = fx * baseline;
  const double p_err = std::fma(fx, baseline, -p);
  const double q = p / disparity;
  const double rem = std::fma(-q, disparity, p) + p_err;
  return q + rem / disparity;
}

inline DepthMap disparity_to_depth(const DisparityMap& disparity, const CameraCalibration& cal,
                                   double max_range = kDefaultMaxRange) {
  if (disparity.width() != cal.image_w || disparity.height() != cal.image_h) {
    throw std::invalid_argument("disparity_to_depth: disparity map is " + std::to_string(disparity.width()) + "x" +
                                std::to_string(disparity.height()) + " but calibration expects " +
                                std::to_string(cal.image_w) + "x" + std::to_string(cal.image_h));
  }
  DepthMap depth(disparity.width(), disparity.height(), kInvalid);
  auto src = disparity.pixels();
  auto dst = depth.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!is_valid(src[i])) continue;
    const double z = depth_from_disparity(cal.fx, cal.baseline, src[i]);
    if (is_valid(z) && z <= max_range) dst[i] = z;
  }
  return depth;
}

inline Eigen::Vector3d backproject_pixel(double u, double v, double depth, const CameraCalibration& cal) {
  return {(u - cal.cx) * depth / cal.fx, (v - cal.cy) * depth / cal.fy, depth};
}

inline PointCloud backproject(const DepthMap& depth, const CameraCalibration& cal) {
  if (depth.width() != cal.image_w || depth.height() != cal.image_h) {
    throw std::invalid_argument("backproject: depth map does not match calibration image size");
  }
  PointCloud cloud;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double z = depth(u, v);
      if (!is_valid(z)) continue;
      cloud.push_back({backproject_pixel(u, v, z, cal), u, v});
    }
  }
  return cloud;
}

/// Perspective projection; std::nullopt marks a point on or behind the camera plane.
inline std::optional<Projection> project(const Eigen::Vector3d& p, const CameraCalibration& cal) {
  if (!(p.z() > 0.0)) return std::nullopt;
  return Projection{cal.fx * p.x() / p.z() + cal.cx, cal.fy * p.y() / p.z() + cal.cy, p.z()};
}

/// Rotation taking camera-frame vectors into the gravity-aligned level frame
/// (same axes as the camera frame with zero extrinsic rotation).
inline Eigen::Matrix3d camera_rotation(const CameraCalibration& cal) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  return (AngleAxisd(-cal.yaw, Vector3d::UnitY()) * AngleAxisd(-cal.pitch, Vector3d::UnitX()) *
          AngleAxisd(cal.roll, Vector3d::UnitZ()))
      .toRotationMatrix();
}

/// Precomputed rigid transform; prefer this over the free functions in loops.
class CameraPose {
 public:
  explicit CameraPose(const CameraCalibration& cal) : rotation_(camera_rotation(cal)), height_(cal.cam_height) {}

  WorldPoint to_world(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d level = rotation_ * p;
    return {level.x(), level.z(), height_ - level.y()};
  }

  Eigen::Vector3d to_camera(const WorldPoint& w) const {
    const Eigen::Vector3d level(w.x, height_ - w.height, w.z);
    return rotation_.transpose() * level;
  }

  /// World-frame direction (x, z, height components) to camera-frame direction.
  Eigen::Vector3d direction_to_camera(const WorldPoint& d) const {
    return rotation_.transpose() * Eigen::Vector3d(d.x, -d.height, d.z);
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }

 private:
  Eigen::Matrix3d rotation_;
  double height_;
};

inline WorldPoint camera_to_world(const Eigen::Vector3d& p, const CameraCalibration& cal) {
  return CameraPose(cal).to_world(p);
}

inline Eigen::Vector3d world_to_camera(const WorldPoint& w, const CameraCalibration& cal) {
  return CameraPose(cal).to_camera(w);
}

inline WorldCloud to_world(const PointCloud& cloud, const CameraCalibration& cal) {
  const CameraPose pose(cal);
  WorldCloud out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back({pose.to_world(p.position), p.u, p.v});
  return out;
}

}  // namespace pedspawn

#endif  // PEDSPAWN_CAMERA_HPP
