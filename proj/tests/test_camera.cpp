#include <gtest/gtest.h>
#include <mpfr.h>

#include <cmath>
#include <limits>

#include "pedspawn/camera.hpp"
#include "pedspawn/io/cityscapes.hpp"
#include "pedspawn/rng.hpp"

using namespace pedspawn;

namespace {

CameraCalibration fixture_camera() {
  return io::read_calibration(PEDSPAWN_FIXTURE_DIR "/camera_aachen.json", 2048, 1024);
}

CameraCalibration simple_camera(int w = 8, int h = 8) {
  CameraCalibration c;
  c.fx = 1000.0;
  c.fy = 1000.0;
  c.cx = w / 2.0;
  c.cy = h / 2.0;
  c.baseline = 0.2;
  c.cam_height = 1.5;
  c.image_w = w;
  c.image_h = h;
  return c;
}

// fx * B / d evaluated with 256-bit precision, rounded once to double.
double mpfr_depth(double fx, double baseline, double disparity) {
  mpfr_t a, b, d;
  mpfr_inits2(256, a, b, d, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(a, fx, MPFR_RNDN);
  mpfr_set_d(b, baseline, MPFR_RNDN);
  mpfr_set_d(d, disparity, MPFR_RNDN);
  mpfr_mul(a, a, b, MPFR_RNDN);  // exact: 106 significant bits fit in 256
  mpfr_div(a, a, d, MPFR_RNDN);
  const double out = mpfr_get_d(a, MPFR_RNDN);
  mpfr_clears(a, b, d, static_cast<mpfr_ptr>(nullptr));
  return out;
}

}  // namespace

TEST(Depth, DirectEvaluation) {
  auto cal = simple_camera(1, 1);
  cal.cx = cal.cy = 0.0;
  DisparityMap d(1, 1, 100.0);
  EXPECT_DOUBLE_EQ(disparity_to_depth(d, cal)(0, 0), 2.0);
}

TEST(Depth, InvalidPropagates) {
  auto cal = simple_camera(2, 1);
  DisparityMap d(2, 1, kInvalid);
  d(1, 0) = 0.0;
  const auto z = disparity_to_depth(d, cal);
  EXPECT_FALSE(is_valid(z(0, 0)));
  EXPECT_FALSE(is_valid(z(1, 0)));
}

TEST(Depth, BeyondMaxRangeIsInvalid) {
  auto cal = simple_camera(2, 1);
  DisparityMap d(2, 1, 1.0);  // Z = 200 m
  d(1, 0) = 0.5;              // Z = 400 m
  const auto z = disparity_to_depth(d, cal);
  EXPECT_DOUBLE_EQ(z(0, 0), 200.0);
  EXPECT_FALSE(is_valid(z(1, 0)));
  EXPECT_FALSE(is_valid(disparity_to_depth(d, cal, 150.0)(0, 0)));
}

TEST(Depth, DimensionMismatchRejected) {
  EXPECT_THROW(disparity_to_depth(DisparityMap(3, 3, 1.0), simple_camera()), std::invalid_argument);
}

TEST(Depth, MatchesHighPrecisionOracleBitForBit) {
  const auto cal = fixture_camera();
  ASSERT_EQ(cal.fx, 2262.52);
  ASSERT_EQ(cal.baseline, 0.209313);
  EXPECT_EQ(depth_from_disparity(cal.fx, cal.baseline, 23.7), mpfr_depth(cal.fx, cal.baseline, 23.7));

  Rng rng(7);
  for (int i = 0; i < 20000; ++i) {
    const double d = uniform_real(rng, 0.5, 400.0);
    ASSERT_EQ(depth_from_disparity(cal.fx, cal.baseline, d), mpfr_depth(cal.fx, cal.baseline, d)) << "d=" << d;
  }
  // every value a 16-bit Cityscapes disparity PNG can hold
  for (int stored = 2; stored < 65536; ++stored) {
    const double d = (stored - 1) / 256.0;
    ASSERT_EQ(depth_from_disparity(cal.fx, cal.baseline, d), mpfr_depth(cal.fx, cal.baseline, d)) << "stored=" << stored;
  }
}

TEST(Depth, StrictlyDecreasingInDisparity) {
  const auto cal = fixture_camera();
  double prev = std::numeric_limits<double>::infinity();
  for (int stored = 2; stored < 65536; ++stored) {
    const double z = depth_from_disparity(cal.fx, cal.baseline, (stored - 1) / 256.0);
    ASSERT_LT(z, prev);
    prev = z;
  }
}

TEST(Backproject, PrincipalRay) {
  auto cal = simple_camera();
  DepthMap z(8, 8, kInvalid);
  z(4, 4) = 5.0;
  const auto cloud = backproject(z, cal);
  ASSERT_EQ(cloud.size(), 1u);
  EXPECT_EQ(cloud[0].position, Eigen::Vector3d(0, 0, 5));
  EXPECT_EQ(cloud[0].u, 4);
  EXPECT_EQ(cloud[0].v, 4);
}

TEST(Backproject, SymmetricPixels) {
  auto cal = simple_camera();
  for (int k = 1; k <= 3; ++k) {
    const auto a = backproject_pixel(cal.cx + k, cal.cy, 7.0, cal);
    const auto b = backproject_pixel(cal.cx - k, cal.cy, 7.0, cal);
    EXPECT_EQ(a.x(), -b.x());
    EXPECT_GT(a.x(), 0.0);
  }
}

TEST(Backproject, MatchesNaiveLoopAndCountsValidPixels) {
  auto cal = simple_camera();
  cal.cx = 3.7;
  cal.cy = 4.1;
  cal.fy = 990.0;
  Rng rng(3);
  DepthMap z(8, 8);
  std::size_t valid = 0;
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) {
      const bool keep = uniform01(rng) < 0.7;
      z(u, v) = keep ? uniform_real(rng, 0.5, 50.0) : kInvalid;
      valid += keep;
    }
  }
  const auto cloud = backproject(z, cal);
  ASSERT_EQ(cloud.size(), valid);
  std::size_t k = 0;
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) {
      if (!std::isfinite(z(u, v))) continue;
      const double Z = z(u, v);
      const auto& p = cloud[k++];
      EXPECT_EQ(p.u, u);
      EXPECT_EQ(p.v, v);
      EXPECT_NEAR(p.position.x(), (u - 3.7) * Z / 1000.0, 1e-9);
      EXPECT_NEAR(p.position.y(), (v - 4.1) * Z / 990.0, 1e-9);
      EXPECT_EQ(p.position.z(), Z);
    }
  }
}

TEST(Project, PrincipalPointAndBehindCamera) {
  const auto cal = fixture_camera();
  const auto p = project({0, 0, 5}, cal);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->u, cal.cx);
  EXPECT_EQ(p->v, cal.cy);
  EXPECT_EQ(p->depth, 5.0);
  EXPECT_FALSE(project({1, 0, -2}, cal));
  EXPECT_FALSE(project({1, 0, 0}, cal));
}

TEST(Project, RoundTripRandomPixels) {
  const auto cal = fixture_camera();
  Rng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform_real(rng, 0, cal.image_w), v = uniform_real(rng, 0, cal.image_h);
    const double z = uniform_real(rng, 0.5, 200.0);
    const auto p = project(backproject_pixel(u, v, z, cal), cal);
    ASSERT_TRUE(p);
    worst = std::max({worst, std::abs(p->u - u), std::abs(p->v - v)});
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Pose, IdentityExtrinsics) {
  auto cal = simple_camera();
  const auto w = camera_to_world({0, 0, 5}, cal);
  EXPECT_EQ(w.height, cal.cam_height);
  EXPECT_EQ(w.x, 0.0);
  EXPECT_EQ(w.z, 5.0);
  const auto w2 = camera_to_world({0.3, 0.8, 5}, cal);
  EXPECT_DOUBLE_EQ(w2.height, cal.cam_height - 0.8);
}

TEST(Pose, YawHalfTurnNegatesXAndZ) {
  auto cal = simple_camera();
  cal.yaw = M_PI;
  const auto w = camera_to_world({1.5, 0.25, 4.0}, cal);
  EXPECT_NEAR(w.x, -1.5, 1e-12);
  EXPECT_NEAR(w.z, -4.0, 1e-12);
  EXPECT_NEAR(w.height, cal.cam_height - 0.25, 1e-12);
}

TEST(Pose, PitchDownLowersForwardRay) {
  auto cal = simple_camera();
  cal.pitch = 0.1;
  const auto w = camera_to_world({0, 0, 10}, cal);
  EXPECT_LT(w.height, cal.cam_height);
  EXPECT_NEAR(w.height, cal.cam_height - 10 * std::sin(0.1), 1e-12);
}

TEST(Pose, RotationOrthonormal) {
  Rng rng(5);
  auto cal = simple_camera();
  for (int i = 0; i < 200; ++i) {
    cal.pitch = uniform_real(rng, -M_PI, M_PI);
    cal.roll = uniform_real(rng, -M_PI, M_PI);
    cal.yaw = uniform_real(rng, -M_PI, M_PI);
    const Eigen::Matrix3d R = camera_rotation(cal);
    EXPECT_LT((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-12);
  }
}

TEST(Pose, RandomRoundTrip) {
  Rng rng(9);
  auto cal = simple_camera();
  for (int i = 0; i < 1000; ++i) {
    cal.pitch = uniform_real(rng, -0.5, 0.5);
    cal.roll = uniform_real(rng, -0.5, 0.5);
    cal.yaw = uniform_real(rng, -M_PI, M_PI);
    cal.cam_height = uniform_real(rng, 0.5, 3.0);
    const Eigen::Vector3d p(uniform_real(rng, -50, 50), uniform_real(rng, -10, 10), uniform_real(rng, 0.1, 100));
    const Eigen::Vector3d back = world_to_camera(camera_to_world(p, cal), cal);
    EXPECT_LT((back - p).norm(), 1e-9);
  }
}

TEST(Calibration, ReadsCityscapesCameraFile) {
  const auto cal = fixture_camera();
  EXPECT_EQ(cal.cx, 1096.98);
  EXPECT_EQ(cal.cy, 513.137);
  EXPECT_EQ(cal.cam_height, 1.22);
  EXPECT_EQ(cal.pitch, 0.038);
  EXPECT_EQ(cal.yaw, -0.0195);
  const auto again = io::calibration_from_json(io::calibration_to_json(cal), 2048, 1024);
  EXPECT_EQ(again.fx, cal.fx);
  EXPECT_EQ(again.baseline, cal.baseline);
  EXPECT_THROW(io::calibration_from_json(nlohmann::json::object(), 10, 10), DataError);
}

TEST(DisparityPng, CityscapesEncoding) {
  io::RawDisparity raw(3, 1);
  raw(0, 0) = 0;
  raw(1, 0) = 1;
  raw(2, 0) = 257;
  const auto d = io::decode_disparity(raw);
  EXPECT_FALSE(is_valid(d(0, 0)));
  EXPECT_FALSE(is_valid(d(1, 0)));  // stored 1 decodes to zero disparity
  EXPECT_EQ(d(2, 0), 1.0);
  EXPECT_EQ(io::encode_disparity(d)(2, 0), 257);
  EXPECT_EQ(io::encode_disparity(d)(0, 0), 0);
}
