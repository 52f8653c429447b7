#ifndef PEDSPAWN_IO_CITYSCAPES_HPP
#define PEDSPAWN_IO_CITYSCAPES_HPP

// Cityscapes file conventions: camera JSON and 16-bit disparity PNGs.
//
// Disparity PNG: stored value 0 is invalid, otherwise
//   disparity = (stored - 1) / 256   [pixels]

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "pedspawn/camera.hpp"
#include "pedspawn/error.hpp"
#include "pedspawn/io/png.hpp"

namespace pedspawn::io {

using RawDisparity = Raster<std::uint16_t, struct RawDisparityTag>;

inline constexpr std::uint8_t kPersonLabel = 24;

inline DisparityMap decode_disparity(const RawDisparity& raw) {
  DisparityMap out(raw.width(), raw.height(), kInvalid);
  auto src = raw.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] != 0) dst[i] = (static_cast<double>(src[i]) - 1.0) / 256.0;
  }
  return out;
}

inline RawDisparity encode_disparity(const DisparityMap& disparity) {
  RawDisparity out(disparity.width(), disparity.height(), 0);
  auto src = disparity.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!is_valid(src[i])) continue;
    const double stored = std::round(src[i] * 256.0) + 1.0;
    dst[i] = static_cast<std::uint16_t>(std::min(stored, 65535.0));
  }
  return out;
}

inline DisparityMap read_disparity_png(const std::filesystem::path& path) {
  return decode_disparity(read_gray_png<RawDisparity>(path));
}

inline void write_disparity_png(const std::filesystem::path& path, const DisparityMap& d) {
  write_gray_png(path, encode_disparity(d));
}

/// Parses a Cityscapes camera document. The image size does not live in the
/// file, so the caller supplies it (normally from the paired RGB frame).
inline CameraCalibration calibration_from_json(const nlohmann::json& doc, int image_w, int image_h) {
  try {
    const auto& in = doc.at("intrinsic");
    const auto& ex = doc.at("extrinsic");
    CameraCalibration cal;
    cal.fx = in.at("fx").get<double>();
    cal.fy = in.at("fy").get<double>();
    cal.cx = in.at("u0").get<double>();
    cal.cy = in.at("v0").get<double>();
    cal.baseline = ex.at("baseline").get<double>();
    cal.cam_height = ex.at("z").get<double>();
    cal.pitch = ex.value("pitch", 0.0);
    cal.roll = ex.value("roll", 0.0);
    cal.yaw = ex.value("yaw", 0.0);
    cal.image_w = image_w;
    cal.image_h = image_h;
    cal.validate();
    return cal;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed camera document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

inline nlohmann::json calibration_to_json(const CameraCalibration& cal) {
  return {{"extrinsic",
           {{"baseline", cal.baseline},
            {"pitch", cal.pitch},
            {"roll", cal.roll},
            {"yaw", cal.yaw},
            {"x", 0.0},
            {"y", 0.0},
            {"z", cal.cam_height}}},
          {"intrinsic", {{"fx", cal.fx}, {"fy", cal.fy}, {"u0", cal.cx}, {"v0", cal.cy}}}};
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open JSON file: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

inline CameraCalibration read_calibration(const std::filesystem::path& path, int image_w, int image_h) {
  return calibration_from_json(read_json_file(path), image_w, image_h);
}

}  // namespace pedspawn::io

#endif  // PEDSPAWN_IO_CITYSCAPES_HPP
