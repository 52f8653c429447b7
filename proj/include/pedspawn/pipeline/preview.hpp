#ifndef PEDSPAWN_PIPELINE_PREVIEW_HPP
#define PEDSPAWN_PIPELINE_PREVIEW_HPP

#include <cstdint>

#include "pedspawn/raster.hpp"
#include "pedspawn/rng.hpp"

namespace pedspawn::pipeline {

inline Rgb8 label_color(std::uint8_t label) {
  switch (label) {
    case 7: return {128, 64, 128};   // road
    case 8: return {244, 35, 232};   // sidewalk
    case 11: return {70, 70, 70};    // building
    case 23: return {70, 130, 180};  // sky
    case 24: return {220, 20, 60};   // person
    case 26: return {0, 0, 142};     // car
    default: {
      const auto g = static_cast<std::uint8_t>(label * 7);
      return {g, g, g};
    }
  }
}

inline Rgb8 instance_color(std::uint16_t id) {
  if (id < 1000) return {0, 0, 0};
  const std::uint64_t h = splitmix64(id);
  return {static_cast<std::uint8_t>(64 + (h & 0xBF)), static_cast<std::uint8_t>(64 + ((h >> 8) & 0xBF)),
          static_cast<std::uint8_t>(64 + ((h >> 16) & 0xBF))};
}

/// RGB | semantic | instance, side by side.
inline RgbImage preview_sheet(const RgbImage& rgb, const LabelImage& semantic, const InstanceImage& instance) {
  const int w = rgb.width();
  const int h = rgb.height();
  RgbImage sheet(3 * w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      sheet(x, y) = rgb(x, y);
      sheet(w + x, y) = label_color(semantic(x, y));
      sheet(2 * w + x, y) = instance_color(instance(x, y));
    }
  }
  return sheet;
}

}  // namespace pedspawn::pipeline

#endif  // PEDSPAWN_PIPELINE_PREVIEW_HPP
