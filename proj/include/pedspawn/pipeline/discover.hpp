#ifndef PEDSPAWN_PIPELINE_DISCOVER_HPP
#define PEDSPAWN_PIPELINE_DISCOVER_HPP

// Cityscapes tree discovery:
//   <root>/leftImg8bit/<split>/<city>/<stem>_leftImg8bit.png
//   <root>/disparity/<split>/<city>/<stem>_disparity.png
//   <root>/camera/<split>/<city>/<stem>_camera.json
//   <root>/gtFine/<split>/<city>/<stem>_gtFine_labelIds.png
//   <root>/gtFine/<split>/<city>/<stem>_gtFine_instanceIds.png

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "pedspawn/error.hpp"

namespace pedspawn::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kLeftSuffix = "_leftImg8bit.png";

struct SceneRef {
  std::string id;        ///< "<split>/<city>/<stem>", also the rng key
  std::string relative_dir;  ///< "<split>/<city>"
  std::string stem;      ///< "<city>_<seq>_<frame>"
  fs::path rgb;
  fs::path disparity;
  fs::path camera;
  fs::path label_ids;
  fs::path instance_ids;
};

struct Discovery {
  std::vector<SceneRef> scenes;
  std::vector<std::string> warnings;
};

inline SceneRef scene_paths(const fs::path& root, const std::string& relative_dir, const std::string& stem) {
  SceneRef s;
  s.relative_dir = relative_dir;
  s.stem = stem;
  s.id = relative_dir + "/" + stem;
  s.rgb = root / "leftImg8bit" / relative_dir / (stem + kLeftSuffix);
  s.disparity = root / "disparity" / relative_dir / (stem + "_disparity.png");
  s.camera = root / "camera" / relative_dir / (stem + "_camera.json");
  s.label_ids = root / "gtFine" / relative_dir / (stem + "_gtFine_labelIds.png");
  s.instance_ids = root / "gtFine" / relative_dir / (stem + "_gtFine_instanceIds.png");
  return s;
}

/// Locates a scene from the path of its *_leftImg8bit.png inside a Cityscapes tree.
inline SceneRef scene_from_image(const fs::path& image) {
  const std::string name = image.filename().string();
  const std::string suffix = kLeftSuffix;
  if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
    throw DataError("not a *_leftImg8bit.png file: " + image.string());
  }
  const fs::path city = image.parent_path();
  const fs::path split = city.parent_path();
  const fs::path left_root = split.parent_path();
  if (left_root.filename() != "leftImg8bit") throw DataError("image is not inside a leftImg8bit/<split>/<city>/ tree: " + image.string());
  return scene_paths(left_root.parent_path(), (split.filename() / city.filename()).generic_string(),
                     name.substr(0, name.size() - suffix.size()));
}

/// Every scene with all artifacts present, in lexicographic id order.
/// A missing top-level subtree is an error; a missing per-image file only a warning.
inline Discovery discover(const fs::path& root) {
  for (const char* sub : {"leftImg8bit", "disparity", "camera", "gtFine"}) {
    if (!fs::is_directory(root / sub)) {
      throw DataError("input tree is missing the '" + std::string(sub) + "' subtree: " + (root / sub).string());
    }
  }
  Discovery out;
  const std::string suffix = kLeftSuffix;
  const fs::path left = root / "leftImg8bit";
  for (const auto& entry : fs::recursive_directory_iterator(left)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    const std::string rel = fs::relative(entry.path().parent_path(), left).generic_string();
    SceneRef s = scene_paths(root, rel, name.substr(0, name.size() - suffix.size()));
    std::vector<std::string> missing;
    for (const fs::path* p : {&s.disparity, &s.camera, &s.label_ids, &s.instance_ids}) {
      if (!fs::is_regular_file(*p)) missing.push_back(p->string());
    }
    if (!missing.empty()) {
      std::string msg = "skipping " + s.id + ": missing";
      for (const auto& m : missing) msg += " " + m;
      out.warnings.push_back(msg);
      continue;
    }
    out.scenes.push_back(std::move(s));
  }
  std::sort(out.scenes.begin(), out.scenes.end(), [](const SceneRef& a, const SceneRef& b) { return a.id < b.id; });
  std::sort(out.warnings.begin(), out.warnings.end());
  return out;
}

}  // namespace pedspawn::pipeline

#endif  // PEDSPAWN_PIPELINE_DISCOVER_HPP
