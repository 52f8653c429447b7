#ifndef PEDSPAWN_PIPELINE_STATS_HPP
#define PEDSPAWN_PIPELINE_STATS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "pedspawn/adversarial.hpp"
#include "pedspawn/error.hpp"
#include "pedspawn/io/cityscapes.hpp"
#include "pedspawn/io/png.hpp"
#include "pedspawn/pipeline/discover.hpp"
#include "pedspawn/pipeline/run.hpp"

namespace pedspawn::pipeline {

struct DatasetStats {
  std::size_t images = 0;
  std::size_t skipped = 0;
  std::uint64_t person_pixels = 0;
  std::uint64_t rest_pixels = 0;
  double lambda = 0.0;
  std::map<std::size_t, std::size_t> instances_per_image;  ///< placed count -> images
  std::vector<std::string> problems;                       ///< completeness / consistency violations

  nlohmann::json to_json() const {
    nlohmann::json hist = nlohmann::json::object();
    for (auto [k, v] : instances_per_image) hist[std::to_string(k)] = v;
    return {{"images", images},       {"skipped", skipped},   {"person_pixels", person_pixels},
            {"rest_pixels", rest_pixels}, {"lambda", lambda},  {"instances_per_image", hist},
            {"problems", problems},   {"consistent", problems.empty()}};
  }
};

/// Dataset statistics over an emitted tree: pixel masses and the class-balance
/// weight, the instance histogram, and a ground-truth consistency audit
/// (each placed instance's pixels carry the person label and match the
/// manifest's visible-pixel count; every RGB has its maps and manifest).
inline DatasetStats stats(const fs::path& output_root) {
  const fs::path manifests = output_root / "manifests";
  if (!fs::is_directory(manifests)) throw DataError("no manifests under " + output_root.string() + ": not an emitted dataset");

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(manifests)) {
    if (e.is_regular_file() && e.path().filename().string().ends_with("_manifest.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("dataset under " + output_root.string() + " is empty");

  DatasetStats out;
  adversarial::LambdaAccumulator acc;
  std::set<std::string> listed_rgb;
  for (const auto& mf : files) {
    const auto record = io::read_json_file(mf);
    const std::string rel = fs::relative(mf.parent_path(), manifests).generic_string();
    std::string stem = mf.filename().string();
    stem.resize(stem.size() - std::string("_manifest.json").size());
    const OutputPaths paths = output_paths(output_root, rel, stem);
    ++out.images;
    if (record.value("skipped", false)) {
      ++out.skipped;
      continue;
    }
    listed_rgb.insert(fs::weakly_canonical(paths.rgb).string());
    bool complete = true;
    for (const fs::path* p : {&paths.rgb, &paths.label_ids, &paths.instance_ids}) {
      if (!fs::is_regular_file(*p)) {
        out.problems.push_back("missing " + p->string());
        complete = false;
      }
    }
    const auto& placements = record.at("placements");
    ++out.instances_per_image[placements.size()];
    if (!complete) continue;

    const auto labels = io::read_gray_png<LabelImage>(paths.label_ids);
    const auto instances = io::read_gray_png<InstanceImage>(paths.instance_ids);
    if (!labels.same_shape(instances)) {
      out.problems.push_back(stem + ": label and instance maps differ in size");
      continue;
    }
    const auto person = adversarial::person_mask(labels);
    const auto rest = adversarial::rest_mask(labels);
    acc.add(person, rest);

    std::map<std::uint16_t, std::size_t> expected;
    for (const auto& p : placements) expected[p.at("instance_id").get<std::uint16_t>()] = p.at("visible_pixels").get<std::size_t>();
    std::map<std::uint16_t, std::size_t> counted;
    for (int y = 0; y < labels.height(); ++y) {
      for (int x = 0; x < labels.width(); ++x) {
        const auto id = instances(x, y);
        if (!expected.count(id)) continue;
        ++counted[id];
        if (labels(x, y) != io::kPersonLabel) {
          out.problems.push_back(stem + ": instance " + std::to_string(id) + " pixel without person label");
        }
      }
    }
    for (auto [id, n] : expected) {
      if (counted[id] != n) {
        out.problems.push_back(stem + ": instance " + std::to_string(id) + " has " + std::to_string(counted[id]) +
                               " pixels, manifest says " + std::to_string(n));
      }
    }
  }
  const fs::path left = output_root / "leftImg8bit";
  if (fs::is_directory(left)) {
    for (const auto& e : fs::recursive_directory_iterator(left)) {
      if (e.is_regular_file() && !listed_rgb.count(fs::weakly_canonical(e.path()).string())) {
        out.problems.push_back("RGB without manifest entry: " + e.path().string());
      }
    }
  }
  out.person_pixels = acc.person_pixels();
  out.rest_pixels = acc.rest_pixels();
  if (acc.pairs() > 0) out.lambda = acc.lambda();
  return out;
}

}  // namespace pedspawn::pipeline

#endif  // PEDSPAWN_PIPELINE_STATS_HPP
