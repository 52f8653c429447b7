// Acceptance suite: one PASS/FAIL line per criterion, with wall time and the
// measured quantity. Exit status is non-zero if any criterion fails.

#include <mpfr.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <regex>
#include <string>
#include <vector>

#include "pedspawn/adversarial.hpp"
#include "pedspawn/camera.hpp"
#include "pedspawn/io/cityscapes.hpp"
#include "pedspawn/io/png.hpp"
#include "pedspawn/isolation_forest.hpp"
#include "pedspawn/pipeline/run.hpp"
#include "pedspawn/pipeline/stats.hpp"
#include "pedspawn/render.hpp"
#include "pedspawn/rng.hpp"
#include "pedspawn/scene_analysis.hpp"
#include "pedspawn/synthetic.hpp"

using namespace pedspawn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double mpfr_depth(double fx, double baseline, double disparity) {
  mpfr_t a, b, d;
  mpfr_inits2(256, a, b, d, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(a, fx, MPFR_RNDN);
  mpfr_set_d(b, baseline, MPFR_RNDN);
  mpfr_set_d(d, disparity, MPFR_RNDN);
  mpfr_mul(a, a, b, MPFR_RNDN);
  mpfr_div(a, a, d, MPFR_RNDN);
  const double out = mpfr_get_d(a, MPFR_RNDN);
  mpfr_clears(a, b, d, static_cast<mpfr_ptr>(nullptr));
  return out;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("pedspawn_accept_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ---------------------------------------------------------------- geometry

Outcome geometry() {
  const auto cal = io::read_calibration(PEDSPAWN_FIXTURE_DIR "/camera_aachen.json", 2048, 1024);
  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform_real(rng, 0, cal.image_w), v = uniform_real(rng, 0, cal.image_h);
    const double z = uniform_real(rng, 0.5, 200.0);
    const auto p = project(backproject_pixel(u, v, z, cal), cal);
    if (!p) return {false, "projection of a back-projected point failed"};
    worst = std::max({worst, std::abs(p->u - u), std::abs(p->v - v)});
  }
  // depth against a 256-bit oracle: random disparities and every 16-bit PNG value
  std::size_t mismatches = 0, checked = 0;
  for (int i = 0; i < 10000; ++i, ++checked) {
    const double d = uniform_real(rng, 1e-3, 300.0);
    mismatches += depth_from_disparity(cal.fx, cal.baseline, d) != mpfr_depth(cal.fx, cal.baseline, d);
  }
  for (int raw = 2; raw <= 65535; ++raw, ++checked) {
    const double d = (raw - 1) / 256.0;
    mismatches += depth_from_disparity(cal.fx, cal.baseline, d) != mpfr_depth(cal.fx, cal.baseline, d);
  }
  return {worst < 1e-6 && mismatches == 0,
          fmt("max reprojection error %.3g px over 10000 pixels; %zu/%zu depths differ from oracle", worst, mismatches,
              checked)};
}

// ---------------------------------------------------------- analytic scene

bool rect_meets_box(const GridSpec& g, int ix, int iz, const synthetic::Box& b) {
  const double x0 = g.x_min + ix * g.cell_size, z0 = g.z_min + iz * g.cell_size;
  return x0 <= b.x1 && x0 + g.cell_size >= b.x0 && z0 <= b.z1 && z0 + g.cell_size >= b.z0;
}

// a ground point is visibly free when the ray through its pixel lands on it
bool ground_visible(const synthetic::Scene& scene, const CameraPose& pose, double x, double z) {
  const Eigen::Vector3d cam = pose.to_camera({x, z, 0.0});
  const auto p = project(cam, scene.cal);
  if (!p || p->u < 0 || p->v < 0 || p->u >= scene.cal.image_w || p->v >= scene.cal.image_h) return false;
  const auto hit = synthetic::cast(scene, pose, p->u, p->v);
  return hit.kind == synthetic::HitKind::Ground && std::abs(hit.depth - cam.z()) < 1e-6 * cam.z();
}

Outcome analytic_scene() {
  synthetic::Scene scene;
  scene.cal = synthetic::toy_calibration(1024, 512);
  scene.boxes = {{-6.3, -4.1, 7.2, 11.6, 1.5}, {2.6, 3.4, 9.1, 9.9, 1.1}, {-1.2, 1.7, 15.3, 17.8, 2.0}};
  const auto data = synthetic::render(scene);
  const CameraPose pose(scene.cal);

  pipeline::PipelineConfig config;
  config.x_min = -10.0;
  config.x_max = 10.0;
  config.z_min = 0.0;
  config.z_max = 20.0;
  config.peds_min = config.peds_max = 0;
  Rng rng(7);
  pipeline::SceneData quantized = data;
  quantized.disparity = synthetic::quantize(data.disparity);
  const auto out = pipeline::augment_image("analytic", quantized, {}, config, rng);
  const GroundGrid& grid = out.collision_map;
  const GridSpec& g = grid.spec();

  std::size_t truth = 0, covered = 0, inside_boxes = 0;
  for (int iz = 0; iz < g.nz; ++iz) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const bool spawnable = grid.at(ix, iz) == CellState::Spawnable;
      bool near_box = false;
      for (const auto& b : scene.boxes) near_box = near_box || rect_meets_box(g, ix, iz, b);
      if (near_box) {
        inside_boxes += spawnable;
        continue;
      }
      const double x0 = g.x_min + ix * g.cell_size, z0 = g.z_min + iz * g.cell_size, c = g.cell_size;
      bool free = true;
      for (auto [dx, dz] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}}) {
        free = free && ground_visible(scene, pose, x0 + dx * c, z0 + dz * c);
      }
      if (!free) continue;
      ++truth;
      covered += spawnable;
    }
  }
  const double coverage = truth ? double(covered) / double(truth) : 0.0;

  // pedestrian standing behind a wall; positive control without the wall
  synthetic::Scene walled;
  walled.cal = scene.cal;
  walled.boxes = {{-8.0, 8.0, 8.0, 8.4, 3.0}};
  const auto asset = io::load_asset(PEDSPAWN_DEFAULT_ASSET_DIR "/human_a.obj");
  const Placement behind{asset.asset_id, 0.5, 12.0, 0.7, 1.8, 1};
  const auto mesh = pose_mesh(asset, behind);
  const auto wall_depth = disparity_to_depth(synthetic::quantize(synthetic::render(walled).disparity), walled.cal);
  const std::size_t hidden = rasterize(mesh, walled.cal, wall_depth).coverage();
  synthetic::Scene open;
  open.cal = scene.cal;
  const std::size_t shown =
      rasterize(mesh, open.cal, disparity_to_depth(synthetic::quantize(synthetic::render(open).disparity), open.cal))
          .coverage();

  return {coverage >= 0.95 && inside_boxes == 0 && hidden == 0 && shown > 0 && truth > 1000,
          fmt("coverage %.4f of %zu free cells; %zu spawnable cells on box footprints; behind wall %zu px "
              "(unoccluded %zu px)",
              coverage, truth, inside_boxes, hidden, shown)};
}

// --------------------------------------------------------------- collision

Outcome collision() {
  const auto cal = synthetic::toy_calibration(512, 256);
  const CameraPose pose(cal);
  std::size_t runs = 0, placements = 0, overlaps = 0, on_blocked = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed, ++runs) {
    Rng rng(derive_seed(20240611, seed));
    GroundGrid grid(GridSpec::covering(-6.0, 6.0, 4.0, 16.0, 0.25));
    const GroundGrid initial = [&] {
      for (int iz = 0; iz < grid.nz(); ++iz) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
          grid.set(ix, iz, uniform01(rng) < 0.85 ? CellState::Spawnable : CellState::Blocked);
        }
      }
      return grid;
    }();
    SpawnQuery q{4.0, 30.0, uniform_real(rng, 0.25, 0.6)};
    std::vector<Footprint> placed;
    const int want = uniform_int(rng, 1, 40);
    for (int k = 0; k < want; ++k) {
      const auto f = sample_spawn(grid, rng, pose, q);
      if (!f) break;
      for (const auto& o : placed) overlaps += std::hypot(f->x - o.x, f->z - o.z) < f->radius + o.radius;
      for_each_disc_cell(initial.spec(), *f, [&](int ix, int iz) {
        on_blocked += initial.at(ix, iz) != CellState::Spawnable;
      });
      occupy(grid, *f);
      placed.push_back(*f);
    }
    placements += placed.size();
  }
  return {overlaps == 0 && on_blocked == 0 && placements > 5000,
          fmt("%zu runs, %zu placements, %zu pairwise overlaps, %zu footprint cells on blocked ground", runs,
              placements, overlaps, on_blocked)};
}

// -------------------------------------------------------- isolation forest

double normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Outcome isolation_forest() {
  using Forest = IsolationForest<2>;
  int hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(derive_seed(99, static_cast<std::uint64_t>(trial)));
    std::vector<Forest::Point> pts;
    for (int i = 0; i < 500; ++i) pts.push_back({normal(rng), normal(rng)});
    for (int i = 0; i < 10; ++i) {
      const double a = uniform_real(rng, 0, 2 * M_PI), r = uniform_real(rng, 6.0, 9.0);
      pts.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const auto s = Forest::fit(pts, {100, 256, rng()}).score(pts);
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + 10, order.end(), [&](auto a, auto b) { return s[a] > s[b]; });
    hits += std::all_of(order.begin(), order.begin() + 10, [](std::size_t i) { return i >= 500; });
  }
  return {hits >= 95, fmt("planted outliers own the top 10 in %d/100 trials", hits)};
}

// ----------------------------------------------------------------- kernels

template <typename R>
R from_json(const nlohmann::json& values, int w, int h) {
  R out(w, h);
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = values.at(i).get<typename R::value_type>();
  return out;
}

Outcome kernels() {
  using namespace adversarial;
  const auto doc = io::read_json_file(PEDSPAWN_FIXTURE_DIR "/kernel_golden.json");
  double fixture_err = 0.0;
  for (const auto& c : doc.at("masked_mse")) {
    const int w = c.at("width"), h = c.at("height"), nw = c.at("norm_w"), nh = c.at("norm_h");
    const auto s = from_json<ScoreMap>(c.at("score"), w, h);
    const auto t = from_json<ScoreMap>(c.at("target"), w, h);
    const auto m = from_json<ClassMask>(c.at("mask"), w, h);
    fixture_err = std::max(fixture_err, std::abs(masked_mse(s, t, m, nw, nh) - c.at("masked_mse").get<double>()));
  }

  // brute-force oracle and central differences on random maps
  Rng rng(5);
  double oracle_err = 0.0, fd_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int w = uniform_int(rng, 2, 12), h = uniform_int(rng, 2, 12);
    const int nw = w * uniform_int(rng, 1, 4), nh = h * uniform_int(rng, 1, 4);
    ScoreMap s(w, h), t(w, h);
    ClassMask m(w, h);
    for (auto& v : s.pixels()) v = uniform01(rng);
    for (auto& v : t.pixels()) v = uniform01(rng);
    for (auto& v : m.pixels()) v = uniform01(rng) < 0.5;
    double brute = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double r = (s(x, y) - t(x, y)) * m(x, y);
        brute += r * r;
      }
    }
    brute /= double(nw) * double(nh);
    oracle_err = std::max(oracle_err, std::abs(masked_mse(s, t, m, nw, nh) - brute));
    const auto g = masked_mse_gradient(s, t, m, nw, nh);
    const double eps = 1e-6;
    for (std::size_t i = 0; i < s.size(); ++i) {
      ScoreMap plus = s, minus = s;
      plus.pixels()[i] += eps;
      minus.pixels()[i] -= eps;
      const double fd = (masked_mse(plus, t, m, nw, nh) - masked_mse(minus, t, m, nw, nh)) / (2 * eps);
      fd_err = std::max(fd_err, std::abs(fd - g.pixels()[i]));
    }
  }

  // 95 % rest / 5 % person pixels over a small synthetic dataset
  LambdaAccumulator acc;
  for (int img = 0; img < 8; ++img) {
    SemanticMap y(20, 10, static_cast<std::uint8_t>(7 + img % 3));
    for (int i = 0; i < 10; ++i) y((i * 7 + img) % 20, (i * 3) % 10) = io::kPersonLabel;
    acc.add(person_mask(y), rest_mask(y));
  }
  const double lambda = acc.lambda();

  const double total = total_objective({1.0, 1.0, 1.0, 1.0}, 1.0, {kExperimentLambda, kCycleWeight});
  return {fixture_err < 1e-12 && oracle_err < 1e-12 && fd_err < 1e-6 && std::abs(lambda - 1.0 / 19.0) < 1e-9 &&
              total == 12.4,
          fmt("fixture err %.2g, oracle err %.2g, finite-difference err %.2g, lambda %.12f (1/19 = %.12f), "
              "total %.17g",
              fixture_err, oracle_err, fd_err, lambda, 1.0 / 19.0, total)};
}

// ------------------------------------------------- end to end, protocol shape

struct EndToEnd {
  fs::path input, out_serial, out_parallel;
  nlohmann::json manifest;
  bool ran = false;
  std::string error;
};

EndToEnd& end_to_end_run() {
  static EndToEnd e = [] {
    EndToEnd r;
    r.input = scratch("in");
    r.out_serial = scratch("out1");
    r.out_parallel = scratch("out8");
    try {
      synthetic::write_toy_dataset(r.input, 5, 2024);
      pipeline::PipelineConfig c;
      c.input_root = r.input;
      c.output_root = r.out_serial;
      c.seed = 17;
      c.z_max = 30.0;
      c.jobs = 1;
      r.manifest = pipeline::run(c).manifest;
      c.output_root = r.out_parallel;
      c.jobs = 8;
      pipeline::run(c);
      r.ran = true;
    } catch (const std::exception& ex) {
      r.error = ex.what();
    }
    return r;
  }();
  return e;
}

std::map<std::string, std::string> tree_hashes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = io::sha256_file(e.path());
  }
  return out;
}

Outcome determinism() {
  auto& e = end_to_end_run();
  if (!e.ran) return {false, "run failed: " + e.error};
  const auto a = tree_hashes(e.out_serial), b = tree_hashes(e.out_parallel);
  const auto st = pipeline::stats(e.out_serial);
  std::size_t instances = 0;
  for (const auto& img : e.manifest.at("images")) instances += img.at("placed").get<std::size_t>();
  return {a == b && a.size() == 5 * 4 + 1 && st.problems.empty() && st.images == 5 && instances > 0,
          fmt("%zu files, SHA-256 %s between 1 and 8 workers; %zu instances; GT audit: %zu problems", a.size(),
              a == b ? "identical" : "DIFFERENT", instances, st.problems.size())};
}

Outcome protocol_shape() {
  auto& e = end_to_end_run();
  if (!e.ran) return {false, "run failed: " + e.error};
  const std::regex stem_re("[a-z]+_[0-9]{6}_[0-9]{6}");
  std::size_t bad_counts = 0, bad_names = 0, bad_ids = 0, spawned = 0;
  for (const auto& img : e.manifest.at("images")) {
    const std::string id = img.at("id");
    const auto slash = id.rfind('/');
    const std::string rel = id.substr(0, slash), stem = id.substr(slash + 1);
    if (img.at("skipped").get<bool>()) continue;
    const auto placed = img.at("placed").get<int>();
    if (!img.at("exhausted").get<bool>()) {
      ++spawned;
      bad_counts += placed < 1 || placed > 5;
    } else {
      bad_counts += placed > img.at("requested").get<int>();
    }
    const auto p = pipeline::output_paths(e.out_serial, rel, stem);
    bad_names += !std::regex_match(stem, stem_re) || std::count(rel.begin(), rel.end(), '/') != 1;
    for (const auto* f : {&p.rgb, &p.label_ids, &p.instance_ids}) bad_names += !fs::is_regular_file(*f);
    const auto inst = io::read_gray_png<InstanceImage>(p.instance_ids);
    const auto labels = io::read_gray_png<LabelImage>(p.label_ids);
    for (const auto& pl : img.at("placements")) {
      const int iid = pl.at("instance_id");
      bad_ids += iid / 1000 != io::kPersonLabel || iid % 1000 < 1;
    }
    bad_ids += !inst.same_shape(labels);
  }
  return {spawned > 0 && bad_counts == 0 && bad_names == 0 && bad_ids == 0,
          fmt("%zu images spawned; %zu count violations, %zu naming violations, %zu instance-id violations", spawned,
              bad_counts, bad_names, bad_ids)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"geometry", 5.0, geometry},
      {"analytic-scene", 10.0, analytic_scene},
      {"collision", 30.0, collision},
      {"isolation-forest", 60.0, isolation_forest},
      {"kernels", 5.0, kernels},
      {"end-to-end-determinism", 60.0, determinism},
      {"dataset-protocol-shape", 60.0, protocol_shape},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.pass && secs < c.budget_s;
    failed += !ok;
    std::printf("%s %s (%.2f s, budget %.0f s): %s\n", ok ? "PASS" : "FAIL", c.name, secs, c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  auto& e = end_to_end_run();
  for (const auto* p : {&e.input, &e.out_serial, &e.out_parallel}) fs::remove_all(*p);
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
