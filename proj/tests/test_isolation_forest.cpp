#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pedspawn/isolation_forest.hpp"
#include "pedspawn/rng.hpp"

using namespace pedspawn;
using Forest2 = IsolationForest<2>;
using P2 = Forest2::Point;

namespace {

double normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// 500 standard-normal inliers followed by 10 outliers on a ring of radius 6..9.
std::vector<P2> planted(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<P2> pts;
  for (int i = 0; i < 500; ++i) pts.push_back({normal(rng), normal(rng)});
  for (int i = 0; i < 10; ++i) {
    const double a = uniform_real(rng, 0, 2 * M_PI), r = uniform_real(rng, 6.0, 9.0);
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return pts;
}

}  // namespace

TEST(AveragePathLength, ClosedForms) {
  EXPECT_EQ(average_path_length(0), 0.0);
  EXPECT_EQ(average_path_length(1), 0.0);
  EXPECT_EQ(average_path_length(2), 1.0);
  // c(3) = 2 * (1 + 1/2) - 2 * 2/3
  EXPECT_DOUBLE_EQ(average_path_length(3), 3.0 - 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(harmonic_number(4), 1 + 0.5 + 1.0 / 3 + 0.25);
  // the asymptotic branch joins the exact sum smoothly
  EXPECT_NEAR(harmonic_number(4097), harmonic_number(4096) + 1.0 / 4097, 1e-12);
}

TEST(IsolationForest, TwoPointSampleScoresOneHalf) {
  const std::vector<P2> pts{{0.0, 0.0}, {1.0, 1.0}};
  const auto f = Forest2::fit(pts, {50, 2, 1});
  EXPECT_EQ(f.height_limit(), 1);
  for (const auto& t : f.trees()) {
    ASSERT_EQ(t.nodes.size(), 3u);  // root split isolates each point at depth 1
  }
  EXPECT_DOUBLE_EQ(f.expected_path_length(pts[0]), 1.0);
  EXPECT_DOUBLE_EQ(f.score(pts[0]), 0.5);
  EXPECT_DOUBLE_EQ(f.score(pts[1]), 0.5);
}

TEST(IsolationForest, DuplicatedPointScoresEqual) {
  const std::vector<P2> pts(300, P2{2.5, -1.0});
  const auto f = Forest2::fit(pts, {20, 64, 3});
  const auto s = f.score(pts);
  for (double v : s) EXPECT_EQ(v, s.front());
  for (const auto& t : f.trees()) EXPECT_EQ(t.nodes.size(), 1u);
}

TEST(IsolationForest, RejectsDegenerateInput) {
  const std::vector<P2> one{{0, 0}};
  EXPECT_THROW(Forest2::fit(one, {}), std::invalid_argument);
  const std::vector<P2> two{{0, 0}, {1, 1}};
  EXPECT_THROW(Forest2::fit(two, {10, 1, 0}), std::invalid_argument);
  EXPECT_THROW(Forest2::fit(two, {0, 2, 0}), std::invalid_argument);
}

TEST(IsolationForest, DeterministicForFixedSeed) {
  const auto pts = planted(1);
  const auto a = Forest2::fit(pts, {100, 256, 42});
  const auto b = Forest2::fit(pts, {100, 256, 42});
  EXPECT_TRUE(a == b);
  const auto c = Forest2::fit(pts, {100, 256, 43});
  EXPECT_FALSE(a == c);
}

TEST(IsolationForest, InvariantUnderTrainingOrder) {
  auto pts = planted(2);
  const auto a = Forest2::fit(pts, {60, 128, 9});
  Rng rng(77);
  for (std::size_t i = pts.size() - 1; i > 0; --i) std::swap(pts[i], pts[uniform_index(rng, i + 1)]);
  const auto b = Forest2::fit(pts, {60, 128, 9});
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.score(pts), b.score(pts));
}

TEST(IsolationForest, TreeStructure) {
  const auto pts = planted(4);
  const auto f = Forest2::fit(pts, {30, 256, 5});
  EXPECT_EQ(f.sample_size(), 256);
  EXPECT_EQ(f.height_limit(), 8);
  for (const auto& t : f.trees()) {
    int leaf_total = 0;
    // depth of every node via explicit stack
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [id, depth] = stack.back();
      stack.pop_back();
      const auto& n = t.nodes[static_cast<std::size_t>(id)];
      EXPECT_LE(depth, f.height_limit());
      if (n.external()) {
        leaf_total += n.size;
      } else {
        EXPECT_EQ(n.size, t.nodes[n.left].size + t.nodes[n.right].size);
        EXPECT_GT(t.nodes[n.left].size, 0);
        EXPECT_GT(t.nodes[n.right].size, 0);
        stack.push_back({n.left, depth + 1});
        stack.push_back({n.right, depth + 1});
      }
    }
    EXPECT_EQ(leaf_total, 256);
  }
}

TEST(IsolationForest, SubsampleCappedBySize) {
  std::vector<P2> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({double(i), double(i % 7)});
  const auto f = Forest2::fit(pts, {10, 256, 0});
  EXPECT_EQ(f.sample_size(), 40);
  EXPECT_EQ(f.height_limit(), 6);
}

TEST(IsolationForest, PlantedOutliersTopTen) {
  const auto pts = planted(10);
  const auto f = Forest2::fit(pts, {100, 256, 10});
  const auto s = f.score(pts);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] > s[b]; });
  for (int i = 0; i < 10; ++i) EXPECT_GE(order[i], 500u) << "rank " << i;
}

TEST(IsolationForest, ScoreRanges) {
  const auto pts = planted(11);
  const auto f = Forest2::fit(pts, {100, 256, 11});
  EXPECT_LT(f.score({0.0, 0.0}), 0.5);
  EXPECT_GT(f.score({25.0, 25.0}), 0.6);
  for (double v : f.score(pts)) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}
