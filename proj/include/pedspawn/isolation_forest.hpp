#ifndef PEDSPAWN_ISOLATION_FOREST_HPP
#define PEDSPAWN_ISOLATION_FOREST_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "pedspawn/rng.hpp"

namespace pedspawn {

/// Harmonic number H(k) = 1 + 1/2 + ... + 1/k. Exact summation for moderate
/// k, asymptotic expansion beyond.
inline double harmonic_number(std::uint64_t k) {
  if (k <= 4096) {
    double h = 0.0;
    for (std::uint64_t i = k; i >= 1; --i) h += 1.0 / static_cast<double>(i);  // small terms first
    return h;
  }
  const double x = static_cast<double>(k);
  return std::log(x) + 0.57721566490153286 + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x);
}

/// Average path length of an unsuccessful BST search over n keys; the
/// normalizer of isolation depths.
inline double average_path_length(std::uint64_t n) {
  if (n <= 1) return 0.0;
  const double nd = static_cast<double>(n);
  return 2.0 * harmonic_number(n - 1) - 2.0 * (nd - 1.0) / nd;
}

struct IsolationForestParams {
  int trees = 100;
  int subsample = 256;
  std::uint64_t seed = 0;
};

/// Isolation forest over Dim-dimensional points.
///
/// Training points are sorted lexicographically before anything else, and
/// tree i draws its subsample from a stream seeded with derive_seed(seed, i).
/// The fitted model therefore depends only on the multiset of points and the
/// seed, never on the order the points were supplied in.
template <std::size_t Dim>
class IsolationForest {
 public:
  using Point = std::array<double, Dim>;

  struct Node {
    int feature = -1;  ///< -1 marks an external node
    double split = 0.0;
    int left = -1;
    int right = -1;
    int size = 0;  ///< training points that reached the node

    bool external() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  struct Tree {
    std::vector<Node> nodes;  ///< nodes[0] is the root
    friend bool operator==(const Tree&, const Tree&) = default;
  };

  static IsolationForest fit(std::span<const Point> points, const IsolationForestParams& params) {
    if (points.size() < 2) throw std::invalid_argument("IsolationForest::fit: need at least 2 points");
    if (params.subsample < 2) throw std::invalid_argument("IsolationForest::fit: subsample size must be >= 2");
    if (params.trees < 1) throw std::invalid_argument("IsolationForest::fit: need at least one tree");

    std::vector<Point> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end());

    IsolationForest model;
    model.sample_size_ = static_cast<int>(std::min<std::size_t>(params.subsample, sorted.size()));
    model.height_limit_ = static_cast<int>(std::ceil(std::log2(static_cast<double>(model.sample_size_))));
    model.trees_.reserve(params.trees);

    std::vector<Point> sample(model.sample_size_);
    for (int t = 0; t < params.trees; ++t) {
      Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
      const auto chosen = sample_indices(sorted.size(), model.sample_size_, rng);
      for (std::size_t i = 0; i < chosen.size(); ++i) sample[i] = sorted[chosen[i]];
      Tree tree;
      model.grow(tree, sample, 0, sample.size(), 0, rng);
      model.trees_.push_back(std::move(tree));
    }
    return model;
  }

  /// Mean isolation depth over the trees, with the c(size) adjustment at
  /// external nodes that still hold more than one training point.
  double expected_path_length(const Point& x) const {
    double total = 0.0;
    for (const auto& tree : trees_) total += path_length(tree, x);
    return total / static_cast<double>(trees_.size());
  }

  /// 2^(-E[h(x)] / c(psi)); close to 1 for anomalies, below 0.5 for inliers.
  double score(const Point& x) const {
    return std::exp2(-expected_path_length(x) / average_path_length(sample_size_));
  }

  std::vector<double> score(std::span<const Point> xs) const {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = score(xs[i]);
    return out;
  }

  const std::vector<Tree>& trees() const { return trees_; }
  int sample_size() const { return sample_size_; }
  int height_limit() const { return height_limit_; }

  friend bool operator==(const IsolationForest&, const IsolationForest&) = default;

 private:
  // Floyd's algorithm: k distinct indices out of [0, n), returned sorted.
  static std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    for (std::size_t j = n - k; j < n; ++j) {
      const std::size_t candidate = static_cast<std::size_t>(uniform_index(rng, j + 1));
      auto it = std::lower_bound(chosen.begin(), chosen.end(), candidate);
      if (it != chosen.end() && *it == candidate) {
        chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), j), j);
      } else {
        chosen.insert(it, candidate);
      }
    }
    return chosen;
  }

  int grow(Tree& tree, std::vector<Point>& pts, std::size_t begin, std::size_t end, int depth, Rng& rng) const {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(Node{-1, 0.0, -1, -1, static_cast<int>(end - begin)});
    if (depth >= height_limit_ || end - begin <= 1) return id;

    std::array<double, Dim> lo, hi;
    lo.fill(INFINITY);
    hi.fill(-INFINITY);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t f = 0; f < Dim; ++f) {
        lo[f] = std::min(lo[f], pts[i][f]);
        hi[f] = std::max(hi[f], pts[i][f]);
      }
    }
    std::array<int, Dim> splittable{};
    int n_splittable = 0;
    for (std::size_t f = 0; f < Dim; ++f) {
      if (lo[f] < hi[f]) splittable[n_splittable++] = static_cast<int>(f);
    }
    if (n_splittable == 0) return id;

    const int feature = splittable[uniform_index(rng, n_splittable)];
    double split = uniform_real(rng, lo[feature], hi[feature]);
    if (!(split > lo[feature])) split = std::nextafter(lo[feature], hi[feature]);

    auto mid = std::partition(pts.begin() + begin, pts.begin() + end,
                              [&](const Point& p) { return p[feature] < split; });
    const auto middle = static_cast<std::size_t>(mid - pts.begin());

    const int left = grow(tree, pts, begin, middle, depth + 1, rng);
    const int right = grow(tree, pts, middle, end, depth + 1, rng);
    Node& node = tree.nodes[id];
    node.feature = feature;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  static double path_length(const Tree& tree, const Point& x) {
    int depth = 0;
    const Node* node = &tree.nodes[0];
    while (!node->external()) {
      node = &tree.nodes[x[node->feature] < node->split ? node->left : node->right];
      ++depth;
    }
    return depth + average_path_length(static_cast<std::uint64_t>(node->size));
  }

  std::vector<Tree> trees_;
  int sample_size_ = 0;
  int height_limit_ = 0;
};

}  // namespace pedspawn

#endif  // PEDSPAWN_ISOLATION_FOREST_HPP
