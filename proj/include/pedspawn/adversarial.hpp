#ifndef PEDSPAWN_ADVERSARIAL_HPP
#define PEDSPAWN_ADVERSARIAL_HPP

// Numerical kernels of the masked, class-specific, cost-sensitive adversarial
// objective: class masks, mask pyramids, masked MSE, the class-balance weight
// and the aggregated objective. Pure functions; safe to call concurrently.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pedspawn/raster.hpp"

namespace pedspawn::adversarial {

using SemanticMap = LabelImage;
using ClassMask = Raster<std::uint8_t, struct ClassMaskTag>;
using ScoreMap = Raster<double, struct ScoreMapTag>;

/// Lookup table over the 8-bit label space.
class ClassSet {
 public:
  ClassSet() { member_.fill(false); }
  ClassSet(std::initializer_list<int> labels) : ClassSet() {
    for (int l : labels) add(l);
  }

  void add(int label) {
    if (label < 0 || label > 255) throw std::invalid_argument("ClassSet: label outside 0..255");
    member_[static_cast<std::size_t>(label)] = true;
  }
  bool contains(std::uint8_t label) const { return member_[label]; }

  ClassSet complement() const {
    ClassSet out;
    for (std::size_t i = 0; i < member_.size(); ++i) out.member_[i] = !member_[i];
    return out;
  }

 private:
  std::array<bool, 256> member_;
};

inline const ClassSet& person_classes() {
  static const ClassSet set{24};
  return set;
}

inline ClassMask class_mask(const SemanticMap& labels, const ClassSet& classes) {
  ClassMask m(labels.width(), labels.height(), 0);
  auto src = labels.pixels();
  auto dst = m.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = classes.contains(src[i]) ? 1 : 0;
  return m;
}

inline ClassMask person_mask(const SemanticMap& labels) { return class_mask(labels, person_classes()); }
inline ClassMask rest_mask(const SemanticMap& labels) { return class_mask(labels, person_classes().complement()); }

inline std::uint64_t mask_l1(const ClassMask& m) {
  return std::accumulate(m.pixels().begin(), m.pixels().end(), std::uint64_t{0});
}

/// Max pooling onto an out_w x out_h grid. Output cell (i, j) covers input
/// columns [floor(i*W/w), ceil((i+1)*W/w)) and likewise for rows (the
/// adaptive pooling window), so any set input pixel survives every level.
inline ClassMask downsample_mask(const ClassMask& m, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("downsample_mask: output dimensions must be positive");
  if (out_w > m.width() || out_h > m.height()) throw std::invalid_argument("downsample_mask: output larger than input");
  ClassMask out(out_w, out_h, 0);
  const long W = m.width(), H = m.height();
  for (long j = 0; j < out_h; ++j) {
    const long y0 = j * H / out_h;
    const long y1 = ((j + 1) * H + out_h - 1) / out_h;
    for (long i = 0; i < out_w; ++i) {
      const long x0 = i * W / out_w;
      const long x1 = ((i + 1) * W + out_w - 1) / out_w;
      std::uint8_t any = 0;
      for (long y = y0; y < y1 && !any; ++y) {
        for (long x = x0; x < x1; ++x) {
          if (m(static_cast<int>(x), static_cast<int>(y))) {
            any = 1;
            break;
          }
        }
      }
      out(static_cast<int>(i), static_cast<int>(j)) = any;
    }
  }
  return out;
}

/// Mask resampled to each requested level size, in order.
inline std::vector<ClassMask> mask_pyramid(const ClassMask& m, std::span<const std::pair<int, int>> sizes) {
  std::vector<ClassMask> out;
  out.reserve(sizes.size());
  for (auto [w, h] : sizes) out.push_back(downsample_mask(m, w, h));
  return out;
}

/// (1 / (w h)) * || (score - target) o mask ||_F^2 with w, h the full image
/// size. The normalizer does not depend on the mask area, so a larger class
/// region contributes proportionally more.
inline double masked_mse(const ScoreMap& score, const ScoreMap& target, const ClassMask& mask, int w, int h) {
  require_same_shape(score, target, "masked_mse");
  require_same_shape(score, mask, "masked_mse");
  if (w <= 0 || h <= 0) throw std::invalid_argument("masked_mse: normalizer dimensions must be positive");
  auto s = score.pixels();
  auto t = target.pixels();
  auto m = mask.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!m[i]) continue;
    const double r = s[i] - t[i];
    sum += r * r;
  }
  return sum / (static_cast<double>(w) * static_cast<double>(h));
}

/// d masked_mse / d score = 2 mask o (score - target) / (w h); exactly zero off-mask.
inline ScoreMap masked_mse_gradient(const ScoreMap& score, const ScoreMap& target, const ClassMask& mask, int w, int h) {
  require_same_shape(score, target, "masked_mse_gradient");
  require_same_shape(score, mask, "masked_mse_gradient");
  if (w <= 0 || h <= 0) throw std::invalid_argument("masked_mse_gradient: normalizer dimensions must be positive");
  ScoreMap g(score.width(), score.height(), 0.0);
  const double scale = 2.0 / (static_cast<double>(w) * static_cast<double>(h));
  auto s = score.pixels();
  auto t = target.pixels();
  auto m = mask.pixels();
  auto out = g.pixels();
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = m[i] ? scale * (s[i] - t[i]) : 0.0;
  return g;
}

/// Which score each side of the discriminator is pulled toward.
///   Standard   real -> J (ones), fake -> 0   (least-squares GAN)
///   AsPrinted  real -> 0, fake -> J          (targets exactly as typeset)
enum class TargetConvention { Standard, AsPrinted };

inline TargetConvention parse_convention(std::string_view name) {
  if (name == "standard") return TargetConvention::Standard;
  if (name == "as-printed") return TargetConvention::AsPrinted;
  throw std::invalid_argument("unknown discriminator target convention '" + std::string(name) + "'");
}

inline std::string_view to_string(TargetConvention c) {
  return c == TargetConvention::Standard ? "standard" : "as-printed";
}

/// Single-sample class discriminator loss; masks must already match the score-map size.
inline double discriminator_loss(const ScoreMap& real_score, const ScoreMap& fake_score, const ClassMask& real_mask,
                                 const ClassMask& fake_mask, int w, int h,
                                 TargetConvention convention = TargetConvention::Standard) {
  const double real_target = convention == TargetConvention::Standard ? 1.0 : 0.0;
  const double fake_target = 1.0 - real_target;
  const ScoreMap real_t(real_score.width(), real_score.height(), real_target);
  const ScoreMap fake_t(fake_score.width(), fake_score.height(), fake_target);
  return masked_mse(real_score, real_t, real_mask, w, h) + masked_mse(fake_score, fake_t, fake_mask, w, h);
}

/// Streaming dataset-wide class-balance weight: person pixels over rest pixels.
/// Counts are integers, so merging partial accumulators is exact and order-free.
class LambdaAccumulator {
 public:
  void add(const ClassMask& person, const ClassMask& rest) {
    person_ += mask_l1(person);
    rest_ += mask_l1(rest);
    ++pairs_;
  }

  void add_counts(std::uint64_t person, std::uint64_t rest) {
    person_ += person;
    rest_ += rest;
    ++pairs_;
  }

  LambdaAccumulator& merge(const LambdaAccumulator& other) {
    person_ += other.person_;
    rest_ += other.rest_;
    pairs_ += other.pairs_;
    return *this;
  }

  std::uint64_t person_pixels() const { return person_; }
  std::uint64_t rest_pixels() const { return rest_; }
  std::uint64_t pairs() const { return pairs_; }

  double lambda() const {
    if (pairs_ == 0) throw std::invalid_argument("compute_lambda: no mask pairs");
    if (rest_ == 0) throw std::invalid_argument("compute_lambda: rest-class pixel mass is zero");
    return static_cast<double>(person_) / static_cast<double>(rest_);
  }

 private:
  std::uint64_t person_ = 0;
  std::uint64_t rest_ = 0;
  std::uint64_t pairs_ = 0;
};

struct MaskPair {
  ClassMask person;
  ClassMask rest;
};

inline double compute_lambda(std::span<const MaskPair> dataset) {
  LambdaAccumulator acc;
  for (const auto& p : dataset) acc.add(p.person, p.rest);
  return acc.lambda();
}

/// Correctly rounded sum of doubles (Shewchuk partials with a final
/// half-way correction, the algorithm behind Python's math.fsum).
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  /// Adds the exact product a * b (split into two doubles with fma).
  void add_product(double a, double b) {
    const double p = a * b;
    add(p);
    add(std::fma(a, b, -p));
  }

  double value() const {
    if (partials_.empty()) return 0.0;
    std::size_t n = partials_.size();
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

/// Sum of the class-specific objectives.
inline double aggregate_adversarial(std::span<const double> per_class) {
  if (per_class.empty()) throw std::invalid_argument("aggregate_adversarial: no class losses");
  ExactSum sum;
  for (double l : per_class) sum.add(l);
  return sum.value();
}

struct ObjectiveWeights {
  double lambda_class = 0.2;
  double lambda_cyc = 10.0;
};

/// Weight presets: the value used for the reported training run, and the cycle weight.
inline constexpr double kExperimentLambda = 0.2;
inline constexpr double kCycleWeight = 10.0;

/// Adversarial terms for both translation directions: into the real domain
/// (discriminators D_r) and into the augmented domain (D_a).
struct AdversarialTerms {
  double real_person = 0.0;
  double real_rest = 0.0;
  double augmented_person = 0.0;
  double augmented_rest = 0.0;
};

/// lambda_cyc * L_cyc + L(D_r^p) + lambda * L(D_r^r) + L(D_a^p) + lambda * L(D_a^r),
/// evaluated with a single rounding at the end.
inline double total_objective(const AdversarialTerms& adv, double cycle_loss, const ObjectiveWeights& weights) {
  if (weights.lambda_class < 0.0 || weights.lambda_cyc < 0.0) {
    throw std::invalid_argument("total_objective: weights must be non-negative");
  }
  if (cycle_loss < 0.0) throw std::invalid_argument("total_objective: cycle loss must be non-negative");
  ExactSum sum;
  sum.add_product(weights.lambda_cyc, cycle_loss);
  sum.add(adv.real_person);
  sum.add_product(weights.lambda_class, adv.real_rest);
  sum.add(adv.augmented_person);
  sum.add_product(weights.lambda_class, adv.augmented_rest);
  return sum.value();
}

}  // namespace pedspawn::adversarial

#endif  // PEDSPAWN_ADVERSARIAL_HPP
