#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "logicmix/errors.hpp"
#include "logicmix/image.hpp"
#include "logicmix/ternary.hpp"

namespace logicmix {

/// Nonnegative mixing weights, one per participant, at least one positive.
class MixWeights {
 public:
  explicit MixWeights(std::vector<double> weights) : weights_(std::move(weights)) {
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0))  // catches negatives and NaN
        throw ContractViolation("MixWeights: weights must be nonnegative");
      sum += w;
    }
    if (!(sum > 0.0)) throw ContractViolation("MixWeights: all weights are zero");
  }

  static MixWeights equal(std::size_t k) { return MixWeights(std::vector<double>(k, 1.0)); }

  std::size_t size() const { return weights_.size(); }
  std::span<const double> values() const { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Weight-normalized convex combination of equally sized dense arrays,
/// accumulated in double regardless of the storage scalar.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> weighted_mean(
    std::span<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> arrays,
    std::span<const double> weights) {
  if (arrays.empty()) throw ContractViolation("weighted_mean: empty input");
  if (arrays.size() != weights.size())
    throw DimensionError("weighted_mean: weight count != array count");
  const Eigen::Index n = arrays.front().size();
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n);
  double wsum = 0.0;
  for (std::size_t k = 0; k < arrays.size(); ++k) {
    if (arrays[k].size() != n) throw DimensionError("weighted_mean: size mismatch");
    acc += weights[k] * arrays[k].template cast<double>();
    wsum += weights[k];
  }
  acc /= wsum;
  return acc.template cast<Scalar>();
}

/// An image paired with its ternary label vector. The id is an opaque
/// provenance string; mixed samples concatenate participant ids with '+'.
struct Sample {
  std::string id;
  ImageTensor image;
  LabelVector labels;
};

/// Weighted image mix: each output intensity is the weight-normalized convex
/// combination of the corresponding input intensities.
inline ImageTensor mix_images(std::span<const ImageTensor> images, const MixWeights& weights) {
  if (images.empty()) throw ContractViolation("mix_images: empty image sequence");
  if (weights.size() != images.size())
    throw DimensionError("mix_images: weight count != image count");
  const ImageTensor& first = images.front();
  std::vector<Eigen::ArrayXf> arrays;
  arrays.reserve(images.size());
  for (const ImageTensor& img : images) {
    if (!img.same_shape(first)) throw DimensionError("mix_images: image shape mismatch");
    arrays.push_back(img.data());
  }
  Eigen::ArrayXf mixed =
      weighted_mean<float>(arrays, weights.values()).min(1.0f).max(0.0f);
  return ImageTensor(first.height(), first.width(), first.channels(), std::move(mixed));
}

/// Two-image convenience overload for the lambda/(1 - lambda) variants.
inline ImageTensor mix_images(const ImageTensor& a, const ImageTensor& b, double lambda) {
  const ImageTensor imgs[] = {a, b};
  return mix_images(imgs, MixWeights({lambda, 1.0 - lambda}));
}

inline std::string join_ids(std::span<const Sample> samples) {
  std::string id;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k > 0) id += '+';
    id += samples[k].id;
  }
  return id;
}

/// Whole-sample mix: equal-weight image mean plus ternary OR of the labels.
inline Sample mix_samples(std::span<const Sample> samples) {
  if (samples.empty()) throw ContractViolation("mix_samples: empty sample sequence");
  std::vector<ImageTensor> images;
  std::vector<LabelVector> labels;
  images.reserve(samples.size());
  labels.reserve(samples.size());
  for (const Sample& s : samples) {
    images.push_back(s.image);
    labels.push_back(s.labels);
  }
  return Sample{join_ids(samples), mix_images(images, MixWeights::equal(samples.size())),
                mix_label_vectors(labels)};
}

inline Sample mix_samples(std::initializer_list<Sample> samples) {
  return mix_samples(std::span<const Sample>(samples.begin(), samples.size()));
}

}  // namespace logicmix
