#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "logicmix/errors.hpp"
#include "logicmix/rng.hpp"
#include "logicmix/sample.hpp"

namespace logicmix {

/// Per-category soft target: a real in [0, 1], or Unknown (nullopt).
class SoftLabelVector {
 public:
  using Entry = std::optional<double>;

  SoftLabelVector() = default;
  explicit SoftLabelVector(std::vector<Entry> values) : values_(std::move(values)) {
    for (const Entry& e : values_)
      if (e && !(*e >= 0.0 && *e <= 1.0))
        throw ContractViolation("SoftLabelVector: entry outside [0, 1]");
  }

  std::size_t size() const { return values_.size(); }
  const Entry& operator[](std::size_t c) const { return values_[c]; }
  bool is_unknown(std::size_t c) const { return !values_[c].has_value(); }

  bool operator==(const SoftLabelVector&) const = default;

 private:
  std::vector<Entry> values_;
};

enum class VariantKind { MixupAN, WangAN, MLMixupAN, MixupPME, LogicMix, NoAugment };

std::string to_string(VariantKind kind);
std::optional<VariantKind> variant_from_string(const std::string& name);

/// Which augmentation a comparison run trains with, plus the variant-specific
/// alpha: Beta(alpha, alpha) shape for Mixup-AN, the uniform lower bound for
/// Mixup-PME. Ignored by the others.
struct VariantConfig {
  VariantKind kind = VariantKind::NoAugment;
  double alpha = 0.2;
  std::uint64_t seed = 0;
};

inline void validate(const VariantConfig& cfg) {
  if (cfg.kind == VariantKind::MixupAN && !(cfg.alpha > 0.0))
    throw ContractViolation("VariantConfig: Mixup-AN needs alpha > 0");
  if (cfg.kind == VariantKind::MixupPME && !(cfg.alpha >= 0.0 && cfg.alpha < 1.0))
    throw ContractViolation("VariantConfig: Mixup-PME needs 0 <= alpha < 1");
}

/// Assume-Negative transform: every Unknown becomes Negative, known labels
/// pass through. Output never contains Unknown.
inline LabelVector assume_negative(const LabelVector& vector) {
  std::vector<TernaryLabel> out(vector.size());
  for (std::size_t c = 0; c < vector.size(); ++c)
    out[c] = vector[c] == TernaryLabel::Unknown ? TernaryLabel::Negative : vector[c];
  return LabelVector(std::move(out));
}

namespace detail {

inline void require_same_shape(const Sample& a, const Sample& b, const char* who) {
  if (!a.image.same_shape(b.image) || a.labels.size() != b.labels.size())
    throw DimensionError(std::string(who) + ": sample shape mismatch");
}

// Binary OR of the two label vectors after Assume-Negative; always hard.
inline LabelVector an_or(const LabelVector& ya, const LabelVector& yb) {
  const LabelVector fa = assume_negative(ya);
  const LabelVector fb = assume_negative(yb);
  std::vector<TernaryLabel> out(fa.size());
  for (std::size_t c = 0; c < fa.size(); ++c) out[c] = or2(fa[c], fb[c]);
  return LabelVector(std::move(out));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Deterministic cores (lambda supplied). The drawing wrappers below pair each
// core with its variant's lambda distribution.
// ---------------------------------------------------------------------------

/// Mixup over Assume-Negative labels: soft target lambda*f(y_a) + (1-lambda)*f(y_b).
inline std::pair<ImageTensor, SoftLabelVector> mixup_an_with_lambda(const Sample& a,
                                                                    const Sample& b,
                                                                    double lambda) {
  detail::require_same_shape(a, b, "mixup_an");
  const LabelVector fa = assume_negative(a.labels);
  const LabelVector fb = assume_negative(b.labels);
  std::vector<SoftLabelVector::Entry> soft(fa.size());
  for (std::size_t c = 0; c < fa.size(); ++c)
    soft[c] = lambda * static_cast<double>(fa[c] == TernaryLabel::Positive) +
              (1.0 - lambda) * static_cast<double>(fb[c] == TernaryLabel::Positive);
  return {mix_images(a.image, b.image, lambda), SoftLabelVector(std::move(soft))};
}

inline std::pair<ImageTensor, SoftLabelVector> mixup_an(const Sample& a, const Sample& b,
                                                        double alpha, RngStream& rng) {
  if (!(alpha > 0.0)) throw ContractViolation("mixup_an: alpha must be > 0");
  return mixup_an_with_lambda(a, b, rng.beta(alpha, alpha));
}

/// Wang et al.: fixed lambda = 0.5 and hard OR labels, but only on enabled
/// epochs; the alternation starts enabled at epoch 0.
inline bool wang_enabled(int epoch) { return epoch % 2 == 0; }

inline Sample wang_mix(const Sample& a, const Sample& b, int epoch) {
  if (!wang_enabled(epoch)) return a;
  detail::require_same_shape(a, b, "wang_mix");
  return Sample{join_ids(std::initializer_list<Sample>{a, b}),
                mix_images(a.image, b.image, 0.5), detail::an_or(a.labels, b.labels)};
}

/// Multi-label Mixup: lambda ~ U[0,1] images, hard OR labels.
inline Sample ml_mixup_with_lambda(const Sample& a, const Sample& b, double lambda) {
  detail::require_same_shape(a, b, "ml_mixup");
  return Sample{join_ids(std::initializer_list<Sample>{a, b}),
                mix_images(a.image, b.image, lambda), detail::an_or(a.labels, b.labels)};
}

inline Sample ml_mixup(const Sample& a, const Sample& b, RngStream& rng) {
  return ml_mixup_with_lambda(a, b, rng.uniform_double());
}

/// Mixup-PME: unknowns count as 0.5, except that an Unknown in the *first*
/// sample gates the whole entry back to Unknown. lambda ~ U[alpha, 1].
inline std::pair<ImageTensor, SoftLabelVector> mixup_pme_with_lambda(const Sample& a,
                                                                     const Sample& b,
                                                                     double lambda) {
  detail::require_same_shape(a, b, "mixup_pme");
  auto f_hat = [](TernaryLabel l) {
    return l == TernaryLabel::Unknown ? 0.5 : static_cast<double>(l == TernaryLabel::Positive);
  };
  std::vector<SoftLabelVector::Entry> soft(a.labels.size());
  for (std::size_t c = 0; c < a.labels.size(); ++c) {
    if (a.labels[c] == TernaryLabel::Unknown)
      soft[c] = std::nullopt;
    else
      soft[c] = lambda * f_hat(a.labels[c]) + (1.0 - lambda) * f_hat(b.labels[c]);
  }
  return {mix_images(a.image, b.image, lambda), SoftLabelVector(std::move(soft))};
}

inline std::pair<ImageTensor, SoftLabelVector> mixup_pme(const Sample& a, const Sample& b,
                                                         double alpha, RngStream& rng) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw ContractViolation("mixup_pme: alpha must be in [0, 1)");
  return mixup_pme_with_lambda(a, b, alpha + (1.0 - alpha) * rng.uniform_double());
}

}  // namespace logicmix
