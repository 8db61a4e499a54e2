#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "logicmix/dataset.hpp"
#include "logicmix/errors.hpp"
#include "logicmix/ternary.hpp"

namespace logicmix {

/// Decoupled confidence thresholds on pre-sigmoid logits: above theta_plus a
/// positive pseudo-label is generated, below theta_minus a negative one.
struct CurriculumConfig {
  double theta_plus = 2.0;
  double theta_minus = -2.0;
};

inline void validate(const CurriculumConfig& cfg) {
  if (!(cfg.theta_minus < cfg.theta_plus))
    throw ContractViolation("CurriculumConfig: need theta_minus < theta_plus");
}

/// N x C pre-sigmoid logits, one row per dataset sample.
using LogitMatrix = Eigen::MatrixXd;

struct PseudoLabel {
  std::size_t sample;
  std::size_t category;
  bool positive;

  bool operator==(const PseudoLabel&) const = default;
};

/// Pseudo-labels generated at the end of one epoch. Every entry keys a
/// position that was Unknown in the dataset at generation time; entries are
/// sorted by (sample, category).
class PseudoLabelSet {
 public:
  PseudoLabelSet(std::vector<PseudoLabel> entries, int generated_epoch)
      : entries_(std::move(entries)), generated_epoch_(generated_epoch) {}

  const std::vector<PseudoLabel>& entries() const { return entries_; }
  int generated_epoch() const { return generated_epoch_; }

  /// Pseudo value at (i, c), or Unknown when the position is not keyed.
  TernaryLabel lookup(std::size_t i, std::size_t c) const {
    const PseudoLabel probe{i, c, false};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                               [](const PseudoLabel& a, const PseudoLabel& b) {
                                 return a.sample != b.sample ? a.sample < b.sample
                                                             : a.category < b.category;
                               });
    if (it == entries_.end() || it->sample != i || it->category != c)
      return TernaryLabel::Unknown;
    return it->positive ? TernaryLabel::Positive : TernaryLabel::Negative;
  }

 private:
  std::vector<PseudoLabel> entries_;
  int generated_epoch_;
};

/// Thresholds the logits at the dataset's Unknown positions only. Strict
/// inequalities on both sides; logits exactly at a threshold generate nothing.
inline PseudoLabelSet generate_pseudo_labels(const LogitMatrix& logits,
                                             const PartialDataset& dataset,
                                             const CurriculumConfig& config, int epoch) {
  validate(config);
  if (logits.rows() != static_cast<Eigen::Index>(dataset.size()) ||
      logits.cols() != static_cast<Eigen::Index>(dataset.category_count()))
    throw DimensionError("generate_pseudo_labels: logit matrix is " +
                         std::to_string(logits.rows()) + "x" + std::to_string(logits.cols()) +
                         ", dataset needs " + std::to_string(dataset.size()) + "x" +
                         std::to_string(dataset.category_count()));
  if (!logits.allFinite())
    throw ContractViolation("generate_pseudo_labels: non-finite logit");

  std::vector<PseudoLabel> entries;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const LabelVector& labels = dataset.sample(i).labels;
    for (std::size_t c = 0; c < labels.size(); ++c) {
      if (labels[c] != TernaryLabel::Unknown) continue;
      const double p = logits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      if (p > config.theta_plus) entries.push_back(PseudoLabel{i, c, true});
      else if (p < config.theta_minus) entries.push_back(PseudoLabel{i, c, false});
    }
  }
  return PseudoLabelSet(std::move(entries), epoch);
}

/// Label resolution for one training epoch: pseudo-labels are visible exactly
/// in the epoch after their generation, then fall back to the dataset.
class EpochLabelView {
 public:
  EpochLabelView(const PartialDataset& dataset, const PseudoLabelSet* pseudo, int current_epoch)
      : dataset_(&dataset), pseudo_(pseudo), current_epoch_(current_epoch) {}

  TernaryLabel operator()(std::size_t i, std::size_t c) const {
    if (pseudo_ && current_epoch_ == pseudo_->generated_epoch() + 1) {
      const TernaryLabel p = pseudo_->lookup(i, c);
      if (p != TernaryLabel::Unknown) return p;
    }
    return dataset_->sample(i).labels[c];
  }

  /// The whole resolved vector for one sample.
  LabelVector labels(std::size_t i) const {
    const LabelVector& base = dataset_->sample(i).labels;
    if (!pseudo_ || current_epoch_ != pseudo_->generated_epoch() + 1) return base;
    std::vector<TernaryLabel> out(base.begin(), base.end());
    for (std::size_t c = 0; c < out.size(); ++c)
      if (out[c] == TernaryLabel::Unknown) {
        const TernaryLabel p = pseudo_->lookup(i, c);
        if (p != TernaryLabel::Unknown) out[c] = p;
      }
    return LabelVector(std::move(out));
  }

 private:
  const PartialDataset* dataset_;
  const PseudoLabelSet* pseudo_;
  int current_epoch_;
};

inline EpochLabelView compose_epoch_view(const PartialDataset& dataset,
                                         const PseudoLabelSet* pseudo, int current_epoch) {
  if (pseudo && pseudo->generated_epoch() > current_epoch)
    throw ContractViolation("compose_epoch_view: pseudo-labels generated in the future");
  return EpochLabelView(dataset, pseudo, current_epoch);
}

}  // namespace logicmix
