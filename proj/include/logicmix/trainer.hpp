#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logicmix/curriculum.hpp"
#include "logicmix/dataset.hpp"
#include "logicmix/errors.hpp"
#include "logicmix/pipeline.hpp"
#include "logicmix/variants.hpp"

namespace logicmix {

/// Linear multi-label scorer: logits = features * weights + biases.
struct LinearModel {
  Eigen::MatrixXd weights;     // D x C
  Eigen::RowVectorXd biases;   // 1 x C

  static LinearModel zeros(Eigen::Index d, Eigen::Index c) {
    return LinearModel{Eigen::MatrixXd::Zero(d, c), Eigen::RowVectorXd::Zero(c)};
  }
};

/// Asymmetric focusing-with-margin loss parameters. The positive term is
/// -(1-p)^gamma_plus * log p; the negative term is -(p_m)^gamma_minus *
/// log(1-p_m) with p_m = max(p - margin, 0), p = sigmoid(logit).
struct LossConfig {
  double gamma_plus = 4.0;
  double gamma_minus = 0.0;
  double margin = 0.05;
};

inline void validate(const LossConfig& cfg) {
  if (!(cfg.gamma_plus >= 0.0 && cfg.gamma_minus >= 0.0))
    throw ContractViolation("LossConfig: gammas must be >= 0");
  if (!(cfg.margin >= 0.0 && cfg.margin < 1.0))
    throw ContractViolation("LossConfig: margin must be in [0, 1)");
}

/// Per-entry training targets: `values` in [0, 1] interpolate the positive
/// and negative loss terms; entries with mask 0 are Unknown and contribute
/// neither loss nor gradient.
struct TargetMatrix {
  Eigen::ArrayXXd values;  // N x C, meaningful where mask is 1
  Eigen::ArrayXXd mask;    // N x C, 1.0 = known, 0.0 = ignore

  static TargetMatrix zeros(Eigen::Index n, Eigen::Index c) {
    return TargetMatrix{Eigen::ArrayXXd::Zero(n, c), Eigen::ArrayXXd::Zero(n, c)};
  }
  static TargetMatrix from_labels(std::span<const LabelVector> rows);
  static TargetMatrix from_soft(std::span<const SoftLabelVector> rows);

  void set_row(Eigen::Index r, const LabelVector& labels);
  void set_row(Eigen::Index r, const SoftLabelVector& soft);
};

struct LossResult {
  double loss = 0.0;
  Eigen::MatrixXd grad;  // d(loss)/d(logits), same shape as logits
};

struct Metrics {
  std::vector<double> per_category_ap;  // 0.0 for categories without positives
  double mean_ap = 0.0;                 // mean over categories with >= 1 positive
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 1.0;
  std::uint64_t seed = 0;
  VariantConfig variant;
  std::optional<LogicMixConfig> logicmix;      // used when variant is LogicMix
  std::optional<CurriculumConfig> curriculum;  // pseudo-labeling when set
  LossConfig loss;
};

inline void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw ContractViolation("TrainConfig: epochs and batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw ContractViolation("TrainConfig: learning_rate must be > 0");
  validate(cfg.variant);
  if (cfg.variant.kind == VariantKind::LogicMix && !cfg.logicmix)
    throw ContractViolation("TrainConfig: LogicMix variant needs a LogicMixConfig");
  if (cfg.logicmix) validate(*cfg.logicmix);
  if (cfg.curriculum) validate(*cfg.curriculum);
  validate(cfg.loss);
}

LogitMatrix forward(const LinearModel& model, const Eigen::MatrixXd& features);

/// Loss and analytic gradient w.r.t. the logits, averaged over unmasked
/// entries (zero loss and gradient when everything is masked).
LossResult masked_asymmetric_loss(const LogitMatrix& logits, const TargetMatrix& targets,
                                  const LossConfig& config);

/// AP of one category: precision averaged at each positive's rank, scores
/// descending. Ties are broken by the stable original index order, so equal
/// scores keep their input order.
double average_precision(const Eigen::VectorXd& scores, const std::vector<bool>& labels);

/// Per-category AP plus the mean over categories that have positives.
Metrics mean_ap(const Eigen::MatrixXd& scores, const std::vector<std::vector<bool>>& labels);

/// Synthetic multi-label data: category prototypes in feature space; each
/// sample is the normalized sum of its active prototypes plus Gaussian noise.
struct SyntheticData {
  Eigen::MatrixXd features;  // N x D
  PartialDataset dataset;    // fully labeled, ground truth attached
};

SyntheticData make_synthetic_dataset(std::size_t n, std::size_t c, std::size_t d,
                                     std::uint64_t seed);

/// Minibatch SGD with the configured variant's augmentation; labels resolve
/// through the curriculum view when enabled.
LinearModel train_model(const Eigen::MatrixXd& features, const PartialDataset& dataset,
                        const TrainConfig& config);

Metrics evaluate(const LinearModel& model, const Eigen::MatrixXd& features,
                 const std::vector<std::vector<bool>>& truth);

// --- Variant comparison -------------------------------------------------------

struct ComparisonDataConfig {
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
  std::size_t categories = 10;
  std::size_t feature_dim = 32;
  double known_proportion = 0.5;
};

struct ComparisonRun {
  VariantKind variant;
  std::uint64_t seed;
  Metrics metrics;
};

struct VariantSummary {
  VariantKind variant;
  double mean_map = 0.0;
  double sd_map = 0.0;
};

struct ComparisonResult {
  std::vector<ComparisonRun> runs;
  std::vector<VariantSummary> summary;
};

/// Trains one model per (config, seed) on shared per-seed synthetic data with
/// `known_proportion` of labels kept, evaluating mAP on the held-out fully
/// labeled split. Config seeds are overridden by each run's seed so that all
/// variants see identical data and identical non-augmentation randomness.
ComparisonResult run_comparison(const std::vector<TrainConfig>& configs,
                                const ComparisonDataConfig& data,
                                const std::vector<std::uint64_t>& seeds);

std::string comparison_to_json(const ComparisonResult& result);
std::string format_comparison_table(const ComparisonResult& result);

}  // namespace logicmix
