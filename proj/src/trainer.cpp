#include "logicmix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace logicmix {

// --- Targets -------------------------------------------------------------------

void TargetMatrix::set_row(Eigen::Index r, const LabelVector& labels) {
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const auto cc = static_cast<Eigen::Index>(c);
    if (labels[c] == TernaryLabel::Unknown) {
      values(r, cc) = 0.0;
      mask(r, cc) = 0.0;
    } else {
      values(r, cc) = labels[c] == TernaryLabel::Positive ? 1.0 : 0.0;
      mask(r, cc) = 1.0;
    }
  }
}

void TargetMatrix::set_row(Eigen::Index r, const SoftLabelVector& soft) {
  for (std::size_t c = 0; c < soft.size(); ++c) {
    const auto cc = static_cast<Eigen::Index>(c);
    if (soft.is_unknown(c)) {
      values(r, cc) = 0.0;
      mask(r, cc) = 0.0;
    } else {
      values(r, cc) = *soft[c];
      mask(r, cc) = 1.0;
    }
  }
}

TargetMatrix TargetMatrix::from_labels(std::span<const LabelVector> rows) {
  if (rows.empty()) throw ContractViolation("TargetMatrix: no rows");
  TargetMatrix t = zeros(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size())
      throw DimensionError("TargetMatrix: ragged label rows");
    t.set_row(static_cast<Eigen::Index>(r), rows[r]);
  }
  return t;
}

TargetMatrix TargetMatrix::from_soft(std::span<const SoftLabelVector> rows) {
  if (rows.empty()) throw ContractViolation("TargetMatrix: no rows");
  TargetMatrix t = zeros(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size())
      throw DimensionError("TargetMatrix: ragged soft rows");
    t.set_row(static_cast<Eigen::Index>(r), rows[r]);
  }
  return t;
}

// --- Forward and loss ------------------------------------------------------------

LogitMatrix forward(const LinearModel& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.weights.rows())
    throw DimensionError("forward: features are " + std::to_string(features.cols()) +
                         "-dimensional, weights expect " + std::to_string(model.weights.rows()));
  if (model.weights.cols() != model.biases.cols())
    throw DimensionError("forward: bias/weight category mismatch");
  return (features * model.weights).rowwise() + model.biases;
}

namespace {

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

LossResult masked_asymmetric_loss(const LogitMatrix& logits, const TargetMatrix& targets,
                                  const LossConfig& config) {
  validate(config);
  if (logits.rows() != targets.values.rows() || logits.cols() != targets.values.cols() ||
      logits.rows() != targets.mask.rows() || logits.cols() != targets.mask.cols())
    throw DimensionError("masked_asymmetric_loss: logit/target shape mismatch");
  if (!logits.allFinite()) throw ContractViolation("masked_asymmetric_loss: non-finite logit");

  const double gp = config.gamma_plus;
  const double gn = config.gamma_minus;
  const double m = config.margin;

  LossResult res;
  res.grad = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  double total = 0.0;
  double count = 0.0;

  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      if (targets.mask(r, c) == 0.0) continue;
      const double w = targets.values(r, c);
      if (!(w >= 0.0 && w <= 1.0))
        throw ContractViolation("masked_asymmetric_loss: soft target outside [0, 1]");
      const double z = logits(r, c);
      const double p = stable_sigmoid(z);
      const double q = stable_sigmoid(-z);  // 1 - p without cancellation
      const double log_p = -softplus(-z);

      // Positive term: -(1-p)^gp * log p, focused away once p is confident.
      const double qgp = std::pow(q, gp);
      const double loss_pos = -qgp * log_p;
      const double grad_pos = gp * p * qgp * log_p - qgp * q;

      // Negative term with margin shift: -(p_m)^gn * log(1 - p_m).
      double loss_neg = 0.0;
      double grad_neg = 0.0;
      const double pm = p - m;
      if (pm > 0.0) {
        const double one_minus_pm = m == 0.0 ? q : q + m;
        const double log_1mpm = m == 0.0 ? -softplus(z) : std::log(one_minus_pm);
        const double pmgn = std::pow(pm, gn);
        loss_neg = -pmgn * log_1mpm;
        grad_neg = p * q * (pmgn / one_minus_pm);
        if (gn != 0.0) grad_neg -= p * q * gn * std::pow(pm, gn - 1.0) * log_1mpm;
      }

      total += w * loss_pos + (1.0 - w) * loss_neg;
      res.grad(r, c) = w * grad_pos + (1.0 - w) * grad_neg;
      count += 1.0;
    }
  }

  if (count == 0.0) {
    res.loss = 0.0;
    res.grad.setZero();
    return res;
  }
  res.loss = total / count;
  res.grad /= count;
  return res;
}

// --- Ranking metrics ---------------------------------------------------------------

double average_precision(const Eigen::VectorXd& scores, const std::vector<bool>& labels) {
  const std::size_t n = labels.size();
  if (static_cast<std::size_t>(scores.size()) != n)
    throw DimensionError("average_precision: score/label length mismatch");
  std::size_t positives = 0;
  for (bool l : labels) positives += l;
  if (positives == 0) throw ContractViolation("average_precision: no positive labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });

  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (labels[order[rank]]) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return ap / static_cast<double>(positives);
}

Metrics mean_ap(const Eigen::MatrixXd& scores, const std::vector<std::vector<bool>>& labels) {
  const std::size_t n = labels.size();
  if (static_cast<std::size_t>(scores.rows()) != n)
    throw DimensionError("mean_ap: row count mismatch");
  const std::size_t c = n == 0 ? 0 : labels.front().size();
  if (static_cast<std::size_t>(scores.cols()) != c) throw DimensionError("mean_ap: column count mismatch");

  Metrics out;
  out.per_category_ap.assign(c, 0.0);
  double sum = 0.0;
  std::size_t included = 0;
  std::vector<bool> column(n);
  for (std::size_t j = 0; j < c; ++j) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i].size() != c) throw DimensionError("mean_ap: ragged label rows");
      column[i] = labels[i][j];
      any = any || column[i];
    }
    if (!any) continue;  // category without positives is excluded, AP left at 0
    const double ap = average_precision(scores.col(static_cast<Eigen::Index>(j)), column);
    out.per_category_ap[j] = ap;
    sum += ap;
    ++included;
  }
  if (included == 0) throw ContractViolation("mean_ap: no category has a positive label");
  out.mean_ap = sum / static_cast<double>(included);
  return out;
}

// --- Synthetic data -------------------------------------------------------------------

SyntheticData make_synthetic_dataset(std::size_t n, std::size_t c, std::size_t d,
                                     std::uint64_t seed) {
  if (n == 0 || c == 0 || d == 0)
    throw ContractViolation("make_synthetic_dataset: sizes must be positive");

  std::vector<Eigen::VectorXd> prototypes(c);
  for (std::size_t j = 0; j < c; ++j) {
    RngStream rng(seed, streams::kInit, j);
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.normal();
    v.normalize();
    prototypes[j] = std::move(v);
  }

  Eigen::MatrixXd features(n, d);
  std::vector<DatasetSample> samples;
  std::vector<std::vector<bool>> truth;
  samples.reserve(n);
  truth.reserve(n);
  const double p_active = 2.0 / static_cast<double>(c);

  std::vector<std::string> names(c);
  for (std::size_t j = 0; j < c; ++j) names[j] = "cat_" + std::to_string(j);

  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed, streams::kData, i);
    std::vector<bool> active(c, false);
    bool any = false;
    for (std::size_t j = 0; j < c; ++j) {
      active[j] = rng.bernoulli(p_active);
      any = any || active[j];
    }
    if (!any) active[rng.bounded(c)] = true;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < c; ++j)
      if (active[j]) x += prototypes[j];
    x.normalize();
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] += 0.1 * rng.normal();
    features.row(static_cast<Eigen::Index>(i)) = x.transpose();

    std::vector<TernaryLabel> labels(c);
    for (std::size_t j = 0; j < c; ++j)
      labels[j] = active[j] ? TernaryLabel::Positive : TernaryLabel::Negative;
    samples.push_back(DatasetSample{"synth_" + std::to_string(i), "", LabelVector(std::move(labels))});
    truth.push_back(std::move(active));
  }

  return SyntheticData{std::move(features),
                       PartialDataset(CategoryTable(std::move(names)), std::move(samples),
                                      std::move(truth))};
}

// --- Training ----------------------------------------------------------------------

namespace {

// Seeded Fisher-Yates; std::shuffle's draw pattern is not pinned by the
// standard, this one is.
std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i)
    std::swap(idx[i - 1], idx[rng.bounded(i)]);
  return idx;
}

struct BuiltSample {
  Eigen::RowVectorXd features;
  LabelVector hard;         // used when soft is empty
  SoftLabelVector soft;     // non-empty for the soft-target variants
  bool is_soft = false;
};

Eigen::RowVectorXd blend_rows(const Eigen::MatrixXd& x, std::size_t a, std::size_t b,
                              double lambda) {
  return lambda * x.row(static_cast<Eigen::Index>(a)) +
         (1.0 - lambda) * x.row(static_cast<Eigen::Index>(b));
}

// Soft Mixup-AN target over already-resolved labels.
SoftLabelVector soft_an_blend(const LabelVector& ya, const LabelVector& yb, double lambda) {
  const LabelVector fa = assume_negative(ya);
  const LabelVector fb = assume_negative(yb);
  std::vector<SoftLabelVector::Entry> soft(fa.size());
  for (std::size_t c = 0; c < fa.size(); ++c)
    soft[c] = lambda * (fa[c] == TernaryLabel::Positive) +
              (1.0 - lambda) * (fb[c] == TernaryLabel::Positive);
  return SoftLabelVector(std::move(soft));
}

SoftLabelVector soft_pme_blend(const LabelVector& ya, const LabelVector& yb, double lambda) {
  auto f_hat = [](TernaryLabel l) {
    return l == TernaryLabel::Unknown ? 0.5 : static_cast<double>(l == TernaryLabel::Positive);
  };
  std::vector<SoftLabelVector::Entry> soft(ya.size());
  for (std::size_t c = 0; c < ya.size(); ++c) {
    if (ya[c] == TernaryLabel::Unknown) soft[c] = std::nullopt;
    else soft[c] = lambda * f_hat(ya[c]) + (1.0 - lambda) * f_hat(yb[c]);
  }
  return SoftLabelVector(std::move(soft));
}

LabelVector hard_an_or(const LabelVector& ya, const LabelVector& yb) {
  const LabelVector fa = assume_negative(ya);
  const LabelVector fb = assume_negative(yb);
  std::vector<TernaryLabel> out(fa.size());
  for (std::size_t c = 0; c < fa.size(); ++c) out[c] = or2(fa[c], fb[c]);
  return LabelVector(std::move(out));
}

BuiltSample build_training_sample(const Eigen::MatrixXd& x,
                                  const std::vector<LabelVector>& labels, std::size_t i,
                                  int epoch, const TrainConfig& cfg) {
  const std::size_t n = labels.size();
  BuiltSample out;
  switch (cfg.variant.kind) {
    case VariantKind::NoAugment: {
      out.features = x.row(static_cast<Eigen::Index>(i));
      out.hard = labels[i];
      return out;
    }
    case VariantKind::LogicMix: {
      RngStream rng = sample_stream(cfg.logicmix->seed, static_cast<std::uint64_t>(epoch), i);
      const MixPlan plan = draw_plan(*cfg.logicmix, n, i, rng);
      if (!plan.augment) {
        out.features = x.row(static_cast<Eigen::Index>(i));
        out.hard = labels[i];
        return out;
      }
      Eigen::RowVectorXd acc = x.row(static_cast<Eigen::Index>(i));
      std::vector<LabelVector> parts{labels[i]};
      for (std::size_t j : plan.companions) {
        acc += x.row(static_cast<Eigen::Index>(j));
        parts.push_back(labels[j]);
      }
      out.features = acc / static_cast<double>(plan.k);
      out.hard = mix_label_vectors(parts);
      return out;
    }
    case VariantKind::MixupAN: {
      RngStream rng(cfg.variant.seed, streams::kAugment, static_cast<std::uint64_t>(epoch), i);
      const std::size_t j = rng.bounded(n);
      const double lambda = rng.beta(cfg.variant.alpha, cfg.variant.alpha);
      out.features = blend_rows(x, i, j, lambda);
      out.soft = soft_an_blend(labels[i], labels[j], lambda);
      out.is_soft = true;
      return out;
    }
    case VariantKind::WangAN: {
      if (!wang_enabled(epoch)) {
        out.features = x.row(static_cast<Eigen::Index>(i));
        out.hard = labels[i];
        return out;
      }
      RngStream rng(cfg.variant.seed, streams::kAugment, static_cast<std::uint64_t>(epoch), i);
      const std::size_t j = rng.bounded(n);
      out.features = blend_rows(x, i, j, 0.5);
      out.hard = hard_an_or(labels[i], labels[j]);
      return out;
    }
    case VariantKind::MLMixupAN: {
      RngStream rng(cfg.variant.seed, streams::kAugment, static_cast<std::uint64_t>(epoch), i);
      const std::size_t j = rng.bounded(n);
      const double lambda = rng.uniform_double();
      out.features = blend_rows(x, i, j, lambda);
      out.hard = hard_an_or(labels[i], labels[j]);
      return out;
    }
    case VariantKind::MixupPME: {
      RngStream rng(cfg.variant.seed, streams::kAugment, static_cast<std::uint64_t>(epoch), i);
      const std::size_t j = rng.bounded(n);
      const double lambda = cfg.variant.alpha + (1.0 - cfg.variant.alpha) * rng.uniform_double();
      out.features = blend_rows(x, i, j, lambda);
      out.soft = soft_pme_blend(labels[i], labels[j], lambda);
      out.is_soft = true;
      return out;
    }
  }
  throw ContractViolation("build_training_sample: unknown variant");
}

}  // namespace

LinearModel train_model(const Eigen::MatrixXd& features, const PartialDataset& dataset,
                        const TrainConfig& config) {
  validate(config);
  const std::size_t n = dataset.size();
  if (static_cast<std::size_t>(features.rows()) != n)
    throw DimensionError("train_model: feature rows != dataset size");
  const auto d = features.cols();
  const auto c = static_cast<Eigen::Index>(dataset.category_count());

  LinearModel model = LinearModel::zeros(d, c);
  std::optional<PseudoLabelSet> pseudo;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const EpochLabelView view =
        compose_epoch_view(dataset, pseudo ? &*pseudo : nullptr, epoch);
    std::vector<LabelVector> resolved(n);
    for (std::size_t i = 0; i < n; ++i) resolved[i] = view.labels(i);

    RngStream shuffle_rng(config.seed, streams::kShuffle, static_cast<std::uint64_t>(epoch));
    const std::vector<std::size_t> order = shuffled_indices(n, shuffle_rng);

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const auto b = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xb(b, d);
      TargetMatrix targets = TargetMatrix::zeros(b, c);
      for (std::size_t r = 0; r < static_cast<std::size_t>(b); ++r) {
        BuiltSample s = build_training_sample(features, resolved, order[start + r], epoch, config);
        xb.row(static_cast<Eigen::Index>(r)) = s.features;
        if (s.is_soft) targets.set_row(static_cast<Eigen::Index>(r), s.soft);
        else targets.set_row(static_cast<Eigen::Index>(r), s.hard);
      }
      const LossResult res = masked_asymmetric_loss(forward(model, xb), targets, config.loss);
      model.weights.noalias() -= config.learning_rate * (xb.transpose() * res.grad);
      model.biases -= config.learning_rate * res.grad.colwise().sum();
    }

    if (config.curriculum)
      pseudo = generate_pseudo_labels(forward(model, features), dataset, *config.curriculum, epoch);
  }
  return model;
}

Metrics evaluate(const LinearModel& model, const Eigen::MatrixXd& features,
                 const std::vector<std::vector<bool>>& truth) {
  return mean_ap(forward(model, features), truth);
}

// --- Comparison --------------------------------------------------------------------

namespace {

PartialDataset slice(const PartialDataset& ds, std::size_t begin, std::size_t end) {
  std::vector<DatasetSample> samples(ds.samples().begin() + static_cast<std::ptrdiff_t>(begin),
                                     ds.samples().begin() + static_cast<std::ptrdiff_t>(end));
  std::optional<std::vector<std::vector<bool>>> truth;
  if (ds.ground_truth())
    truth.emplace(ds.ground_truth()->begin() + static_cast<std::ptrdiff_t>(begin),
                  ds.ground_truth()->begin() + static_cast<std::ptrdiff_t>(end));
  return PartialDataset(ds.categories(), std::move(samples), std::move(truth));
}

}  // namespace

ComparisonResult run_comparison(const std::vector<TrainConfig>& configs,
                                const ComparisonDataConfig& data,
                                const std::vector<std::uint64_t>& seeds) {
  if (configs.empty() || seeds.empty())
    throw ContractViolation("run_comparison: need at least one config and one seed");
  if (!(data.known_proportion > 0.0 && data.known_proportion <= 1.0))
    throw ContractViolation("run_comparison: known_proportion must be in (0, 1]");

  ComparisonResult result;
  for (const std::uint64_t seed : seeds) {
    const SyntheticData synth = make_synthetic_dataset(data.n_train + data.n_test,
                                                       data.categories, data.feature_dim, seed);
    const Eigen::MatrixXd x_train =
        synth.features.topRows(static_cast<Eigen::Index>(data.n_train));
    const Eigen::MatrixXd x_test =
        synth.features.bottomRows(static_cast<Eigen::Index>(data.n_test));
    const PartialDataset train_full = slice(synth.dataset, 0, data.n_train);
    const PartialDataset test = slice(synth.dataset, data.n_train, data.n_train + data.n_test);
    const PartialDataset train =
        data.known_proportion < 1.0 ? drop_labels(train_full, data.known_proportion, seed)
                                    : train_full;

    for (const TrainConfig& base : configs) {
      TrainConfig cfg = base;
      cfg.seed = seed;
      cfg.variant.seed = seed;
      if (cfg.logicmix) cfg.logicmix->seed = seed;
      const LinearModel model = train_model(x_train, train, cfg);
      result.runs.push_back(
          ComparisonRun{cfg.variant.kind, seed, evaluate(model, x_test, *test.ground_truth())});
    }
  }

  for (const TrainConfig& base : configs) {
    std::vector<double> maps;
    for (const ComparisonRun& run : result.runs)
      if (run.variant == base.variant.kind) maps.push_back(run.metrics.mean_ap);
    VariantSummary s;
    s.variant = base.variant.kind;
    const double mean = std::accumulate(maps.begin(), maps.end(), 0.0) /
                        static_cast<double>(maps.size());
    s.mean_map = mean;
    if (maps.size() > 1) {
      double ss = 0.0;
      for (double v : maps) ss += (v - mean) * (v - mean);
      s.sd_map = std::sqrt(ss / static_cast<double>(maps.size() - 1));
    }
    result.summary.push_back(s);
  }
  return result;
}

std::string comparison_to_json(const ComparisonResult& result) {
  nlohmann::json j;
  j["runs"] = nlohmann::json::array();
  for (const ComparisonRun& run : result.runs) {
    nlohmann::json r;
    r["variant"] = to_string(run.variant);
    r["seed"] = run.seed;
    r["map"] = run.metrics.mean_ap;
    r["per_category_ap"] = run.metrics.per_category_ap;
    j["runs"].push_back(std::move(r));
  }
  j["summary"] = nlohmann::json::array();
  for (const VariantSummary& s : result.summary) {
    nlohmann::json r;
    r["variant"] = to_string(s.variant);
    r["mean_map"] = s.mean_map;
    r["sd_map"] = s.sd_map;
    j["summary"].push_back(std::move(r));
  }
  return j.dump(2);
}

std::string format_comparison_table(const ComparisonResult& result) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "variant" << std::right << std::setw(10) << "mean mAP"
      << std::setw(10) << "sd" << '\n';
  out << std::string(32, '-') << '\n';
  for (const VariantSummary& s : result.summary) {
    out << std::left << std::setw(12) << to_string(s.variant) << std::right << std::fixed
        << std::setprecision(4) << std::setw(10) << s.mean_map << std::setw(10) << s.sd_map
        << '\n';
  }
  return out.str();
}

}  // namespace logicmix
