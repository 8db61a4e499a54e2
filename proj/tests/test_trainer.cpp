#include <doctest.h>

#include <cmath>
#include <vector>

#include "logicmix/trainer.hpp"

using namespace logicmix;

namespace {

constexpr TernaryLabel P = TernaryLabel::Positive;
constexpr TernaryLabel N = TernaryLabel::Negative;
constexpr TernaryLabel U = TernaryLabel::Unknown;

// Independent of average_precision: counts the before-or-equal relation
// explicitly rather than sorting. Same documented tie policy (stable index).
double ap_quadratic(const Eigen::VectorXd& scores, const std::vector<bool>& labels) {
  const std::size_t n = labels.size();
  auto before_or_equal = [&](std::size_t j, std::size_t i) {
    const double sj = scores[static_cast<Eigen::Index>(j)];
    const double si = scores[static_cast<Eigen::Index>(i)];
    return sj > si || (sj == si && j <= i);
  };
  double sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels[i]) continue;
    ++positives;
    std::size_t rank = 0, hits = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!before_or_equal(j, i)) continue;
      ++rank;
      if (labels[j]) ++hits;
    }
    sum += static_cast<double>(hits) / static_cast<double>(rank);
  }
  return sum / static_cast<double>(positives);
}

// Masked binary cross-entropy, written from the definition.
double bce_reference(const LogitMatrix& logits, const TargetMatrix& t) {
  double total = 0.0, count = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r)
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      if (t.mask(r, c) == 0.0) continue;
      const double p = 1.0 / (1.0 + std::exp(-logits(r, c)));
      total += -t.values(r, c) * std::log(p) - (1.0 - t.values(r, c)) * std::log(1.0 - p);
      count += 1.0;
    }
  return count == 0.0 ? 0.0 : total / count;
}

TargetMatrix random_targets(Eigen::Index rows, Eigen::Index cols, RngStream& rng,
                            bool soft) {
  TargetMatrix t = TargetMatrix::zeros(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (rng.bernoulli(0.25)) continue;  // leave Unknown
      t.mask(r, c) = 1.0;
      t.values(r, c) = soft ? rng.uniform_double() : static_cast<double>(rng.bernoulli(0.5));
    }
  return t;
}

}  // namespace

TEST_CASE("forward computes x*W + b and validates shapes") {
  LinearModel zero = LinearModel::zeros(3, 2);
  Eigen::MatrixXd x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  CHECK(forward(zero, x).isZero());

  LinearModel m{Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::RowVectorXd::Constant(1, 1.0)};
  Eigen::MatrixXd one(1, 1);
  one << 3.0;
  CHECK(forward(m, one)(0, 0) == doctest::Approx(7.0));

  CHECK_THROWS_AS(forward(zero, Eigen::MatrixXd::Zero(2, 4)), DimensionError);
}

TEST_CASE("loss is zero when every target is Unknown") {
  LogitMatrix logits = Eigen::MatrixXd::Random(3, 4);
  const TargetMatrix t = TargetMatrix::zeros(3, 4);
  const LossResult res = masked_asymmetric_loss(logits, t, LossConfig{});
  CHECK(res.loss == 0.0);
  CHECK(res.grad.isZero());
}

TEST_CASE("gamma=0, margin=0 reduces exactly to masked BCE") {
  RngStream rng(71);
  const LossConfig plain{0.0, 0.0, 0.0};
  for (int trial = 0; trial < 50; ++trial) {
    LogitMatrix logits(4, 5);
    for (Eigen::Index r = 0; r < 4; ++r)
      for (Eigen::Index c = 0; c < 5; ++c) logits(r, c) = 6.0 * (rng.uniform_double() - 0.5);
    const TargetMatrix t = random_targets(4, 5, rng, trial % 2 == 0);
    const LossResult res = masked_asymmetric_loss(logits, t, plain);
    CHECK(std::abs(res.loss - bce_reference(logits, t)) < 1e-10);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  RngStream rng(72);
  const double h = 1e-5;
  const LossConfig configs[] = {
      {4.0, 0.0, 0.05},  // paper defaults
      {0.0, 0.0, 0.0},
      {2.0, 1.0, 0.0},
      {1.0, 2.0, 0.2},
  };
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const LossConfig& cfg = configs[trial % 4];
    LogitMatrix logits(3, 4);
    for (Eigen::Index r = 0; r < 3; ++r)
      for (Eigen::Index c = 0; c < 4; ++c) logits(r, c) = 8.0 * (rng.uniform_double() - 0.5);
    const TargetMatrix t = random_targets(3, 4, rng, trial % 3 == 0);

    const LossResult res = masked_asymmetric_loss(logits, t, cfg);
    for (Eigen::Index r = 0; r < 3; ++r)
      for (Eigen::Index c = 0; c < 4; ++c) {
        LogitMatrix up = logits, dn = logits;
        up(r, c) += h;
        dn(r, c) -= h;
        const double fd = (masked_asymmetric_loss(up, t, cfg).loss -
                           masked_asymmetric_loss(dn, t, cfg).loss) /
                          (2.0 * h);
        const double a = res.grad(r, c);
        const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
        CHECK(rel < 1e-4);
        ++checked;
      }
  }
  CHECK(checked == 100 * 12);
}

TEST_CASE("perturbing masked logits changes neither loss nor gradient") {
  RngStream rng(73);
  LogitMatrix logits(4, 4);
  for (Eigen::Index r = 0; r < 4; ++r)
    for (Eigen::Index c = 0; c < 4; ++c) logits(r, c) = rng.normal();
  TargetMatrix t = random_targets(4, 4, rng, false);
  t.mask(1, 2) = 0.0;
  t.mask(3, 0) = 0.0;

  const LossResult before = masked_asymmetric_loss(logits, t, LossConfig{});
  LogitMatrix poked = logits;
  poked(1, 2) += 100.0;
  poked(3, 0) -= 50.0;
  const LossResult after = masked_asymmetric_loss(poked, t, LossConfig{});
  CHECK(after.loss == before.loss);
  CHECK((after.grad - before.grad).cwiseAbs().maxCoeff() == 0.0);
  CHECK(before.grad(1, 2) == 0.0);
}

TEST_CASE("loss is nonnegative and vanishes on confident correct predictions") {
  RngStream rng(74);
  for (int trial = 0; trial < 200; ++trial) {
    LogitMatrix logits(2, 3);
    for (Eigen::Index r = 0; r < 2; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) logits(r, c) = 10.0 * (rng.uniform_double() - 0.5);
    const TargetMatrix t = random_targets(2, 3, rng, false);
    CHECK(masked_asymmetric_loss(logits, t, LossConfig{}).loss >= 0.0);
  }

  TargetMatrix hard = TargetMatrix::zeros(1, 2);
  hard.mask.setOnes();
  hard.values(0, 0) = 1.0;
  hard.values(0, 1) = 0.0;
  LogitMatrix confident(1, 2);
  confident << 40.0, -40.0;
  CHECK(masked_asymmetric_loss(confident, hard, LossConfig{}).loss ==
        doctest::Approx(0.0).epsilon(1e-12));

  LogitMatrix nan_logits = confident;
  nan_logits(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(masked_asymmetric_loss(nan_logits, hard, LossConfig{}), ContractViolation);
}

TEST_CASE("average_precision on the two-item examples") {
  Eigen::VectorXd scores(2);
  scores << 0.9, 0.1;
  CHECK(average_precision(scores, {true, false}) == doctest::Approx(1.0));
  CHECK(average_precision(scores, {false, true}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(average_precision(scores, {false, false}), ContractViolation);
  CHECK_THROWS_AS(average_precision(scores, {true}), DimensionError);
}

TEST_CASE("average_precision equals the quadratic oracle, ties included") {
  RngStream rng(75);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.bounded(50);
    Eigen::VectorXd scores(static_cast<Eigen::Index>(n));
    std::vector<bool> labels(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid of score values forces plenty of exact ties.
      scores[static_cast<Eigen::Index>(i)] =
          trial % 5 == 0 ? 0.5 : static_cast<double>(rng.bounded(8)) / 8.0;
      labels[i] = rng.bernoulli(0.4);
      any = any || labels[i];
    }
    if (!any) labels[rng.bounded(n)] = true;
    CHECK(std::abs(average_precision(scores, labels) - ap_quadratic(scores, labels)) < 1e-12);
  }
}

TEST_CASE("mAP is invariant under strictly monotone score transforms") {
  RngStream rng(76);
  Eigen::MatrixXd scores(40, 3);
  std::vector<std::vector<bool>> labels(40, std::vector<bool>(3));
  for (Eigen::Index i = 0; i < 40; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      scores(i, j) = 4.0 * (rng.uniform_double() - 0.5);
      labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rng.bernoulli(0.3);
    }
  for (std::size_t j = 0; j < 3; ++j) labels[j][j] = true;  // every category has a positive

  const Metrics base = mean_ap(scores, labels);
  CHECK(base.mean_ap >= 0.0);
  CHECK(base.mean_ap <= 1.0);
  const Metrics warped = mean_ap((scores.array() * 3.0 + 1.0).tanh().matrix(), labels);
  CHECK(warped.mean_ap == doctest::Approx(base.mean_ap).epsilon(1e-12));
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(warped.per_category_ap[j] == doctest::Approx(base.per_category_ap[j]).epsilon(1e-12));
}

TEST_CASE("categories without positives are excluded from the mean") {
  Eigen::MatrixXd scores(3, 2);
  scores << 0.9, 0.5, 0.1, 0.5, 0.5, 0.5;
  std::vector<std::vector<bool>> labels{{true, false}, {false, false}, {false, false}};
  const Metrics m = mean_ap(scores, labels);
  CHECK(m.per_category_ap[0] == doctest::Approx(1.0));
  CHECK(m.per_category_ap[1] == 0.0);
  CHECK(m.mean_ap == doctest::Approx(1.0));

  std::vector<std::vector<bool>> empty{{false, false}, {false, false}, {false, false}};
  CHECK_THROWS_AS(mean_ap(scores, empty), ContractViolation);
}

TEST_CASE("synthetic dataset: deterministic, fully labeled, >= 1 positive") {
  const SyntheticData a = make_synthetic_dataset(200, 10, 16, 99);
  const SyntheticData b = make_synthetic_dataset(200, 10, 16, 99);
  CHECK(a.features == b.features);
  CHECK(a.dataset.samples() == b.dataset.samples());
  CHECK(a.dataset.fully_labeled());
  REQUIRE(a.dataset.ground_truth().has_value());
  for (const DatasetSample& s : a.dataset.samples()) {
    bool any = false;
    for (TernaryLabel l : s.labels) any = any || (l == P);
    CHECK(any);
  }
  const SyntheticData c = make_synthetic_dataset(200, 10, 16, 100);
  CHECK(a.features != c.features);
}

TEST_CASE("fully labeled training reaches high mAP on held-out data") {
  const SyntheticData synth = make_synthetic_dataset(2500, 10, 32, 7);
  const Eigen::MatrixXd x_train = synth.features.topRows(2000);
  const Eigen::MatrixXd x_test = synth.features.bottomRows(500);

  std::vector<DatasetSample> train_samples(synth.dataset.samples().begin(),
                                           synth.dataset.samples().begin() + 2000);
  std::vector<std::vector<bool>> train_truth(synth.dataset.ground_truth()->begin(),
                                             synth.dataset.ground_truth()->begin() + 2000);
  const PartialDataset train(synth.dataset.categories(), std::move(train_samples),
                             std::move(train_truth));
  const std::vector<std::vector<bool>> test_truth(synth.dataset.ground_truth()->begin() + 2000,
                                                  synth.dataset.ground_truth()->end());

  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.learning_rate = 2.0;
  cfg.seed = 11;
  const LinearModel model = train_model(x_train, train, cfg);
  const Metrics m = evaluate(model, x_test, test_truth);
  CHECK(m.mean_ap > 0.9);
  // Regression constant from the first run of this deterministic training.
  CHECK(m.mean_ap == doctest::Approx(0.9985077241).epsilon(1e-9));
}

TEST_CASE("LogicMix at s=0 trains to metrics identical to NoAugment") {
  const SyntheticData synth = make_synthetic_dataset(400, 6, 12, 13);
  const Eigen::MatrixXd x_train = synth.features.topRows(300);
  const Eigen::MatrixXd x_test = synth.features.bottomRows(100);
  std::vector<DatasetSample> train_samples(synth.dataset.samples().begin(),
                                           synth.dataset.samples().begin() + 300);
  std::vector<std::vector<bool>> train_truth(synth.dataset.ground_truth()->begin(),
                                             synth.dataset.ground_truth()->begin() + 300);
  const PartialDataset train_full(synth.dataset.categories(), std::move(train_samples),
                                  std::move(train_truth));
  const PartialDataset train = drop_labels(train_full, 0.5, 13);
  const std::vector<std::vector<bool>> test_truth(synth.dataset.ground_truth()->begin() + 300,
                                                  synth.dataset.ground_truth()->end());

  TrainConfig none;
  none.epochs = 6;
  none.seed = 5;
  none.variant.kind = VariantKind::NoAugment;

  TrainConfig lm = none;
  lm.variant.kind = VariantKind::LogicMix;
  lm.logicmix = LogicMixConfig{0.0, 2, 3, 5};

  const Metrics m_none = evaluate(train_model(x_train, train, none), x_test, test_truth);
  const Metrics m_lm = evaluate(train_model(x_train, train, lm), x_test, test_truth);
  CHECK(m_lm.mean_ap == m_none.mean_ap);
  for (std::size_t j = 0; j < m_none.per_category_ap.size(); ++j)
    CHECK(m_lm.per_category_ap[j] == m_none.per_category_ap[j]);

  // Re-running an identical config reproduces the metrics bit for bit.
  const Metrics again = evaluate(train_model(x_train, train, none), x_test, test_truth);
  CHECK(again.mean_ap == m_none.mean_ap);
}

TEST_CASE("every variant trains without degenerate output") {
  const SyntheticData synth = make_synthetic_dataset(300, 5, 10, 17);
  const Eigen::MatrixXd x_train = synth.features.topRows(200);
  const Eigen::MatrixXd x_test = synth.features.bottomRows(100);
  std::vector<DatasetSample> train_samples(synth.dataset.samples().begin(),
                                           synth.dataset.samples().begin() + 200);
  std::vector<std::vector<bool>> train_truth(synth.dataset.ground_truth()->begin(),
                                             synth.dataset.ground_truth()->begin() + 200);
  const PartialDataset train =
      drop_labels(PartialDataset(synth.dataset.categories(), std::move(train_samples),
                                 std::move(train_truth)),
                  0.5, 17);
  const std::vector<std::vector<bool>> test_truth(synth.dataset.ground_truth()->begin() + 200,
                                                  synth.dataset.ground_truth()->end());

  for (VariantKind kind : {VariantKind::NoAugment, VariantKind::LogicMix, VariantKind::MixupAN,
                           VariantKind::WangAN, VariantKind::MLMixupAN, VariantKind::MixupPME}) {
    TrainConfig cfg;
    cfg.epochs = 6;
    cfg.seed = 3;
    cfg.variant.kind = kind;
    cfg.variant.alpha = kind == VariantKind::MixupPME ? 0.75 : 0.2;
    if (kind == VariantKind::LogicMix) cfg.logicmix = LogicMixConfig{0.5, 2, 3, 3};
    const Metrics m = evaluate(train_model(x_train, train, cfg), x_test, test_truth);
    CHECK(m.mean_ap > 0.3);
    CHECK(m.mean_ap <= 1.0);
  }
}

TEST_CASE("curriculum pseudo-labeling runs inside training") {
  const SyntheticData synth = make_synthetic_dataset(200, 5, 10, 23);
  const PartialDataset train = drop_labels(synth.dataset, 0.3, 23);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 2;
  cfg.curriculum = CurriculumConfig{2.0, -2.0};
  const LinearModel model = train_model(synth.features, train, cfg);
  CHECK(model.weights.allFinite());
}

TEST_CASE("run_comparison: structure, JSON schema keys, table") {
  TrainConfig none;
  none.epochs = 4;
  none.variant.kind = VariantKind::NoAugment;
  TrainConfig lm = none;
  lm.variant.kind = VariantKind::LogicMix;
  lm.logicmix = LogicMixConfig{0.5, 2, 3, 0};

  ComparisonDataConfig data;
  data.n_train = 200;
  data.n_test = 100;
  data.categories = 5;
  data.feature_dim = 10;

  const ComparisonResult res = run_comparison({none, lm}, data, {1, 2});
  REQUIRE(res.runs.size() == 4);
  REQUIRE(res.summary.size() == 2);
  for (const ComparisonRun& run : res.runs) {
    CHECK(run.metrics.mean_ap >= 0.0);
    CHECK(run.metrics.mean_ap <= 1.0);
    CHECK(run.metrics.per_category_ap.size() == 5);
  }

  const std::string json = comparison_to_json(res);
  for (const char* key : {"\"runs\"", "\"summary\"", "\"variant\"", "\"seed\"", "\"map\"",
                          "\"per_category_ap\"", "\"mean_map\"", "\"sd_map\""})
    CHECK(json.find(key) != std::string::npos);

  const std::string table = format_comparison_table(res);
  CHECK(table.find("logicmix") != std::string::npos);
  CHECK(table.find("none") != std::string::npos);
}
