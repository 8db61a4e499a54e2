// logicmix: partial-label sample mixing, dataset simulation, curriculum
// pseudo-labeling, a desk-scale variant comparison and a loader throughput
// bench behind one binary. Machine-readable output is JSON (--out); human
// tables go to stdout. Exit codes: 0 ok, 1 usage error, 2 runtime error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "logicmix/bench.hpp"
#include "logicmix/curriculum.hpp"
#include "logicmix/dataset.hpp"
#include "logicmix/pipeline.hpp"
#include "logicmix/trainer.hpp"
#include "logicmix/variants.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace logicmix;

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

json stats_to_json(const LabelStats& st) {
  return json{{"mean_positives_per_sample", st.mean_positives_per_sample},
              {"mean_negatives_per_sample", st.mean_negatives_per_sample},
              {"mean_unknowns_per_sample", st.mean_unknowns_per_sample},
              {"known_fraction", st.known_fraction}};
}

void print_stats(const LabelStats& st) {
  std::cout << std::fixed << std::setprecision(4)
            << "mean positives/sample: " << st.mean_positives_per_sample << '\n'
            << "mean negatives/sample: " << st.mean_negatives_per_sample << '\n'
            << "mean unknowns/sample:  " << st.mean_unknowns_per_sample << '\n'
            << "known fraction:        " << st.known_fraction << '\n';
}

// --- mix ---------------------------------------------------------------------

struct MixArgs {
  std::string labels, images, out;
  double s = 0.5;
  int kmin = 2, kmax = 3;
  std::uint64_t seed = 0, epoch = 0;
};

int cmd_mix(const MixArgs& a) {
  const PartialDataset ds = read_labels_jsonl(a.labels);
  fs::create_directories(a.out);

  const SampleFetch fetch = [&](std::size_t i) {
    const DatasetSample& row = ds.sample(i);
    if (row.image_ref.empty())
      throw ContractViolation("sample '" + row.id + "' has no image reference");
    return Sample{row.id, read_lmt1(fs::path(a.images) / row.image_ref), row.labels};
  };

  const LogicMixConfig cfg{a.s, a.kmin, a.kmax, a.seed};
  validate(cfg);

  std::vector<DatasetSample> out_rows;
  out_rows.reserve(ds.size());
  std::size_t augmented = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    RngStream rng = sample_stream(cfg.seed, a.epoch, i);
    const Sample mixed = apply(fetch(i), i, ds.size(), fetch, cfg, rng);
    if (mixed.id != ds.sample(i).id) ++augmented;
    const std::string name = std::to_string(i) + ".lmt";
    write_lmt1(mixed.image, fs::path(a.out) / name);
    out_rows.push_back(DatasetSample{mixed.id, name, mixed.labels});
  }
  write_labels_jsonl(PartialDataset(ds.categories(), std::move(out_rows)),
                     fs::path(a.out) / "labels.jsonl");
  std::cout << "wrote " << ds.size() << " samples (" << augmented << " augmented) to " << a.out
            << '\n';
  return 0;
}

// --- drop / stats ---------------------------------------------------------------

struct DropArgs {
  std::string labels, out;
  double proportion = 0.3;
  std::uint64_t seed = 0;
};

int cmd_drop(const DropArgs& a) {
  const PartialDataset ds = read_labels_jsonl(a.labels);
  const PartialDataset dropped = drop_labels(ds, a.proportion, a.seed);
  write_labels_jsonl(dropped, a.out);
  print_stats(compute_label_stats(dropped));
  std::cout << "wrote " << dropped.size() << " samples to " << a.out << '\n';
  return 0;
}

struct StatsArgs {
  std::string labels, out;
  bool augmented = false;
  double s = 1.0;
  int kmin = 2, kmax = 3;
  std::uint64_t draws = 100000, seed = 0;
};

int cmd_stats(const StatsArgs& a) {
  const PartialDataset ds = read_labels_jsonl(a.labels);
  LabelStats st;
  if (a.augmented) {
    const LogicMixConfig cfg{a.s, a.kmin, a.kmax, a.seed};
    st = estimate_augmented_stats(ds, cfg, a.draws, a.seed);
  } else {
    st = compute_label_stats(ds);
  }
  print_stats(st);
  if (!a.out.empty()) {
    json j = stats_to_json(st);
    j["augmented"] = a.augmented;
    j["samples"] = ds.size();
    j["categories"] = ds.category_count();
    write_json(j, a.out);
  }
  return 0;
}

// --- pseudo ---------------------------------------------------------------------

struct PseudoArgs {
  std::string logits, labels, out;
  double theta_plus = 2.0, theta_minus = -2.0;
  int epoch = 0;
};

LogitMatrix read_logits_csv(const std::string& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  LogitMatrix logits(rows, cols);
  std::string line;
  std::size_t r = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (r >= rows) throw ParseError("more logit rows than dataset samples", line_no);
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= cols) throw ParseError("more logit columns than categories", line_no);
      try {
        logits(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::stod(cell);
      } catch (const std::exception&) {
        throw ParseError("bad logit value '" + cell + "'", line_no);
      }
      ++c;
    }
    if (c != cols)
      throw ParseError("expected " + std::to_string(cols) + " logits, got " + std::to_string(c),
                       line_no);
    ++r;
  }
  if (r != rows)
    throw ParseError("expected " + std::to_string(rows) + " logit rows, got " + std::to_string(r));
  return logits;
}

int cmd_pseudo(const PseudoArgs& a) {
  const PartialDataset ds = read_labels_jsonl(a.labels);
  const LogitMatrix logits = read_logits_csv(a.logits, ds.size(), ds.category_count());
  const CurriculumConfig cfg{a.theta_plus, a.theta_minus};
  const PseudoLabelSet pseudo = generate_pseudo_labels(logits, ds, cfg, a.epoch);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) throw ParseError("cannot open for writing: " + a.out);
    out = &file;
  }
  json header{{"generated_epoch", pseudo.generated_epoch()},
              {"theta_plus", cfg.theta_plus},
              {"theta_minus", cfg.theta_minus},
              {"entries", pseudo.entries().size()}};
  *out << header.dump() << '\n';
  for (const PseudoLabel& e : pseudo.entries())
    *out << json{{"sample", e.sample}, {"category", e.category}, {"label", e.positive ? 1 : 0}}
                .dump()
         << '\n';
  if (!a.out.empty())
    std::cout << "wrote " << pseudo.entries().size() << " pseudo-labels to " << a.out << '\n';
  return 0;
}

// --- train / compare / sweep -------------------------------------------------------

struct DataArgs {
  std::size_t n_train = 2000, n_test = 1000, categories = 10, feature_dim = 32;
  double proportion = 0.5;
  std::uint64_t data_seed = 0;
};

struct TrainArgs {
  DataArgs data;
  int epochs = 10, batch = 32;
  double lr = 0.5;
  std::uint64_t seed = 0;
  std::string variant = "logicmix";
  double alpha = 0.2;
  double s = 0.5;
  int kmin = 2, kmax = 3;
  bool curriculum = false;
  double theta_plus = 2.0, theta_minus = -2.0;
  double gamma_plus = 4.0, gamma_minus = 0.0, margin = 0.05;
  std::string out;
};

TrainConfig to_train_config(const TrainArgs& a) {
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  const auto kind = variant_from_string(a.variant);
  if (!kind) throw CLI::ValidationError("--variant", "unknown variant '" + a.variant + "'");
  cfg.variant = VariantConfig{*kind, a.alpha, a.seed};
  if (*kind == VariantKind::MixupPME && a.alpha == 0.2) cfg.variant.alpha = 0.75;
  cfg.logicmix = LogicMixConfig{a.s, a.kmin, a.kmax, a.seed};
  if (a.curriculum) cfg.curriculum = CurriculumConfig{a.theta_plus, a.theta_minus};
  cfg.loss = LossConfig{a.gamma_plus, a.gamma_minus, a.margin};
  return cfg;
}

struct SplitData {
  Eigen::MatrixXd x_train, x_test;
  PartialDataset train;
  std::vector<std::vector<bool>> test_truth;
};

SplitData make_split(const DataArgs& a) {
  const SyntheticData synth =
      make_synthetic_dataset(a.n_train + a.n_test, a.categories, a.feature_dim, a.data_seed);
  SplitData out;
  out.x_train = synth.features.topRows(static_cast<Eigen::Index>(a.n_train));
  out.x_test = synth.features.bottomRows(static_cast<Eigen::Index>(a.n_test));
  std::vector<DatasetSample> train_samples(synth.dataset.samples().begin(),
                                           synth.dataset.samples().begin() +
                                               static_cast<std::ptrdiff_t>(a.n_train));
  std::vector<std::vector<bool>> train_truth(synth.dataset.ground_truth()->begin(),
                                             synth.dataset.ground_truth()->begin() +
                                                 static_cast<std::ptrdiff_t>(a.n_train));
  PartialDataset train_full(synth.dataset.categories(), std::move(train_samples),
                            std::move(train_truth));
  out.train = a.proportion < 1.0 ? drop_labels(train_full, a.proportion, a.data_seed)
                                 : std::move(train_full);
  out.test_truth.assign(synth.dataset.ground_truth()->begin() +
                            static_cast<std::ptrdiff_t>(a.n_train),
                        synth.dataset.ground_truth()->end());
  return out;
}

int cmd_train(const TrainArgs& a) {
  const TrainConfig cfg = to_train_config(a);
  const SplitData data = make_split(a.data);
  const LinearModel model = train_model(data.x_train, data.train, cfg);
  const Metrics m = evaluate(model, data.x_test, data.test_truth);

  std::cout << std::fixed << std::setprecision(4) << "variant " << to_string(cfg.variant.kind)
            << "  mAP " << m.mean_ap << '\n';
  if (!a.out.empty()) {
    json j{{"variant", to_string(cfg.variant.kind)},
           {"seed", cfg.seed},
           {"map", m.mean_ap},
           {"per_category_ap", m.per_category_ap}};
    write_json(j, a.out);
  }
  return 0;
}

std::vector<TrainConfig> variant_configs(const TrainArgs& base,
                                         const std::vector<std::string>& names) {
  std::vector<TrainConfig> configs;
  for (const std::string& name : names) {
    TrainArgs a = base;
    a.variant = name;
    a.alpha = name == "pme" ? 0.75 : 0.2;
    configs.push_back(to_train_config(a));
  }
  return configs;
}

int cmd_compare(const TrainArgs& base, std::vector<std::string> variants,
                std::vector<std::uint64_t> seeds, const std::string& out_path) {
  if (variants.empty())
    variants = {"none", "logicmix", "mixup-an", "wang", "ml-mixup", "pme"};
  if (seeds.empty()) seeds = {1, 2, 3, 4, 5};

  ComparisonDataConfig data;
  data.n_train = base.data.n_train;
  data.n_test = base.data.n_test;
  data.categories = base.data.categories;
  data.feature_dim = base.data.feature_dim;
  data.known_proportion = base.data.proportion;

  const ComparisonResult res = run_comparison(variant_configs(base, variants), data, seeds);
  std::cout << format_comparison_table(res);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw ParseError("cannot open for writing: " + out_path);
    out << comparison_to_json(res) << '\n';
  }
  return 0;
}

int cmd_sweep(const TrainArgs& base, std::vector<int> kmins, std::vector<int> kmaxs,
              std::vector<double> s_list, std::vector<std::uint64_t> seeds,
              const std::string& out_path) {
  if (seeds.empty()) seeds = {1, 2, 3};
  ComparisonDataConfig data;
  data.n_train = base.data.n_train;
  data.n_test = base.data.n_test;
  data.categories = base.data.categories;
  data.feature_dim = base.data.feature_dim;
  data.known_proportion = base.data.proportion;

  json rows = json::array();
  std::cout << std::left << std::setw(7) << "k_min" << std::setw(7) << "k_max" << std::setw(7)
            << "s" << std::right << std::setw(10) << "mean mAP" << std::setw(10) << "sd" << '\n';
  std::cout << std::string(41, '-') << '\n';
  for (int kmin : kmins) {
    for (int kmax : kmaxs) {
      if (kmax < kmin) continue;
      for (double s : s_list) {
        TrainArgs a = base;
        a.variant = "logicmix";
        a.s = s;
        a.kmin = kmin;
        a.kmax = kmax;
        const ComparisonResult res = run_comparison({to_train_config(a)}, data, seeds);
        const VariantSummary& sum = res.summary.front();
        std::cout << std::left << std::setw(7) << kmin << std::setw(7) << kmax << std::setw(7)
                  << std::setprecision(2) << s << std::right << std::fixed
                  << std::setprecision(4) << std::setw(10) << sum.mean_map << std::setw(10)
                  << sum.sd_map << '\n';
        rows.push_back(json{{"k_min", kmin},
                            {"k_max", kmax},
                            {"s", s},
                            {"mean_map", sum.mean_map},
                            {"sd_map", sum.sd_map}});
      }
    }
  }
  if (!out_path.empty()) write_json(json{{"rows", rows}}, out_path);
  return 0;
}

// --- bench -----------------------------------------------------------------------

struct BenchArgs {
  std::vector<int> workers{1, 2, 4, 8};
  std::vector<int> ks{2, 4, 8};
  double s = 1.0;
  int reps = 3;
  std::size_t samples = 512;
  int batch = 32;
  double gpu_ms = 25.0;
  double fetch_us = 250.0;
  std::vector<std::size_t> shape{32, 32, 3};
  std::uint64_t seed = 0;
  std::string corpus, out;
};

int cmd_bench(const BenchArgs& a) {
  if (a.shape.size() != 3)
    throw CLI::ValidationError("--shape", "expected three values: height, width, channels");

  auto config_for = [&](int workers, int k) {
    bench::BenchConfig cfg;
    cfg.workers = workers;
    cfg.k_fixed = k;
    cfg.s = a.s;
    cfg.samples_per_epoch = a.samples;
    cfg.image_height = a.shape[0];
    cfg.image_width = a.shape[1];
    cfg.image_channels = a.shape[2];
    cfg.repetitions = a.reps;
    cfg.seed = a.seed;
    cfg.batch_size = a.batch;
    cfg.batch_compute_ms = a.gpu_ms;
    cfg.fetch_latency_us = a.fetch_us;
    cfg.corpus_dir = a.corpus;
    return cfg;
  };

  json rows = json::array();
  std::map<int, std::uint64_t> digest_per_k;
  bool streams_identical = true;

  std::cout << std::left << std::setw(9) << "workers" << std::setw(22) << "no augment";
  for (int k : a.ks) std::cout << std::setw(22) << ("LogicMix(K=" + std::to_string(k) + ")");
  std::cout << '\n' << std::string(9 + 22 * (1 + a.ks.size()), '-') << '\n';

  for (int workers : a.workers) {
    const bench::ThroughputReport base = run_throughput_bench(config_for(workers, 1), true);
    json row{{"workers", workers},
             {"no_augment",
              {{"mean_s", base.mean_epoch_seconds},
               {"sd_s", base.sd_epoch_seconds},
               {"samples_per_s", base.samples_per_second}}}};
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(3) << base.mean_epoch_seconds << " ±"
         << base.sd_epoch_seconds;
    std::cout << std::left << std::setw(9) << workers << std::setw(22) << cell.str();

    json configs = json::array();
    for (int k : a.ks) {
      const bench::ThroughputReport rep = run_throughput_bench(config_for(workers, k), false);
      const double ovh = bench::overhead_percent(rep, base);
      auto [it, first_time] = digest_per_k.try_emplace(k, rep.stream_digest);
      if (!first_time && it->second != rep.stream_digest) streams_identical = false;
      configs.push_back(json{{"k", k},
                             {"mean_s", rep.mean_epoch_seconds},
                             {"sd_s", rep.sd_epoch_seconds},
                             {"samples_per_s", rep.samples_per_second},
                             {"overhead_pct", ovh},
                             {"stream_digest", hex64(rep.stream_digest)}});
      std::ostringstream c2;
      c2 << std::fixed << std::setprecision(3) << rep.mean_epoch_seconds << " ±"
         << rep.sd_epoch_seconds << " (" << std::showpos << std::setprecision(1) << ovh
         << std::noshowpos << "%)";
      std::cout << std::setw(22) << c2.str();
    }
    std::cout << '\n';
    row["configs"] = std::move(configs);
    rows.push_back(std::move(row));
  }

  std::cout << "sample streams identical across worker counts: "
            << (streams_identical ? "yes" : "NO") << '\n';
  if (!a.out.empty()) {
    write_json(json{{"s", a.s},
                    {"samples_per_epoch", a.samples},
                    {"batch_compute_ms", a.gpu_ms},
                    {"fetch_latency_us", a.fetch_us},
                    {"repetitions", a.reps},
                    {"rows", rows},
                    {"streams_identical_across_workers", streams_identical}},
               a.out);
  }
  return streams_identical ? 0 : 2;
}

void add_data_flags(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--n-train", d.n_train, "training samples (synthetic)");
  cmd->add_option("--n-test", d.n_test, "held-out samples (synthetic)");
  cmd->add_option("--categories", d.categories, "category count");
  cmd->add_option("--feature-dim", d.feature_dim, "feature dimension");
  cmd->add_option("--proportion", d.proportion, "known label proportion kept (0,1]");
  cmd->add_option("--data-seed", d.data_seed, "dataset generation seed");
}

void add_train_flags(CLI::App* cmd, TrainArgs& t, bool with_variant) {
  add_data_flags(cmd, t.data);
  cmd->add_option("--epochs", t.epochs, "training epochs");
  cmd->add_option("--batch", t.batch, "minibatch size");
  cmd->add_option("--lr", t.lr, "learning rate");
  cmd->add_option("--seed", t.seed, "training/augmentation seed");
  if (with_variant)
    cmd->add_option("--variant", t.variant,
                    "augmentation: none|logicmix|mixup-an|wang|ml-mixup|pme");
  cmd->add_option("--alpha", t.alpha, "Beta/uniform parameter for mixup-an/pme");
  cmd->add_option("--s", t.s, "LogicMix augmentation probability");
  cmd->add_option("--kmin", t.kmin, "LogicMix K lower bound");
  cmd->add_option("--kmax", t.kmax, "LogicMix K upper bound");
  cmd->add_flag("--curriculum", t.curriculum, "enable curriculum pseudo-labeling");
  cmd->add_option("--theta-plus", t.theta_plus, "positive pseudo-label threshold");
  cmd->add_option("--theta-minus", t.theta_minus, "negative pseudo-label threshold");
  cmd->add_option("--gamma-plus", t.gamma_plus, "positive focusing exponent");
  cmd->add_option("--gamma-minus", t.gamma_minus, "negative focusing exponent");
  cmd->add_option("--margin", t.margin, "negative probability margin");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LogicMix: mixing partially labeled multi-label samples"};
  app.require_subcommand(1);

  MixArgs mix_args;
  CLI::App* mix = app.add_subcommand("mix", "augment a dataset of LMT1 images + JSONL labels");
  mix->add_option("--labels", mix_args.labels, "input labels JSONL")->required();
  mix->add_option("--images", mix_args.images, "directory with LMT1 tensors")->required();
  mix->add_option("--out", mix_args.out, "output directory")->required();
  mix->add_option("--s", mix_args.s, "augmentation probability");
  mix->add_option("--kmin", mix_args.kmin, "K lower bound");
  mix->add_option("--kmax", mix_args.kmax, "K upper bound");
  mix->add_option("--seed", mix_args.seed, "stream seed");
  mix->add_option("--epoch", mix_args.epoch, "epoch id keyed into the streams");

  DropArgs drop_args;
  CLI::App* drop = app.add_subcommand("drop", "simulate a known-label proportion");
  drop->add_option("--labels", drop_args.labels, "input labels JSONL")->required();
  drop->add_option("--out", drop_args.out, "output labels JSONL")->required();
  drop->add_option("--proportion", drop_args.proportion, "probability a known label is kept")
      ->required();
  drop->add_option("--seed", drop_args.seed, "mask seed");

  StatsArgs stats_args;
  CLI::App* stats = app.add_subcommand("stats", "label count statistics");
  stats->add_option("--labels", stats_args.labels, "labels JSONL")->required();
  stats->add_flag("--augmented", stats_args.augmented,
                  "Monte Carlo statistics of pipeline output at s=1");
  stats->add_option("--s", stats_args.s, "must stay 1 for augmented stats");
  stats->add_option("--kmin", stats_args.kmin, "K lower bound");
  stats->add_option("--kmax", stats_args.kmax, "K upper bound");
  stats->add_option("--draws", stats_args.draws, "Monte Carlo draws");
  stats->add_option("--seed", stats_args.seed, "draw seed");
  stats->add_option("--out", stats_args.out, "write stats JSON here");

  PseudoArgs pseudo_args;
  CLI::App* pseudo = app.add_subcommand("pseudo", "threshold logits into pseudo-labels");
  pseudo->add_option("--logits", pseudo_args.logits, "CSV of N x C pre-sigmoid logits")
      ->required();
  pseudo->add_option("--labels", pseudo_args.labels, "labels JSONL")->required();
  pseudo->add_option("--theta-plus", pseudo_args.theta_plus, "positive threshold")->required();
  pseudo->add_option("--theta-minus", pseudo_args.theta_minus, "negative threshold")->required();
  pseudo->add_option("--epoch", pseudo_args.epoch, "generation epoch stamp");
  pseudo->add_option("--out", pseudo_args.out, "write JSONL here instead of stdout");

  // Run files: key=value lines under a [subcommand] section, e.g.
  //   [train]
  //   epochs=10
  // Passed as `logicmix train --config run.conf`; command-line flags win.
  app.set_config("--config", "", "declarative run file with a [subcommand] section");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train one desk-scale linear classifier");
  add_train_flags(train, train_args, true);
  train->add_option("--out", train_args.out, "write metrics JSON here");

  TrainArgs compare_args;
  std::vector<std::string> compare_variants;
  std::vector<std::uint64_t> compare_seeds;
  std::string compare_out;
  CLI::App* compare = app.add_subcommand("compare", "per-variant mAP comparison");
  add_train_flags(compare, compare_args, false);
  compare->add_option("--variant", compare_variants, "variants to include (repeat or comma list)")
      ->delimiter(',');
  compare->add_option("--seeds", compare_seeds, "comma-separated seed list")->delimiter(',');
  compare->add_option("--out", compare_out, "write results JSON here");

  TrainArgs sweep_args;
  std::vector<int> sweep_kmins{2}, sweep_kmaxs{2, 3, 4};
  std::vector<double> sweep_s{0.2, 0.4, 0.5, 0.6, 0.8};
  std::vector<std::uint64_t> sweep_seeds;
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "LogicMix hyperparameter grid");
  add_train_flags(sweep, sweep_args, false);
  sweep->add_option("--kmin-list", sweep_kmins, "K_min grid")->delimiter(',');
  sweep->add_option("--kmax-list", sweep_kmaxs, "K_max grid")->delimiter(',');
  sweep->add_option("--s-list", sweep_s, "s grid")->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seed list")->delimiter(',');
  sweep->add_option("--out", sweep_out, "write sweep JSON here");

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("bench", "worker-pool throughput benchmark");
  bench_cmd->add_option("--workers", bench_args.workers, "worker counts")->delimiter(',');
  bench_cmd->add_option("--k", bench_args.ks, "fixed K values")->delimiter(',');
  bench_cmd->add_option("--s", bench_args.s, "augmentation probability");
  bench_cmd->add_option("--reps", bench_args.reps, "timed epochs per configuration");
  bench_cmd->add_option("--samples", bench_args.samples, "samples per epoch");
  bench_cmd->add_option("--batch", bench_args.batch, "consumer batch size");
  bench_cmd->add_option("--gpu-ms", bench_args.gpu_ms, "simulated compute per batch, ms");
  bench_cmd->add_option("--fetch-us", bench_args.fetch_us, "simulated decode/IO per fetch, us");
  bench_cmd->add_option("--shape", bench_args.shape, "image shape h,w,ch")->delimiter(',');
  bench_cmd->add_option("--seed", bench_args.seed, "corpus/pipeline seed");
  bench_cmd->add_option("--corpus", bench_args.corpus, "LMT1 directory (disk mode)");
  bench_cmd->add_option("--out", bench_args.out, "write report JSON here");

  // Accept --config after the subcommand name by hoisting it to the root.
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  std::vector<std::string> hoisted;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      hoisted = {args[i], args[i + 1]};
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      hoisted = {args[i]};
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  args.insert(args.begin(), hoisted.begin(), hoisted.end());
  std::reverse(args.begin(), args.end());  // CLI11's vector parse expects reversed args

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (*mix) return cmd_mix(mix_args);
    if (*drop) return cmd_drop(drop_args);
    if (*stats) return cmd_stats(stats_args);
    if (*pseudo) return cmd_pseudo(pseudo_args);
    if (*train) return cmd_train(train_args);
    if (*compare) return cmd_compare(compare_args, compare_variants, compare_seeds, compare_out);
    if (*sweep)
      return cmd_sweep(sweep_args, sweep_kmins, sweep_kmaxs, sweep_s, sweep_seeds, sweep_out);
    if (*bench_cmd) return cmd_bench(bench_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
