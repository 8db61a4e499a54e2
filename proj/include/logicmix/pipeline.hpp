#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "logicmix/errors.hpp"
#include "logicmix/rng.hpp"
#include "logicmix/sample.hpp"

namespace logicmix {

// Stream-domain tags so that independent random uses of one experiment seed
// never share an engine sequence.
namespace streams {
constexpr std::uint64_t kAugment = 0xA1;
constexpr std::uint64_t kShuffle = 0x5F;
constexpr std::uint64_t kInit = 0x11;
constexpr std::uint64_t kCorpus = 0xC0;
constexpr std::uint64_t kData = 0xDA;
constexpr std::uint64_t kDrop = 0xD0;
}  // namespace streams

/// Augmentation pipeline configuration: a sample is augmented with
/// probability s by mixing it with K - 1 companions, K ~ U{k_min, k_max}.
struct LogicMixConfig {
  double s = 0.5;
  int k_min = 2;
  int k_max = 3;
  std::uint64_t seed = 0;
};

inline void validate(const LogicMixConfig& cfg) {
  if (!(cfg.s >= 0.0 && cfg.s <= 1.0))
    throw ContractViolation("LogicMixConfig: s must be in [0, 1]");
  if (cfg.k_min < 1 || cfg.k_max < cfg.k_min)
    throw ContractViolation("LogicMixConfig: need 1 <= k_min <= k_max");
}

/// The per-sample random decisions. When augment is false the k and
/// companion fields are empty; when true, companions holds k - 1 dataset
/// indices, never including the input's own index.
struct MixPlan {
  bool augment = false;
  int k = 0;
  std::vector<std::size_t> companions;
};

/// Per-sample stream for the augmentation pipeline, keyed by (seed, epoch,
/// sample index). Identical keys give identical plans on any worker layout.
inline RngStream sample_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t index) {
  return RngStream(seed, streams::kAugment, epoch, index);
}

/// Draws one augmentation plan. The draw budget is fixed regardless of the
/// outcome: 1 coin + 1 k-draw + (k_max - 1) companion draws are always
/// consumed, and unused results discarded, so downstream consumption of the
/// same stream never depends on which branch was taken.
inline MixPlan draw_plan(const LogicMixConfig& cfg, std::size_t dataset_size,
                         std::size_t input_index, RngStream& rng) {
  validate(cfg);
  if (dataset_size < 1) throw ContractViolation("draw_plan: empty dataset");
  if (input_index >= dataset_size) throw ContractViolation("draw_plan: input index out of range");
  if (cfg.s > 0.0 && cfg.k_max >= 2 && dataset_size < static_cast<std::size_t>(cfg.k_max))
    throw InsufficientDataset("draw_plan: dataset of " + std::to_string(dataset_size) +
                              " cannot supply k_max = " + std::to_string(cfg.k_max) +
                              " distinct samples");

  const bool augment = rng.uniform_double() < cfg.s;
  const int k = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.k_min),
                                                 static_cast<std::uint64_t>(cfg.k_max)));

  // Partial Fisher-Yates over the dataset indices excluding the input, via a
  // sparse swap map. A prefix of a uniform permutation is itself uniform, so
  // truncating the k_max - 1 drawn companions to k - 1 keeps uniformity.
  const std::size_t m = dataset_size - 1;  // virtual pool: indices != input_index
  std::vector<std::size_t> drawn;
  drawn.reserve(cfg.k_max > 0 ? static_cast<std::size_t>(cfg.k_max - 1) : 0);
  std::unordered_map<std::size_t, std::size_t> displaced;
  auto virtual_at = [&](std::size_t v) {
    auto it = displaced.find(v);
    return it == displaced.end() ? v : it->second;
  };
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(cfg.k_max); ++i) {
    if (i >= m) {
      // Pool exhausted (only reachable when augmentation cannot trigger);
      // burn the budgeted draw to keep the stream position fixed.
      rng.next_u64();
      continue;
    }
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(m - i));
    const std::size_t vi = virtual_at(i);
    const std::size_t vj = virtual_at(j);
    displaced[j] = vi;
    const std::size_t pool_index = vj;
    drawn.push_back(pool_index < input_index ? pool_index : pool_index + 1);
  }

  MixPlan plan;
  plan.augment = augment;
  if (augment) {
    plan.k = k;
    plan.companions.assign(drawn.begin(), drawn.begin() + (k - 1));
  }
  return plan;
}

using SampleFetch = std::function<Sample(std::size_t)>;
using SampleTransform = std::function<Sample(const Sample&)>;

/// Runs the pipeline on one sample. On the augment branch the input and each
/// companion pass through pre_transform (identity when not given) and are
/// mixed; on the other branch the input is returned unchanged. Random
/// consumption is identical on both branches (see draw_plan).
inline Sample apply(const Sample& input, std::size_t input_index, std::size_t dataset_size,
                    const SampleFetch& fetch, const LogicMixConfig& cfg, RngStream& rng,
                    const SampleTransform& pre_transform = nullptr) {
  const MixPlan plan = draw_plan(cfg, dataset_size, input_index, rng);
  if (!plan.augment) return input;

  std::vector<Sample> participants;
  participants.reserve(static_cast<std::size_t>(plan.k));
  participants.push_back(pre_transform ? pre_transform(input) : input);
  for (std::size_t idx : plan.companions) {
    Sample companion = fetch(idx);
    participants.push_back(pre_transform ? pre_transform(companion) : std::move(companion));
  }
  return mix_samples(participants);
}

}  // namespace logicmix
