#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "logicmix/errors.hpp"

namespace logicmix::bench {

/// Worker-pool throughput experiment. Producers preprocess samples (identity
/// or the mixing pipeline) into a bounded queue; one consumer drains it in
/// batches, spending `batch_compute_ms` of simulated accelerator time per
/// batch (busy-wait). Per-image fetch cost is a calibrated sleep standing in
/// for decode/disk latency, so relief from extra workers shows up even on a
/// small CPU. A directory of LMT1 files can replace the synthetic corpus to
/// include real file IO.
struct BenchConfig {
  int workers = 4;
  int k_fixed = 4;  // pipeline runs with k_min = k_max = k_fixed
  double s = 1.0;
  std::size_t samples_per_epoch = 512;
  std::size_t image_height = 32;
  std::size_t image_width = 32;
  std::size_t image_channels = 3;
  std::size_t categories = 16;
  int repetitions = 3;
  std::uint64_t seed = 0;
  int batch_size = 32;
  double batch_compute_ms = 25.0;
  double fetch_latency_us = 250.0;
  std::size_t queue_capacity = 0;  // 0 means 2 * batch_size
  std::filesystem::path corpus_dir;  // empty = synthetic in-memory corpus
};

void validate(const BenchConfig& cfg);

struct ThroughputReport {
  double mean_epoch_seconds = 0.0;
  double sd_epoch_seconds = 0.0;
  double samples_per_second = 0.0;
  std::vector<double> epoch_seconds;
  /// Order-independent digest of every produced sample (id, labels, pixels);
  /// equal digests mean bit-identical sample streams.
  std::uint64_t stream_digest = 0;
};

/// Timed epochs of the producer/consumer harness. With `baseline` the
/// producers pass samples through untouched; otherwise they run the pipeline
/// at (s, k_fixed). The digest must be reproduced exactly by any worker count.
ThroughputReport run_throughput_bench(const BenchConfig& config, bool baseline);

/// Mean-epoch-time overhead of `report` relative to `baseline`, in percent.
double overhead_percent(const ThroughputReport& report, const ThroughputReport& baseline);

}  // namespace logicmix::bench
