#include "logicmix/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "logicmix/image.hpp"
#include "logicmix/pipeline.hpp"
#include "logicmix/rng.hpp"
#include "logicmix/sample.hpp"

namespace logicmix::bench {

void validate(const BenchConfig& cfg) {
  if (cfg.workers < 1) throw ContractViolation("BenchConfig: workers must be >= 1");
  if (cfg.k_fixed < 1) throw ContractViolation("BenchConfig: k_fixed must be >= 1");
  if (!(cfg.s >= 0.0 && cfg.s <= 1.0)) throw ContractViolation("BenchConfig: s must be in [0, 1]");
  if (cfg.samples_per_epoch < 1 || cfg.repetitions < 1 || cfg.batch_size < 1)
    throw ContractViolation("BenchConfig: counts must be positive");
  if (cfg.samples_per_epoch < static_cast<std::size_t>(cfg.k_fixed))
    throw InsufficientDataset("BenchConfig: corpus smaller than k_fixed");
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr auto kQueueTimeout = std::chrono::seconds(120);

struct HarnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  // Returns false once the queue is closed.
  bool push(T item) {
    std::unique_lock lock(mutex_);
    if (!not_full_.wait_for(lock, kQueueTimeout,
                            [&] { return closed_ || queue_.size() < capacity_; }))
      throw HarnessError("bench queue stalled while pushing");
    if (closed_) return false;
    queue_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    if (!not_empty_.wait_for(lock, kQueueTimeout, [&] { return closed_ || !queue_.empty(); }))
      throw HarnessError("bench queue stalled while popping");
    if (queue_.empty()) return std::nullopt;  // closed and drained
    T item = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> queue_;
  std::size_t capacity_;
  bool closed_ = false;
};

void busy_wait(std::chrono::duration<double> amount) {
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(amount);
  while (Clock::now() < deadline) {
  }
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t sample_digest(const Sample& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(s.id.data(), s.id.size(), h);
  for (TernaryLabel l : s.labels) {
    const std::int8_t v = to_int8(l);
    h = fnv1a(&v, 1, h);
  }
  h = fnv1a(s.image.data().data(), static_cast<std::size_t>(s.image.data().size()) * 4, h);
  return h;
}

// Deadline-paced latency: each wait() releases one fetch `step` after the
// previous deadline, so a late wakeup does not push later deadlines back.
// This models a pipelined decode/IO stage with a fixed per-image service
// time, and keeps the pace exact even when sleeps overshoot under load.
class FetchPacer {
 public:
  explicit FetchPacer(double latency_us)
      : step_(std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double, std::micro>(latency_us))) {}

  void wait() {
    if (step_.count() <= 0) return;
    const auto now = Clock::now();
    if (next_ == Clock::time_point{}) next_ = now;
    next_ += step_;
    // When behind schedule the fetch releases immediately and the deadline
    // stays put, so wakeup overshoot never accumulates into the pace.
    if (next_ > now) std::this_thread::sleep_until(next_);
  }

 private:
  Clock::duration step_;
  Clock::time_point next_{};
};

// Sample source. Synthetic images come from per-index streams; disk mode
// reads LMT1 files instead. Fetch latency is owned by the per-worker pacer.
class Corpus {
 public:
  explicit Corpus(const BenchConfig& cfg) : cfg_(cfg) {
    if (!cfg.corpus_dir.empty()) {
      for (const auto& entry : std::filesystem::directory_iterator(cfg.corpus_dir))
        if (entry.path().extension() == ".lmt") files_.push_back(entry.path());
      std::sort(files_.begin(), files_.end());
      if (files_.empty())
        throw ContractViolation("bench corpus dir has no .lmt files: " + cfg.corpus_dir.string());
    }
  }

  Sample fetch(std::size_t index) const {
    if (!files_.empty()) {
      ImageTensor img = read_lmt1(files_[index % files_.size()]);
      return Sample{std::to_string(index), std::move(img), labels_for(index)};
    }
    RngStream rng(cfg_.seed, streams::kCorpus, index);
    const std::size_t n = cfg_.image_height * cfg_.image_width * cfg_.image_channels;
    Eigen::ArrayXf data(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < data.size(); ++i)
      data[i] = static_cast<float>(rng.uniform_double());
    return Sample{std::to_string(index),
                  ImageTensor(cfg_.image_height, cfg_.image_width, cfg_.image_channels,
                              std::move(data)),
                  labels_for(index)};
  }

 private:
  LabelVector labels_for(std::size_t index) const {
    RngStream rng(cfg_.seed, streams::kData, index);
    std::vector<TernaryLabel> labels(cfg_.categories);
    for (TernaryLabel& l : labels) l = static_cast<TernaryLabel>(rng.bounded(3));
    return LabelVector(std::move(labels));
  }

  const BenchConfig& cfg_;
  std::vector<std::filesystem::path> files_;
};

struct EpochResult {
  double seconds = 0.0;
  std::uint64_t digest = 0;
};

EpochResult run_epoch(const BenchConfig& cfg, bool baseline, const Corpus& corpus) {
  const std::size_t n = cfg.samples_per_epoch;
  const std::size_t capacity =
      cfg.queue_capacity > 0 ? cfg.queue_capacity : 2 * static_cast<std::size_t>(cfg.batch_size);
  BoundedQueue<Sample> queue(capacity);
  std::vector<std::uint64_t> digests(n, 0);

  LogicMixConfig lm;
  lm.s = cfg.s;
  lm.k_min = cfg.k_fixed;
  lm.k_max = cfg.k_fixed;
  lm.seed = cfg.seed;

  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto note_error = [&](std::exception_ptr e) {
    std::lock_guard lock(error_mutex);
    if (!first_error) first_error = e;
    queue.close();
  };

  const auto t0 = Clock::now();

  // Contiguous disjoint shards; each sample's stream depends only on its
  // index, so the produced multiset is invariant to the shard layout.
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(cfg.workers));
  const std::size_t per_worker = (n + static_cast<std::size_t>(cfg.workers) - 1) /
                                 static_cast<std::size_t>(cfg.workers);
  for (int w = 0; w < cfg.workers; ++w) {
    const std::size_t begin = static_cast<std::size_t>(w) * per_worker;
    const std::size_t end = std::min(n, begin + per_worker);
    workers.emplace_back([&, begin, end] {
      try {
        FetchPacer pacer(cfg.fetch_latency_us);
        const SampleFetch fetch = [&](std::size_t i) {
          pacer.wait();
          return corpus.fetch(i);
        };
        for (std::size_t i = begin; i < end; ++i) {
          Sample input = fetch(i);
          Sample out;
          if (baseline) {
            out = std::move(input);
          } else {
            RngStream rng = sample_stream(cfg.seed, 0, i);
            out = apply(input, i, n, fetch, lm, rng);
          }
          digests[i] = sample_digest(out);
          if (!queue.push(std::move(out))) return;
        }
      } catch (...) {
        note_error(std::current_exception());
      }
    });
  }

  std::size_t consumed = 0;
  std::size_t in_batch = 0;
  try {
    while (consumed < n) {
      std::optional<Sample> s = queue.pop();
      if (!s) break;  // closed early by a failing worker
      ++consumed;
      if (++in_batch == static_cast<std::size_t>(cfg.batch_size) || consumed == n) {
        busy_wait(std::chrono::duration<double, std::milli>(cfg.batch_compute_ms));
        in_batch = 0;
      }
    }
  } catch (...) {
    note_error(std::current_exception());
  }

  queue.close();
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
  if (consumed != n) throw HarnessError("bench consumer drained only " + std::to_string(consumed) +
                                        " of " + std::to_string(n) + " samples");

  EpochResult res;
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < n; ++i) h += detail::mix64(digests[i] ^ i);
  res.digest = h;
  return res;
}

}  // namespace

ThroughputReport run_throughput_bench(const BenchConfig& config, bool baseline) {
  validate(config);
  Corpus corpus(config);

  ThroughputReport report;
  report.epoch_seconds.reserve(static_cast<std::size_t>(config.repetitions));
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const EpochResult res = run_epoch(config, baseline, corpus);
    if (rep == 0) report.stream_digest = res.digest;
    else if (report.stream_digest != res.digest)
      throw HarnessError("bench produced different sample streams across repetitions");
    report.epoch_seconds.push_back(res.seconds);
  }

  const double mean = std::accumulate(report.epoch_seconds.begin(), report.epoch_seconds.end(),
                                      0.0) /
                      static_cast<double>(report.epoch_seconds.size());
  report.mean_epoch_seconds = mean;
  if (report.epoch_seconds.size() > 1) {
    double ss = 0.0;
    for (double v : report.epoch_seconds) ss += (v - mean) * (v - mean);
    report.sd_epoch_seconds = std::sqrt(ss / static_cast<double>(report.epoch_seconds.size() - 1));
  }
  report.samples_per_second = static_cast<double>(config.samples_per_epoch) / mean;
  return report;
}

double overhead_percent(const ThroughputReport& report, const ThroughputReport& baseline) {
  return 100.0 * (report.mean_epoch_seconds - baseline.mean_epoch_seconds) /
         baseline.mean_epoch_seconds;
}

}  // namespace logicmix::bench
