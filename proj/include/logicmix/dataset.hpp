#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "logicmix/errors.hpp"
#include "logicmix/pipeline.hpp"
#include "logicmix/ternary.hpp"

namespace logicmix {

/// Ordered category names, unique; COCO ingestion also carries the original
/// integer ids (ascending) so provenance survives the round trip.
class CategoryTable {
 public:
  CategoryTable() = default;
  explicit CategoryTable(std::vector<std::string> names,
                         std::optional<std::vector<int>> source_ids = std::nullopt);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::optional<std::vector<int>>& source_ids() const { return source_ids_; }

  bool operator==(const CategoryTable&) const = default;

 private:
  std::vector<std::string> names_;
  std::optional<std::vector<int>> source_ids_;
};

/// One dataset row: opaque id, an optional image reference (path; empty when
/// absent), and the ternary labels.
struct DatasetSample {
  std::string id;
  std::string image_ref;
  LabelVector labels;

  bool operator==(const DatasetSample&) const = default;
};

/// A partially labeled dataset. Ground truth, when present, is the full
/// binary labeling the partial labels were derived from; it is test-side
/// metadata and is not serialized.
class PartialDataset {
 public:
  PartialDataset() = default;
  PartialDataset(CategoryTable categories, std::vector<DatasetSample> samples,
                 std::optional<std::vector<std::vector<bool>>> ground_truth = std::nullopt);

  std::size_t size() const { return samples_.size(); }
  std::size_t category_count() const { return categories_.size(); }
  const CategoryTable& categories() const { return categories_; }
  const std::vector<DatasetSample>& samples() const { return samples_; }
  const DatasetSample& sample(std::size_t i) const { return samples_[i]; }
  const std::optional<std::vector<std::vector<bool>>>& ground_truth() const {
    return ground_truth_;
  }

  bool fully_labeled() const;

 private:
  CategoryTable categories_;
  std::vector<DatasetSample> samples_;
  std::optional<std::vector<std::vector<bool>>> ground_truth_;
};

/// Mean per-sample label counts. The three means always add up to C.
struct LabelStats {
  double mean_positives_per_sample = 0.0;
  double mean_negatives_per_sample = 0.0;
  double mean_unknowns_per_sample = 0.0;
  double known_fraction = 0.0;
};

// --- JSONL label codec -----------------------------------------------------
// First line: {"categories": [...]} (plus "source_ids" when the table has
// them). Then one line per sample: {"id": str, "image": str|null,
// "labels": [1|0|null, ...]}. Positive <-> 1, Negative <-> 0, Unknown <-> null.

PartialDataset read_labels_jsonl(const std::filesystem::path& path);
void write_labels_jsonl(const PartialDataset& dataset, const std::filesystem::path& path);

/// Ingests a COCO instances annotation file: one sample per image entry,
/// categories ordered by ascending COCO id, label c Positive iff at least one
/// annotation of category c references the image, Negative otherwise. The
/// output is fully labeled.
PartialDataset ingest_coco(const std::filesystem::path& annotation_json_path);

/// Known-label-proportion simulation: each known label is kept independently
/// with probability `proportion`, otherwise set Unknown. Never flips a label.
/// The pre-drop labeling is retained as ground truth when it is binary.
PartialDataset drop_labels(const PartialDataset& dataset, double proportion,
                           std::uint64_t seed);

LabelStats compute_label_stats(const PartialDataset& dataset);

/// Monte Carlo label statistics of pipeline output at s = 1: draws n_draws
/// augmented samples (inputs cycled round-robin over the dataset, plans drawn
/// from per-draw streams of `seed`) and averages their label counts. Only
/// labels are mixed; images are not touched.
LabelStats estimate_augmented_stats(const PartialDataset& dataset, const LogicMixConfig& config,
                                    std::size_t n_draws, std::uint64_t seed);

}  // namespace logicmix
