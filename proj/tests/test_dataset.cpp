#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "logicmix/dataset.hpp"
#include "logicmix/rng.hpp"

using namespace logicmix;

namespace {

constexpr TernaryLabel P = TernaryLabel::Positive;
constexpr TernaryLabel N = TernaryLabel::Negative;
constexpr TernaryLabel U = TernaryLabel::Unknown;

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

PartialDataset two_sample_dataset() {
  return PartialDataset(
      CategoryTable({"cat", "dog", "bird"}),
      {DatasetSample{"a", "a.lmt", LabelVector{P, N, U}},
       DatasetSample{"b", "", LabelVector{P, P, N}}});
}

}  // namespace

TEST_CASE("dataset invariants are enforced at construction") {
  CHECK_THROWS_AS(CategoryTable({"x", "x"}), ContractViolation);
  CHECK_THROWS_AS(PartialDataset(CategoryTable({"a", "b"}),
                                 {DatasetSample{"s", "", LabelVector{P}}}),
                  DimensionError);
  // Known labels must agree with ground truth.
  CHECK_THROWS_AS(PartialDataset(CategoryTable({"a"}),
                                 {DatasetSample{"s", "", LabelVector{P}}},
                                 std::vector<std::vector<bool>>{{false}}),
                  ContractViolation);
  CHECK_NOTHROW(PartialDataset(CategoryTable({"a"}),
                               {DatasetSample{"s", "", LabelVector{U}}},
                               std::vector<std::vector<bool>>{{false}}));
}

TEST_CASE("jsonl codec round-trips a dataset") {
  const PartialDataset ds = two_sample_dataset();
  const auto path = temp_file("logicmix_labels.jsonl");
  write_labels_jsonl(ds, path);
  const PartialDataset back = read_labels_jsonl(path);
  CHECK(back.categories() == ds.categories());
  CHECK(back.samples() == ds.samples());
  std::filesystem::remove(path);
}

TEST_CASE("jsonl codec maps 1/null/0 onto the three label states") {
  const auto path = temp_file("logicmix_codec.jsonl");
  write_text(path,
             "{\"categories\": [\"a\", \"b\", \"c\"]}\n"
             "{\"id\": \"x\", \"image\": null, \"labels\": [1, null, 0]}\n");
  const PartialDataset ds = read_labels_jsonl(path);
  REQUIRE(ds.size() == 1);
  CHECK(ds.sample(0).labels == LabelVector{P, U, N});
  CHECK(ds.sample(0).image_ref.empty());
  std::filesystem::remove(path);
}

TEST_CASE("jsonl parse errors carry the line number") {
  const auto path = temp_file("logicmix_bad.jsonl");

  write_text(path,
             "{\"categories\": [\"a\"]}\n"
             "{\"id\": \"x\", \"image\": null, \"labels\": [2]}\n");
  try {
    read_labels_jsonl(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  write_text(path,
             "{\"categories\": [\"a\", \"b\"]}\n"
             "{\"id\": \"x\", \"image\": null, \"labels\": [1]}\n");
  CHECK_THROWS_AS(read_labels_jsonl(path), ParseError);

  write_text(path, "{\"categories\": [\"a\"]}\nnot json at all\n");
  try {
    read_labels_jsonl(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }

  write_text(path, "{\"id\": \"missing header\"}\n");
  CHECK_THROWS_AS(read_labels_jsonl(path), ParseError);
  CHECK_THROWS_AS(read_labels_jsonl(temp_file("logicmix_nonexistent.jsonl")), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("COCO ingestion: presence rule, id-sorted categories, full labels") {
  const auto path = temp_file("logicmix_coco.json");
  // Categories deliberately out of id order; image 30 has no annotations.
  write_text(path, R"({
    "info": {"description": "fixture", "year": 2024},
    "images": [
      {"id": 10, "file_name": "one.jpg", "height": 4, "width": 4},
      {"id": 20, "file_name": "two.jpg", "height": 4, "width": 4},
      {"id": 30, "file_name": "three.jpg", "height": 4, "width": 4}
    ],
    "annotations": [
      {"id": 1, "image_id": 10, "category_id": 7, "bbox": [0, 0, 1, 1], "segmentation": [[0, 0, 1, 1]]},
      {"id": 2, "image_id": 10, "category_id": 7},
      {"id": 3, "image_id": 20, "category_id": 3},
      {"id": 4, "image_id": 20, "category_id": 11}
    ],
    "categories": [
      {"id": 7, "name": "person", "supercategory": "being"},
      {"id": 3, "name": "bicycle", "supercategory": "vehicle"},
      {"id": 11, "name": "car", "supercategory": "vehicle"}
    ]
  })");

  const PartialDataset ds = ingest_coco(path);
  REQUIRE(ds.size() == 3);
  CHECK(ds.categories().names() == std::vector<std::string>{"bicycle", "person", "car"});
  REQUIRE(ds.categories().source_ids().has_value());
  CHECK(*ds.categories().source_ids() == std::vector<int>{3, 7, 11});

  CHECK(ds.sample(0).id == "10");
  CHECK(ds.sample(0).image_ref == "one.jpg");
  CHECK(ds.sample(0).labels == LabelVector{N, P, N});  // two person annotations, one label
  CHECK(ds.sample(1).labels == LabelVector{P, N, P});
  CHECK(ds.sample(2).labels == LabelVector{N, N, N});  // no annotations at all
  CHECK(ds.fully_labeled());

  std::filesystem::remove(path);
}

TEST_CASE("COCO ingestion rejects non-COCO input") {
  const auto path = temp_file("logicmix_notcoco.json");
  write_text(path, "{\"foo\": [1, 2, 3]}");
  CHECK_THROWS_AS(ingest_coco(path), ParseError);
  write_text(path, "{\"images\": [{\"id\": 1}], \"categories\": [{\"id\": 1, \"name\": \"x\"}]}");
  CHECK_THROWS_AS(ingest_coco(path), ParseError);  // image without file_name
  write_text(path, "not json");
  CHECK_THROWS_AS(ingest_coco(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("drop_labels: identity at proportion 1, Bernoulli rate otherwise") {
  const std::size_t n = 2000, c = 80;
  std::vector<DatasetSample> samples;
  std::vector<std::string> names(c);
  for (std::size_t j = 0; j < c; ++j) names[j] = "c" + std::to_string(j);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TernaryLabel> labels(c, N);
    labels[i % c] = P;
    samples.push_back(DatasetSample{std::to_string(i), "", LabelVector(std::move(labels))});
  }
  const PartialDataset full(CategoryTable(std::move(names)), std::move(samples));

  const PartialDataset same = drop_labels(full, 1.0, 5);
  CHECK(same.samples() == full.samples());

  const PartialDataset dropped = drop_labels(full, 0.3, 5);
  const LabelStats st = compute_label_stats(dropped);
  CHECK(std::abs(st.known_fraction - 0.3) < 0.004);  // ~3.5 sigma at 160k labels

  // Determinism and non-flipping.
  const PartialDataset again = drop_labels(full, 0.3, 5);
  CHECK(again.samples() == dropped.samples());
  const PartialDataset other = drop_labels(full, 0.3, 6);
  CHECK(other.samples() != dropped.samples());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const TernaryLabel before = full.sample(i).labels[j];
      const TernaryLabel after = dropped.sample(i).labels[j];
      CHECK((after == before || after == U));
    }

  // Ground truth is the pre-drop labeling.
  REQUIRE(dropped.ground_truth().has_value());
  CHECK((*dropped.ground_truth())[7][7 % c] == (full.sample(7).labels[7 % c] == P));

  CHECK_THROWS_AS(drop_labels(full, 0.0, 1), ContractViolation);
  CHECK_THROWS_AS(drop_labels(full, 1.2, 1), ContractViolation);
}

TEST_CASE("dropping an already partial dataset only erodes known labels") {
  const PartialDataset base = two_sample_dataset();
  const PartialDataset dropped = drop_labels(base, 0.5, 9);
  CHECK(dropped.sample(0).labels.size() == 3);
  for (std::size_t i = 0; i < base.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const TernaryLabel before = base.sample(i).labels[j];
      const TernaryLabel after = dropped.sample(i).labels[j];
      if (before == U) CHECK(after == U);
      else CHECK((after == before || after == U));
    }
  // Not fully labeled and no prior truth: no ground truth on the result.
  CHECK_FALSE(dropped.ground_truth().has_value());
}

TEST_CASE("compute_label_stats means and identity") {
  std::vector<DatasetSample> samples{
      DatasetSample{"a", "", LabelVector{P, N, U}},
      DatasetSample{"b", "", LabelVector{P, P, N}}};
  const PartialDataset ds(CategoryTable({"x", "y", "z"}), std::move(samples));
  const LabelStats st = compute_label_stats(ds);
  CHECK(st.mean_positives_per_sample == doctest::Approx(1.5));
  CHECK(st.mean_negatives_per_sample == doctest::Approx(1.0));
  CHECK(st.mean_unknowns_per_sample == doctest::Approx(0.5));
  CHECK(st.known_fraction == doctest::Approx(2.5 / 3.0));
  CHECK(st.mean_positives_per_sample + st.mean_negatives_per_sample +
            st.mean_unknowns_per_sample ==
        doctest::Approx(3.0).epsilon(1e-12));

  const LabelStats full = compute_label_stats(two_sample_dataset());
  CHECK(full.mean_unknowns_per_sample == doctest::Approx(0.5));

  CHECK_THROWS_AS(compute_label_stats(PartialDataset(CategoryTable({"x"}), {})),
                  ContractViolation);
}

TEST_CASE("estimate_augmented_stats: k=1 reduces to the raw statistics") {
  const PartialDataset ds = two_sample_dataset();
  LogicMixConfig cfg{1.0, 1, 1, 17};
  const LabelStats aug = estimate_augmented_stats(ds, cfg, 10, 3);
  const LabelStats raw = compute_label_stats(ds);
  CHECK(aug.mean_positives_per_sample == doctest::Approx(raw.mean_positives_per_sample));
  CHECK(aug.mean_negatives_per_sample == doctest::Approx(raw.mean_negatives_per_sample));
  CHECK(aug.mean_unknowns_per_sample == doctest::Approx(raw.mean_unknowns_per_sample));
}

TEST_CASE("COCO-shaped corpus end to end: ingest, drop, raw and augmented stats") {
  // ~2.9 positives per sample out of 80 categories, like the real corpus.
  const std::size_t n_images = 600, n_categories = 80;
  RngStream rng(314);
  std::ostringstream doc;
  doc << "{\"info\": {\"description\": \"synthetic\"}, \"images\": [";
  for (std::size_t i = 0; i < n_images; ++i)
    doc << (i ? "," : "") << "{\"id\": " << 1000 + i << ", \"file_name\": \"img" << i
        << ".jpg\", \"height\": 8, \"width\": 8}";
  doc << "], \"annotations\": [";
  std::size_t ann_id = 0;
  for (std::size_t i = 0; i < n_images; ++i) {
    for (std::size_t c = 0; c < n_categories; ++c) {
      if (!rng.bernoulli(2.9 / 80.0)) continue;
      doc << (ann_id ? "," : "") << "{\"id\": " << ann_id++ << ", \"image_id\": " << 1000 + i
          << ", \"category_id\": " << 7 * c + 1
          << ", \"bbox\": [0.5, 1.5, 2.0, 2.0], \"segmentation\": [[0, 0, 1, 1]], \"iscrowd\": 0}";
    }
  }
  doc << "], \"categories\": [";
  for (std::size_t c = 0; c < n_categories; ++c)
    doc << (c ? "," : "") << "{\"id\": " << 7 * c + 1 << ", \"name\": \"cat" << c
        << "\", \"supercategory\": \"s\"}";
  doc << "]}";

  const auto path = temp_file("logicmix_coco_medium.json");
  write_text(path, doc.str());
  const PartialDataset coco = ingest_coco(path);
  std::filesystem::remove(path);

  REQUIRE(coco.size() == n_images);
  REQUIRE(coco.category_count() == n_categories);
  CHECK(coco.fully_labeled());

  const LabelStats raw = compute_label_stats(coco);
  CHECK(raw.mean_positives_per_sample == doctest::Approx(2.9).epsilon(0.1));
  CHECK(raw.known_fraction == doctest::Approx(1.0));

  const PartialDataset dropped = drop_labels(coco, 0.3, 2);
  const LabelStats partial = compute_label_stats(dropped);
  CHECK(partial.known_fraction == doctest::Approx(0.3).epsilon(0.05));
  CHECK(partial.mean_positives_per_sample ==
        doctest::Approx(0.3 * raw.mean_positives_per_sample).epsilon(0.1));

  // Mixing K in {2,3}: positives accumulate (union), negatives shrink
  // (intersection), unknowns absorb the rest.
  const LogicMixConfig cfg{1.0, 2, 3, 3};
  const LabelStats aug = estimate_augmented_stats(dropped, cfg, 20000, 3);
  CHECK(aug.mean_positives_per_sample > 1.8 * partial.mean_positives_per_sample);
  CHECK(aug.mean_negatives_per_sample < 0.4 * partial.mean_negatives_per_sample);
  CHECK(aug.mean_positives_per_sample + aug.mean_negatives_per_sample +
            aug.mean_unknowns_per_sample ==
        doctest::Approx(static_cast<double>(n_categories)).epsilon(1e-9));
}

TEST_CASE("estimate_augmented_stats: exhaustive two-sample pair mix") {
  std::vector<DatasetSample> samples{
      DatasetSample{"a", "", LabelVector{P, N, U}},
      DatasetSample{"b", "", LabelVector{U, N, N}}};
  const PartialDataset ds(CategoryTable({"x", "y", "z"}), std::move(samples));
  LogicMixConfig cfg{1.0, 2, 2, 21};
  const LabelStats st = estimate_augmented_stats(ds, cfg, 2, 4);
  // or([1,0,?],[?,0,0]) = [1,0,?] for both input orders: pos=1, neg=1, unk=1.
  CHECK(st.mean_positives_per_sample == doctest::Approx(1.0));
  CHECK(st.mean_negatives_per_sample == doctest::Approx(1.0));
  CHECK(st.mean_unknowns_per_sample == doctest::Approx(1.0));

  LogicMixConfig bad = cfg;
  bad.s = 0.5;
  CHECK_THROWS_AS(estimate_augmented_stats(ds, bad, 2, 4), ContractViolation);
  cfg.k_max = 3;
  CHECK_THROWS_AS(estimate_augmented_stats(ds, cfg, 2, 4), InsufficientDataset);
}
