#include "logicmix/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <json.hpp>

namespace logicmix {

using nlohmann::json;

CategoryTable::CategoryTable(std::vector<std::string> names,
                             std::optional<std::vector<int>> source_ids)
    : names_(std::move(names)), source_ids_(std::move(source_ids)) {
  std::unordered_set<std::string> seen;
  for (const std::string& n : names_)
    if (!seen.insert(n).second)
      throw ContractViolation("CategoryTable: duplicate category name '" + n + "'");
  if (source_ids_ && source_ids_->size() != names_.size())
    throw DimensionError("CategoryTable: source_ids length != names length");
}

PartialDataset::PartialDataset(CategoryTable categories, std::vector<DatasetSample> samples,
                               std::optional<std::vector<std::vector<bool>>> ground_truth)
    : categories_(std::move(categories)),
      samples_(std::move(samples)),
      ground_truth_(std::move(ground_truth)) {
  const std::size_t c = categories_.size();
  for (const DatasetSample& s : samples_)
    if (s.labels.size() != c)
      throw DimensionError("PartialDataset: sample '" + s.id + "' has " +
                           std::to_string(s.labels.size()) + " labels, expected " +
                           std::to_string(c));
  if (ground_truth_) {
    if (ground_truth_->size() != samples_.size())
      throw DimensionError("PartialDataset: ground truth count != sample count");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& truth = (*ground_truth_)[i];
      if (truth.size() != c)
        throw DimensionError("PartialDataset: ground truth arity mismatch at sample " +
                             std::to_string(i));
      for (std::size_t j = 0; j < c; ++j) {
        const TernaryLabel l = samples_[i].labels[j];
        if (is_known(l) && (l == TernaryLabel::Positive) != truth[j])
          throw ContractViolation("PartialDataset: known label disagrees with ground truth at (" +
                                  std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

bool PartialDataset::fully_labeled() const {
  for (const DatasetSample& s : samples_)
    for (TernaryLabel l : s.labels)
      if (l == TernaryLabel::Unknown) return false;
  return true;
}

// --- JSONL codec -------------------------------------------------------------

namespace {

json label_to_json(TernaryLabel l) {
  if (l == TernaryLabel::Unknown) return nullptr;
  return static_cast<int>(l == TernaryLabel::Positive);
}

TernaryLabel label_from_json(const json& v, std::size_t line_no) {
  if (v.is_null()) return TernaryLabel::Unknown;
  if (v.is_number_integer() || v.is_number_unsigned()) {
    const auto i = v.get<std::int64_t>();
    if (i == 0) return TernaryLabel::Negative;
    if (i == 1) return TernaryLabel::Positive;
  }
  throw ParseError("label must be 1, 0 or null, got " + v.dump(), line_no);
}

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
}

}  // namespace

PartialDataset read_labels_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  CategoryTable categories;
  std::vector<DatasetSample> samples;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const json j = parse_line(line, line_no);
    if (!j.is_object()) throw ParseError("expected a JSON object", line_no);

    if (!have_header) {
      if (!j.contains("categories") || !j["categories"].is_array())
        throw ParseError("header must be {\"categories\": [...]}", line_no);
      std::vector<std::string> names;
      for (const json& n : j["categories"]) {
        if (!n.is_string()) throw ParseError("category names must be strings", line_no);
        names.push_back(n.get<std::string>());
      }
      std::optional<std::vector<int>> source_ids;
      if (j.contains("source_ids")) {
        if (!j["source_ids"].is_array())
          throw ParseError("source_ids must be an array of integers", line_no);
        source_ids.emplace();
        for (const json& v : j["source_ids"]) {
          if (!v.is_number_integer() && !v.is_number_unsigned())
            throw ParseError("source_ids must be an array of integers", line_no);
          source_ids->push_back(v.get<int>());
        }
      }
      try {
        categories = CategoryTable(std::move(names), std::move(source_ids));
      } catch (const std::exception& e) {
        throw ParseError(e.what(), line_no);
      }
      have_header = true;
      continue;
    }

    if (!j.contains("id") || !j["id"].is_string())
      throw ParseError("sample needs a string \"id\"", line_no);
    std::string image_ref;
    if (j.contains("image") && !j["image"].is_null()) {
      if (!j["image"].is_string()) throw ParseError("\"image\" must be a string or null", line_no);
      image_ref = j["image"].get<std::string>();
    }
    if (!j.contains("labels") || !j["labels"].is_array())
      throw ParseError("sample needs a \"labels\" array", line_no);
    const json& jl = j["labels"];
    if (jl.size() != categories.size())
      throw ParseError("expected " + std::to_string(categories.size()) + " labels, got " +
                           std::to_string(jl.size()),
                       line_no);
    std::vector<TernaryLabel> labels;
    labels.reserve(jl.size());
    for (const json& v : jl) labels.push_back(label_from_json(v, line_no));
    samples.push_back(DatasetSample{j["id"].get<std::string>(), std::move(image_ref),
                                    LabelVector(std::move(labels))});
  }
  if (!have_header) throw ParseError("missing header line in " + path.string());
  return PartialDataset(std::move(categories), std::move(samples));
}

void write_labels_jsonl(const PartialDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  json header;
  header["categories"] = dataset.categories().names();
  if (dataset.categories().source_ids()) header["source_ids"] = *dataset.categories().source_ids();
  out << header.dump() << '\n';
  for (const DatasetSample& s : dataset.samples()) {
    json j;
    j["id"] = s.id;
    j["image"] = s.image_ref.empty() ? json(nullptr) : json(s.image_ref);
    json labels = json::array();
    for (TernaryLabel l : s.labels) labels.push_back(label_to_json(l));
    j["labels"] = std::move(labels);
    out << j.dump() << '\n';
  }
  if (!out) throw ParseError("short write: " + path.string());
}

// --- COCO ingestion ----------------------------------------------------------

namespace {

// Streaming handler for COCO instances files: picks id/file_name out of
// "images", image_id/category_id out of "annotations", and id/name out of
// "categories", ignoring everything else (segmentations, bboxes, info, ...).
// Streaming keeps peak memory at the size of what we keep, not the file.
struct CocoSax : json::json_sax_t {
  enum class Section { None, Images, Annotations, Categories };

  struct ImageRec {
    std::int64_t id = 0;
    bool have_id = false;
    std::string file_name;
    bool have_file_name = false;
  };

  std::size_t depth = 0;
  Section section = Section::None;
  std::string top_key;
  std::string field_key;

  ImageRec image;
  std::int64_t ann_image_id = 0, ann_category_id = 0;
  bool ann_have_image = false, ann_have_category = false;
  std::int64_t cat_id = 0;
  bool cat_have_id = false;
  std::string cat_name;
  bool cat_have_name = false;

  std::vector<ImageRec> images;
  std::vector<std::pair<std::int64_t, std::int64_t>> annotations;  // (image_id, category_id)
  std::vector<std::pair<std::int64_t, std::string>> categories;    // (id, name)

  bool in_record() const { return section != Section::None && depth == 3; }

  void handle_integer(std::int64_t v) {
    if (!in_record()) return;
    if (section == Section::Images && field_key == "id") {
      image.id = v;
      image.have_id = true;
    } else if (section == Section::Annotations && field_key == "image_id") {
      ann_image_id = v;
      ann_have_image = true;
    } else if (section == Section::Annotations && field_key == "category_id") {
      ann_category_id = v;
      ann_have_category = true;
    } else if (section == Section::Categories && field_key == "id") {
      cat_id = v;
      cat_have_id = true;
    }
  }

  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t v) override {
    handle_integer(v);
    return true;
  }
  bool number_unsigned(number_unsigned_t v) override {
    handle_integer(static_cast<std::int64_t>(v));
    return true;
  }
  bool number_float(number_float_t, const string_t&) override { return true; }
  bool string(string_t& v) override {
    if (!in_record()) return true;
    if (section == Section::Images && field_key == "file_name") {
      image.file_name = v;
      image.have_file_name = true;
    } else if (section == Section::Categories && field_key == "name") {
      cat_name = v;
      cat_have_name = true;
    }
    return true;
  }
  bool binary(binary_t&) override { return true; }

  bool start_object(std::size_t) override {
    if (section != Section::None && depth == 2) {
      image = ImageRec{};
      ann_have_image = ann_have_category = false;
      cat_have_id = cat_have_name = false;
    }
    ++depth;
    return true;
  }

  bool end_object() override {
    --depth;
    if (section != Section::None && depth == 2) commit();
    return true;
  }

  bool start_array(std::size_t) override {
    if (depth == 1) {
      if (top_key == "images") section = Section::Images;
      else if (top_key == "annotations") section = Section::Annotations;
      else if (top_key == "categories") section = Section::Categories;
    }
    ++depth;
    return true;
  }

  bool end_array() override {
    --depth;
    if (depth == 1) section = Section::None;
    return true;
  }

  bool key(string_t& k) override {
    if (depth == 1) top_key = k;
    else if (depth == 3) field_key = k;
    return true;
  }

  bool parse_error(std::size_t position, const std::string&, const json::exception& ex) override {
    throw ParseError("COCO JSON parse error at byte " + std::to_string(position) + ": " +
                     ex.what());
  }

  void commit() {
    switch (section) {
      case Section::Images:
        if (!image.have_id || !image.have_file_name)
          throw ParseError("COCO image entry missing id or file_name");
        images.push_back(std::move(image));
        break;
      case Section::Annotations:
        if (!ann_have_image || !ann_have_category)
          throw ParseError("COCO annotation missing image_id or category_id");
        annotations.emplace_back(ann_image_id, ann_category_id);
        break;
      case Section::Categories:
        if (!cat_have_id || !cat_have_name)
          throw ParseError("COCO category missing id or name");
        categories.emplace_back(cat_id, cat_name);
        break;
      case Section::None:
        break;
    }
  }
};

}  // namespace

PartialDataset ingest_coco(const std::filesystem::path& annotation_json_path) {
  std::ifstream in(annotation_json_path, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + annotation_json_path.string());

  CocoSax sax;
  if (!json::sax_parse(in, &sax))
    throw ParseError("COCO JSON parse failed: " + annotation_json_path.string());
  if (sax.images.empty() || sax.categories.empty())
    throw ParseError("not a COCO instances file (no images/categories): " +
                     annotation_json_path.string());

  std::sort(sax.categories.begin(), sax.categories.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> names;
  std::vector<int> source_ids;
  std::unordered_map<std::int64_t, std::size_t> category_index;
  for (const auto& [id, name] : sax.categories) {
    if (!category_index.emplace(id, names.size()).second)
      throw ParseError("duplicate COCO category id " + std::to_string(id));
    names.push_back(name);
    source_ids.push_back(static_cast<int>(id));
  }

  std::unordered_map<std::int64_t, std::size_t> image_index;
  image_index.reserve(sax.images.size());
  for (std::size_t i = 0; i < sax.images.size(); ++i)
    if (!image_index.emplace(sax.images[i].id, i).second)
      throw ParseError("duplicate COCO image id " + std::to_string(sax.images[i].id));

  const std::size_t c = names.size();
  std::vector<std::vector<TernaryLabel>> labels(sax.images.size(),
                                                std::vector<TernaryLabel>(c, TernaryLabel::Negative));
  for (const auto& [image_id, category_id] : sax.annotations) {
    const auto img = image_index.find(image_id);
    if (img == image_index.end())
      throw ParseError("annotation references unknown image id " + std::to_string(image_id));
    const auto cat = category_index.find(category_id);
    if (cat == category_index.end())
      throw ParseError("annotation references unknown category id " + std::to_string(category_id));
    labels[img->second][cat->second] = TernaryLabel::Positive;
  }

  std::vector<DatasetSample> samples;
  samples.reserve(sax.images.size());
  for (std::size_t i = 0; i < sax.images.size(); ++i)
    samples.push_back(DatasetSample{std::to_string(sax.images[i].id),
                                    std::move(sax.images[i].file_name),
                                    LabelVector(std::move(labels[i]))});
  return PartialDataset(CategoryTable(std::move(names), std::move(source_ids)),
                        std::move(samples));
}

// --- Label dropping and statistics -------------------------------------------

PartialDataset drop_labels(const PartialDataset& dataset, double proportion, std::uint64_t seed) {
  if (!(proportion > 0.0 && proportion <= 1.0))
    throw ContractViolation("drop_labels: proportion must be in (0, 1]");

  std::vector<DatasetSample> samples;
  samples.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const DatasetSample& s = dataset.sample(i);
    RngStream rng(seed, streams::kDrop, i);
    std::vector<TernaryLabel> labels(s.labels.begin(), s.labels.end());
    // One draw per position, known or not, so the mask is independent of any
    // unknowns already present.
    for (TernaryLabel& l : labels) {
      const bool keep = rng.uniform_double() < proportion;
      if (is_known(l) && !keep) l = TernaryLabel::Unknown;
    }
    samples.push_back(DatasetSample{s.id, s.image_ref, LabelVector(std::move(labels))});
  }

  std::optional<std::vector<std::vector<bool>>> truth = dataset.ground_truth();
  if (!truth && dataset.fully_labeled()) {
    truth.emplace();
    truth->reserve(dataset.size());
    for (const DatasetSample& s : dataset.samples()) {
      std::vector<bool> row(s.labels.size());
      for (std::size_t c = 0; c < s.labels.size(); ++c)
        row[c] = s.labels[c] == TernaryLabel::Positive;
      truth->push_back(std::move(row));
    }
  }
  return PartialDataset(dataset.categories(), std::move(samples), std::move(truth));
}

namespace {

LabelStats stats_from_counts(double pos, double neg, double unk, std::size_t n, std::size_t c) {
  LabelStats st;
  st.mean_positives_per_sample = pos / static_cast<double>(n);
  st.mean_negatives_per_sample = neg / static_cast<double>(n);
  st.mean_unknowns_per_sample = unk / static_cast<double>(n);
  st.known_fraction = c == 0 ? 0.0
                             : (st.mean_positives_per_sample + st.mean_negatives_per_sample) /
                                   static_cast<double>(c);
  const double total = st.mean_positives_per_sample + st.mean_negatives_per_sample +
                       st.mean_unknowns_per_sample;
  if (std::abs(total - static_cast<double>(c)) > 1e-9)
    throw ContractViolation("LabelStats: mean counts sum to " + std::to_string(total) +
                            ", expected " + std::to_string(c));
  return st;
}

void count_labels(const LabelVector& v, double& pos, double& neg, double& unk) {
  for (TernaryLabel l : v) {
    if (l == TernaryLabel::Positive) pos += 1.0;
    else if (l == TernaryLabel::Negative) neg += 1.0;
    else unk += 1.0;
  }
}

}  // namespace

LabelStats compute_label_stats(const PartialDataset& dataset) {
  if (dataset.size() == 0) throw ContractViolation("compute_label_stats: empty dataset");
  double pos = 0, neg = 0, unk = 0;
  for (const DatasetSample& s : dataset.samples()) count_labels(s.labels, pos, neg, unk);
  return stats_from_counts(pos, neg, unk, dataset.size(), dataset.category_count());
}

LabelStats estimate_augmented_stats(const PartialDataset& dataset, const LogicMixConfig& config,
                                    std::size_t n_draws, std::uint64_t seed) {
  validate(config);
  if (config.s != 1.0)
    throw ContractViolation("estimate_augmented_stats: config must have s = 1");
  if (n_draws < 1) throw ContractViolation("estimate_augmented_stats: n_draws must be >= 1");
  if (dataset.size() < static_cast<std::size_t>(config.k_max))
    throw InsufficientDataset("estimate_augmented_stats: dataset smaller than k_max");

  const auto fetch = [&](std::size_t i) {
    return Sample{dataset.sample(i).id, ImageTensor(), dataset.sample(i).labels};
  };
  double pos = 0, neg = 0, unk = 0;
  for (std::size_t draw = 0; draw < n_draws; ++draw) {
    const std::size_t input_index = draw % dataset.size();
    RngStream rng = sample_stream(seed, 0, draw);
    const Sample out = apply(fetch(input_index), input_index, dataset.size(), fetch, config, rng);
    count_labels(out.labels, pos, neg, unk);
  }
  return stats_from_counts(pos, neg, unk, n_draws, dataset.category_count());
}

}  // namespace logicmix
