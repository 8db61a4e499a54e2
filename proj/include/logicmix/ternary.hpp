#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "logicmix/errors.hpp"

namespace logicmix {

/// Per-category label state. Exactly three inhabitants; a label is either a
/// known negative (category absent), a known positive (category present), or
/// unknown (not annotated).
enum class TernaryLabel : std::int8_t {
  Negative = 0,
  Positive = 1,
  Unknown = 2,
};

constexpr bool is_known(TernaryLabel l) { return l != TernaryLabel::Unknown; }

/// OR of two ternary labels. Positive dominates from either side; Negative is
/// the identity, so an Unknown operand survives unless a Positive absorbs it.
constexpr TernaryLabel or2(TernaryLabel a, TernaryLabel b) {
  if (a == TernaryLabel::Positive || b == TernaryLabel::Positive)
    return TernaryLabel::Positive;
  if (a == TernaryLabel::Negative && b == TernaryLabel::Negative)
    return TernaryLabel::Negative;
  return TernaryLabel::Unknown;
}

/// OR over K >= 1 labels: Positive if any input is Positive, Negative if all
/// are Negative, Unknown otherwise.
inline TernaryLabel or_reduce(std::span<const TernaryLabel> labels) {
  if (labels.empty())
    throw ContractViolation("or_reduce: empty label sequence");
  bool any_unknown = false;
  for (TernaryLabel l : labels) {
    if (l == TernaryLabel::Positive) return TernaryLabel::Positive;
    if (l == TernaryLabel::Unknown) any_unknown = true;
  }
  return any_unknown ? TernaryLabel::Unknown : TernaryLabel::Negative;
}

inline TernaryLabel or_reduce(std::initializer_list<TernaryLabel> labels) {
  return or_reduce(std::span<const TernaryLabel>(labels.begin(), labels.size()));
}

// Serialization codec shared with the dataset store: Positive <-> 1,
// Negative <-> 0, Unknown <-> -1 in compact binary contexts (JSON uses null
// for Unknown). Round-trips bit-exactly.
constexpr std::int8_t to_int8(TernaryLabel l) {
  return l == TernaryLabel::Unknown ? std::int8_t{-1} : static_cast<std::int8_t>(l);
}

constexpr TernaryLabel from_int8(std::int8_t v) {
  switch (v) {
    case 0: return TernaryLabel::Negative;
    case 1: return TernaryLabel::Positive;
    case -1: return TernaryLabel::Unknown;
    default: throw ContractViolation("from_int8: invalid ternary encoding " + std::to_string(v));
  }
}

inline char to_char(TernaryLabel l) {
  switch (l) {
    case TernaryLabel::Negative: return '0';
    case TernaryLabel::Positive: return '1';
    default: return '?';
  }
}

/// A C-length vector of ternary labels. Length is fixed at construction and
/// matches the owning dataset's category count.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<TernaryLabel> labels) : labels_(std::move(labels)) {}
  LabelVector(std::initializer_list<TernaryLabel> labels) : labels_(labels) {}

  /// All-Unknown vector of length c.
  static LabelVector unknown(std::size_t c) {
    return LabelVector(std::vector<TernaryLabel>(c, TernaryLabel::Unknown));
  }

  std::size_t size() const { return labels_.size(); }
  TernaryLabel operator[](std::size_t c) const { return labels_[c]; }
  std::span<const TernaryLabel> labels() const { return labels_; }

  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  bool operator==(const LabelVector&) const = default;

  std::string to_string() const {
    std::string s;
    s.reserve(labels_.size());
    for (TernaryLabel l : labels_) s.push_back(to_char(l));
    return s;
  }

 private:
  std::vector<TernaryLabel> labels_;
};

/// Element-wise or_reduce over K >= 1 vectors of common length C.
inline LabelVector mix_label_vectors(std::span<const LabelVector> vectors) {
  if (vectors.empty())
    throw ContractViolation("mix_label_vectors: empty vector sequence");
  const std::size_t c = vectors.front().size();
  for (const LabelVector& v : vectors)
    if (v.size() != c)
      throw DimensionError("mix_label_vectors: length mismatch (" +
                           std::to_string(v.size()) + " vs " + std::to_string(c) + ")");
  std::vector<TernaryLabel> out(c, TernaryLabel::Negative);
  for (std::size_t i = 0; i < c; ++i) {
    TernaryLabel acc = vectors.front()[i];
    for (std::size_t k = 1; k < vectors.size(); ++k) acc = or2(acc, vectors[k][i]);
    out[i] = acc;
  }
  return LabelVector(std::move(out));
}

inline LabelVector mix_label_vectors(std::initializer_list<LabelVector> vectors) {
  return mix_label_vectors(std::span<const LabelVector>(vectors.begin(), vectors.size()));
}

/// Test oracle: all binary vectors reachable by substituting each Unknown
/// entry with 0 or 1. Known entries are fixed. At most 2^20 completions.
inline std::vector<std::vector<bool>> enumerate_completions(const LabelVector& vector) {
  std::vector<std::size_t> unknown_pos;
  for (std::size_t i = 0; i < vector.size(); ++i)
    if (vector[i] == TernaryLabel::Unknown) unknown_pos.push_back(i);
  if (unknown_pos.size() > 20)
    throw ContractViolation("enumerate_completions: " + std::to_string(unknown_pos.size()) +
                            " unknowns exceed the 2^20 enumeration bound");

  std::vector<bool> base(vector.size(), false);
  for (std::size_t i = 0; i < vector.size(); ++i)
    base[i] = vector[i] == TernaryLabel::Positive;

  const std::size_t n = std::size_t{1} << unknown_pos.size();
  std::vector<std::vector<bool>> out;
  out.reserve(n);
  for (std::size_t mask = 0; mask < n; ++mask) {
    std::vector<bool> v = base;
    for (std::size_t b = 0; b < unknown_pos.size(); ++b)
      v[unknown_pos[b]] = (mask >> b) & 1u;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace logicmix
