#pragma once

// Token-level precision/recall/F1 and their unweighted mean over an explicit
// label list. A label with no true positives, or absent from both gold and
// prediction, scores F1 = 0.

#include <span>
#include <unordered_map>
#include <vector>

#include "seqmtl/core/error.hpp"
#include "seqmtl/data/tagset.hpp"

namespace seqmtl {

using TagSequence = std::vector<TagIndex>;

struct LabelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

inline void check_aligned(std::span<const TagSequence> gold, std::span<const TagSequence> pred) {
  if (gold.size() != pred.size()) throw Error(ErrorKind::shape_mismatch, "gold and prediction sequence counts differ");
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw Error(ErrorKind::shape_mismatch, "sequence " + std::to_string(i) + " length differs");
    }
  }
}

inline std::vector<LabelScore> per_label_scores(std::span<const TagSequence> gold, std::span<const TagSequence> pred,
                                                std::span<const TagIndex> labels) {
  check_aligned(gold, pred);
  std::unordered_map<TagIndex, std::size_t> slot;
  for (std::size_t i = 0; i < labels.size(); ++i) slot.emplace(labels[i], i);
  std::vector<std::size_t> tp(labels.size()), n_pred(labels.size()), n_gold(labels.size());
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      const auto g = slot.find(gold[s][t]);
      const auto p = slot.find(pred[s][t]);
      if (g != slot.end()) ++n_gold[g->second];
      if (p != slot.end()) ++n_pred[p->second];
      if (g != slot.end() && gold[s][t] == pred[s][t]) ++tp[g->second];
    }
  }
  std::vector<LabelScore> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    LabelScore& ls = out[i];
    ls.support = n_gold[i];
    ls.precision = n_pred[i] ? static_cast<double>(tp[i]) / static_cast<double>(n_pred[i]) : 0.0;
    ls.recall = n_gold[i] ? static_cast<double>(tp[i]) / static_cast<double>(n_gold[i]) : 0.0;
    const double denom = ls.precision + ls.recall;
    ls.f1 = denom > 0.0 ? 2.0 * ls.precision * ls.recall / denom : 0.0;
  }
  return out;
}

inline double macro_f1(std::span<const TagSequence> gold, std::span<const TagSequence> pred,
                       std::span<const TagIndex> labels) {
  if (labels.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : per_label_scores(gold, pred, labels)) sum += s.f1;
  return sum / static_cast<double>(labels.size());
}

/// All tags of a tag set, in index order.
inline std::vector<TagIndex> all_labels(const TagSet& tags) {
  std::vector<TagIndex> v(tags.size());
  for (TagIndex i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

struct InvalidBio {
  std::size_t o_to_i = 0;         // I-tag right after O
  std::size_t initial_i = 0;      // sequence starts with an I-tag
  std::size_t type_mismatch = 0;  // I-t right after B-s / I-s, s != t

  std::size_t total() const { return o_to_i + initial_i + type_mismatch; }
  InvalidBio& operator+=(const InvalidBio& o) {
    o_to_i += o.o_to_i;
    initial_i += o.initial_i;
    type_mismatch += o.type_mismatch;
    return *this;
  }
};

inline InvalidBio count_invalid_bio(std::span<const TagIndex> pred) {
  InvalidBio out;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (TagSet::bio(pred[t]) != Bio::inside) continue;
    if (t == 0) {
      ++out.initial_i;
    } else if (pred[t - 1] == TagSet::outside()) {
      ++out.o_to_i;
    } else if (TagSet::type_of(pred[t - 1]) != TagSet::type_of(pred[t])) {
      ++out.type_mismatch;
    }
  }
  return out;
}

inline InvalidBio count_invalid_bio(std::span<const TagSequence> preds) {
  InvalidBio out;
  for (const auto& p : preds) out += count_invalid_bio(p);
  return out;
}

}  // namespace seqmtl
