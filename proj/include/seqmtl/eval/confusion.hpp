#pragma once

#include <string>
#include <vector>

#include "seqmtl/eval/metrics.hpp"

namespace seqmtl {

/// Rows are gold labels, columns predicted labels.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& r : counts)
      for (auto c : r) n += c;
    return n;
  }

  std::size_t at(std::size_t gold, std::size_t pred) const { return counts.at(gold).at(pred); }
};

struct ConfusionReport {
  ConfusionMatrix tags;   // full tag set
  ConfusionMatrix types;  // O plus one row per component type (B/I merged)
};

inline ConfusionReport confusion(std::span<const TagSequence> gold, std::span<const TagSequence> pred,
                                 const TagSet& tagset) {
  check_aligned(gold, pred);
  ConfusionReport r;
  r.tags.labels = tagset.tags();
  r.tags.counts.assign(tagset.size(), std::vector<std::size_t>(tagset.size(), 0));
  r.types.labels.push_back("O");
  for (const auto& t : tagset.types()) r.types.labels.push_back(t);
  const std::size_t nt = r.types.labels.size();
  r.types.counts.assign(nt, std::vector<std::size_t>(nt, 0));
  auto collapse = [](TagIndex i) -> std::size_t {
    const auto t = TagSet::type_of(i);
    return t ? *t + 1 : 0;
  };
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      const TagIndex g = gold[s][t];
      const TagIndex p = pred[s][t];
      if (g >= tagset.size() || p >= tagset.size()) {
        throw Error(ErrorKind::index_out_of_range, "tag index outside the tag set");
      }
      ++r.tags.counts[g][p];
      ++r.types.counts[collapse(g)][collapse(p)];
    }
  }
  return r;
}

}  // namespace seqmtl
