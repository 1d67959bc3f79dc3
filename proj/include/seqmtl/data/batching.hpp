#pragma once

#include <vector>

#include "seqmtl/core/random.hpp"
#include "seqmtl/data/corpus.hpp"

namespace seqmtl {

/// A mini-batch is a set of sentences; pointers refer into the split.
using Batch = std::vector<const Sentence*>;

inline std::vector<const Sentence*> sentences_of(const std::vector<Document>& docs) {
  std::vector<const Sentence*> out;
  for (const auto& d : docs)
    for (const auto& s : d.sentences)
      if (!s.empty()) out.push_back(&s);
  return out;
}

/// Shuffles the split's sentences and cuts them into ceil(n / batch_size) batches.
inline std::vector<Batch> make_batches(const std::vector<Document>& split, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw Error(ErrorKind::config, "batch size must be at least 1");
  auto sents = sentences_of(split);
  shuffle(sents, rng);
  std::vector<Batch> out;
  for (std::size_t i = 0; i < sents.size(); i += batch_size) {
    const std::size_t end = std::min(sents.size(), i + batch_size);
    out.emplace_back(sents.begin() + static_cast<std::ptrdiff_t>(i), sents.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace seqmtl
