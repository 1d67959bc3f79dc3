#pragma once

// Synthetic argument-mining-like corpora. A component opens with a cue word
// whose class fixes the component type, runs over a few filler words and
// closes with a marker word. Cue and marker vocabularies depend only on the
// class position, so two corpora with the same number of types share their
// generative structure even when the type names differ.

#include <cstdint>
#include <string>
#include <vector>

#include "seqmtl/core/random.hpp"
#include "seqmtl/data/corpus.hpp"

namespace seqmtl {

struct SyntheticSpec {
  std::string id = "synth";
  std::vector<std::string> types{"claim", "premise"};
  std::size_t min_tokens = 1000;
  std::uint64_t seed = 1;
  std::size_t cues_per_type = 40;
  std::size_t fillers = 300;
  std::size_t min_sentence = 8;
  std::size_t max_sentence = 18;
  std::size_t min_span = 2;
  std::size_t max_span = 6;
  std::size_t sentences_per_doc = 5;
  /// Probability that a sentence position starts a component.
  double component_rate = 0.12;
  std::string doc_prefix = "d";
};

inline std::string synthetic_cue(std::size_t cls, std::size_t j) {
  return "cue" + std::to_string(cls) + "_" + std::to_string(j);
}

inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.types.empty()) throw Error(ErrorKind::config, "synthetic corpus needs at least one type");
  Dataset ds;
  ds.id = spec.id;
  ds.tagset = TagSet(spec.types);
  Rng rng(spec.seed);
  auto filler = [&] { return "w" + std::to_string(uniform_index(rng, spec.fillers)); };
  auto between = [&](std::size_t lo, std::size_t hi) { return lo + uniform_index(rng, hi - lo + 1); };

  std::size_t total = 0;
  while (total < spec.min_tokens) {
    Document doc;
    doc.id = spec.doc_prefix + std::to_string(ds.documents.size());
    for (std::size_t s = 0; s < spec.sentences_per_doc; ++s) {
      const std::size_t len = between(spec.min_sentence, spec.max_sentence);
      Sentence sent;
      while (sent.size() < len) {
        const std::size_t room = len - sent.size();
        if (room >= spec.min_span + 2 && uniform_unit(rng) < spec.component_rate) {
          // Type classes follow the caller's order; tag indices follow the
          // sorted type names.
          const std::size_t cls = uniform_index(rng, spec.types.size());
          const std::size_t t = *ds.tagset.type_index(spec.types[cls]);
          const std::size_t body = between(spec.min_span, std::min(spec.max_span, room - 2));
          sent.push_back({synthetic_cue(cls, uniform_index(rng, spec.cues_per_type)), ds.tagset.begin_of(t)});
          for (std::size_t b = 0; b < body; ++b) sent.push_back({filler(), ds.tagset.inside_of(t)});
          sent.push_back({"end" + std::to_string(cls), ds.tagset.inside_of(t)});
        } else {
          sent.push_back({filler(), TagSet::outside()});
        }
      }
      total += sent.size();
      doc.sentences.push_back(std::move(sent));
    }
    ds.documents.push_back(std::move(doc));
  }
  return ds;
}

}  // namespace seqmtl
