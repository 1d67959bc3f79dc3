#pragma once

// Pooled training data for the union baseline. Identically named component
// types are merged across datasets.

#include <set>
#include <vector>

#include "seqmtl/data/corpus.hpp"

namespace seqmtl {

/// Maps a tag of `from` onto `to` by name; tags whose type is absent in `to`
/// become O.
inline TagIndex remap_tag(const TagSet& from, const TagSet& to, TagIndex tag) {
  if (auto i = to.find(from.name(tag))) return *i;
  return TagSet::outside();
}

inline std::vector<TagIndex> tag_map(const TagSet& from, const TagSet& to) {
  std::vector<TagIndex> m(from.size());
  for (TagIndex i = 0; i < from.size(); ++i) m[i] = remap_tag(from, to, i);
  return m;
}

inline Dataset relabel(const Dataset& ds, const TagSet& target, const std::string& id_prefix = {}) {
  const auto m = tag_map(ds.tagset, target);
  Dataset out;
  out.id = ds.id;
  out.tagset = target;
  out.repaired_tags = ds.repaired_tags;
  out.documents = ds.documents;
  for (auto& doc : out.documents) {
    doc.id = id_prefix + doc.id;
    for (auto& s : doc.sentences)
      for (auto& t : s) t.tag = m[t.tag];
  }
  return out;
}

inline Dataset union_datasets(const Dataset& main, const std::vector<const Dataset*>& auxes) {
  std::set<std::string> types(main.tagset.types().begin(), main.tagset.types().end());
  for (const auto* a : auxes) types.insert(a->tagset.types().begin(), a->tagset.types().end());
  const TagSet tags(std::vector<std::string>(types.begin(), types.end()));
  Dataset out = relabel(main, tags);
  for (const auto* a : auxes) {
    Dataset r = relabel(*a, tags, a->id + "/");
    for (auto& d : r.documents) out.documents.push_back(std::move(d));
    out.repaired_tags += a->repaired_tags;
  }
  return out;
}

}  // namespace seqmtl
