#pragma once

// Corpus interchange format:
//
//   #doc <id>            starts a document
//   surface<TAB>tag      one token per line, tag is O, B-<type> or I-<type>
//   <blank line>         ends a sentence
//
// Type names match [a-z0-9_]+. Tokens appearing before any "#doc" line belong
// to an implicit document "doc0".

#include <cstddef>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "seqmtl/data/tagset.hpp"

namespace seqmtl {

struct Token {
  std::string surface;
  TagIndex tag = 0;
};

using Sentence = std::vector<Token>;

struct Document {
  std::string id;
  std::vector<Sentence> sentences;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
};

struct Dataset {
  std::string id;
  TagSet tagset;
  std::vector<Document> documents;
  /// Gold I-tags rewritten to B at parse time (I after O, sequence-initial I,
  /// or I of a different type than its predecessor).
  std::size_t repaired_tags = 0;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d.token_count();
    return n;
  }
};

inline std::size_t token_count(const std::vector<Document>& docs) {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.token_count();
  return n;
}

namespace detail {

inline std::string trim_cr(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

inline bool blank(const std::string& s) {
  return s.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace detail

inline Dataset parse_corpus(std::istream& in, std::string dataset_id = "dataset") {
  struct RawDoc {
    std::string id;
    std::vector<std::vector<std::pair<std::string, std::string>>> sentences;
  };
  std::vector<RawDoc> raw;
  std::set<std::string> types;
  std::unordered_set<std::string> seen_ids;
  std::vector<std::pair<std::string, std::string>> current;

  auto flush_sentence = [&] {
    if (current.empty()) return;
    if (raw.empty()) {
      raw.push_back({"doc0", {}});
      seen_ids.insert("doc0");
    }
    raw.back().sentences.push_back(std::move(current));
    current.clear();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim_cr(std::move(line));
    if (detail::blank(line)) {
      flush_sentence();
      continue;
    }
    if (line.rfind("#doc", 0) == 0 && (line.size() == 4 || line[4] == ' ' || line[4] == '\t')) {
      flush_sentence();
      std::string id = line.size() > 5 ? line.substr(5) : "";
      const auto first = id.find_first_not_of(" \t");
      id = first == std::string::npos ? "" : id.substr(first);
      if (id.empty()) id = "doc" + std::to_string(raw.size());
      if (!seen_ids.insert(id).second) {
        throw Error(ErrorKind::malformed_line, "line " + std::to_string(lineno) + ": duplicate document id '" + id + "'");
      }
      raw.push_back({id, {}});
      continue;
    }
    auto sep = line.rfind('\t');
    if (sep == std::string::npos) sep = line.rfind(' ');
    if (sep == std::string::npos || sep == 0 || sep + 1 >= line.size()) {
      throw Error(ErrorKind::malformed_line, "line " + std::to_string(lineno) + ": expected 'surface<TAB>tag'");
    }
    std::string surface = line.substr(0, sep);
    while (!surface.empty() && (surface.back() == ' ' || surface.back() == '\t')) surface.pop_back();
    if (surface.empty()) {
      throw Error(ErrorKind::malformed_line, "line " + std::to_string(lineno) + ": empty surface");
    }
    std::string tag = line.substr(sep + 1);
    const auto [bio, type] = split_tag(tag);
    if (bio != Bio::outside) types.insert(type);
    current.emplace_back(std::move(surface), std::move(tag));
  }
  flush_sentence();

  Dataset ds;
  ds.id = std::move(dataset_id);
  ds.tagset = TagSet(std::vector<std::string>(types.begin(), types.end()));
  for (auto& rd : raw) {
    Document doc{rd.id, {}};
    for (auto& rs : rd.sentences) {
      Sentence sent;
      sent.reserve(rs.size());
      TagIndex prev = TagSet::outside();
      bool first = true;
      for (auto& [surface, tag] : rs) {
        const auto [bio, type] = split_tag(tag);
        TagIndex idx = TagSet::outside();
        if (bio != Bio::outside) {
          const std::size_t t = *ds.tagset.type_index(type);
          idx = bio == Bio::begin ? ds.tagset.begin_of(t) : ds.tagset.inside_of(t);
          const bool ok = first ? TagSet::valid_start(idx) : TagSet::valid_transition(prev, idx);
          if (!ok) {
            idx = ds.tagset.begin_of(t);
            ++ds.repaired_tags;
          }
        }
        sent.push_back({std::move(surface), idx});
        prev = idx;
        first = false;
      }
      doc.sentences.push_back(std::move(sent));
    }
    if (!doc.sentences.empty()) ds.documents.push_back(std::move(doc));
  }
  return ds;
}

inline void write_corpus(std::ostream& out, const Dataset& ds) {
  for (const auto& doc : ds.documents) {
    out << "#doc " << doc.id << '\n';
    for (const auto& sent : doc.sentences) {
      for (const auto& tok : sent) out << tok.surface << '\t' << ds.tagset.name(tok.tag) << '\n';
      out << '\n';
    }
  }
}

}  // namespace seqmtl
