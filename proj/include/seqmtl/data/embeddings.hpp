#pragma once

// Word vectors in the common text format: "word v1 v2 ... vd" per line, with
// an optional "count dim" header line.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqmtl/core/random.hpp"
#include "seqmtl/data/corpus.hpp"

namespace seqmtl {

inline std::string ascii_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim), unknown_(dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }

  bool contains(const std::string& word) const { return vectors_.contains(word); }

  /// Only the first insertion of a word is kept.
  bool insert(const std::string& word, std::vector<double> v) {
    if (v.size() != dim_) throw Error(ErrorKind::ragged_dimension, "vector for '" + word + "' has wrong length");
    return vectors_.emplace(word, std::move(v)).second;
  }

  const std::vector<double>& unknown() const noexcept { return unknown_; }
  void set_unknown(std::vector<double> v) {
    if (v.size() != dim_) throw Error(ErrorKind::ragged_dimension, "unknown vector has wrong length");
    unknown_ = std::move(v);
  }

  /// Exact match, then lowercase, then the unknown vector.
  const std::vector<double>& lookup(const std::string& word) const {
    if (auto it = vectors_.find(word); it != vectors_.end()) return it->second;
    if (auto it = vectors_.find(ascii_lower(word)); it != vectors_.end()) return it->second;
    return unknown_;
  }

  bool covers(const std::string& word) const {
    return vectors_.contains(word) || vectors_.contains(ascii_lower(word));
  }

  void set_unknown_to_mean() {
    std::vector<double> mean(dim_, 0.0);
    if (vectors_.empty()) {
      unknown_ = mean;
      return;
    }
    // Sum in sorted-key order so the mean is bit-reproducible.
    std::vector<const std::string*> keys;
    keys.reserve(vectors_.size());
    for (const auto& [w, _] : vectors_) keys.push_back(&w);
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
    for (const auto* k : keys) {
      const auto& v = vectors_.at(*k);
      for (std::size_t i = 0; i < dim_; ++i) mean[i] += v[i];
    }
    for (auto& m : mean) m /= static_cast<double>(vectors_.size());
    unknown_ = std::move(mean);
  }

  /// Deterministic random vectors for a vocabulary; used when no pretrained
  /// vectors are configured (synthetic corpora, tests).
  static EmbeddingTable random(const std::set<std::string>& vocab, std::size_t dim, std::uint64_t seed) {
    EmbeddingTable t(dim);
    Rng rng(seed);
    const double r = std::sqrt(3.0 / static_cast<double>(dim));
    for (const auto& w : vocab) {
      std::vector<double> v(dim);
      for (auto& x : v) x = uniform_real(rng, -r, r);
      t.insert(w, std::move(v));
    }
    t.set_unknown_to_mean();
    return t;
  }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::vector<double> unknown_;
};

inline std::set<std::string> collect_vocab(const Dataset& ds) {
  std::set<std::string> v;
  for (const auto& d : ds.documents)
    for (const auto& s : d.sentences)
      for (const auto& t : s) v.insert(t.surface);
  return v;
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string f;
  while (is >> f) out.push_back(std::move(f));
  return out;
}

inline bool is_uint(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace detail

/// Keeps only words of `vocab` (exact or lowercased form). The unknown vector
/// is the mean of the retained vectors. Fails when fewer than `min_coverage`
/// of the vocabulary is covered.
inline EmbeddingTable load_embeddings(std::istream& in, const std::set<std::string>& vocab,
                                      double min_coverage = 0.3) {
  std::set<std::string> wanted;
  for (const auto& w : vocab) {
    wanted.insert(w);
    wanted.insert(ascii_lower(w));
  }
  EmbeddingTable table;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2 && detail::is_uint(fields[0]) && detail::is_uint(fields[1])) {
      continue;  // "count dim" header
    }
    if (fields.size() < 2) {
      throw Error(ErrorKind::ragged_dimension, "line " + std::to_string(lineno) + " has no vector");
    }
    const std::size_t d = fields.size() - 1;
    if (dim == 0) {
      dim = d;
      table = EmbeddingTable(dim);
    } else if (d != dim) {
      throw Error(ErrorKind::ragged_dimension, "line " + std::to_string(lineno) + ": expected " +
                                                   std::to_string(dim) + " values, got " + std::to_string(d));
    }
    if (!wanted.contains(fields[0]) || table.contains(fields[0])) continue;
    std::vector<double> v(d);
    for (std::size_t i = 0; i < d; ++i) {
      try {
        v[i] = std::stod(fields[i + 1]);
      } catch (const std::exception&) {
        throw Error(ErrorKind::malformed_line, "line " + std::to_string(lineno) + ": bad number");
      }
    }
    table.insert(fields[0], std::move(v));
  }
  std::size_t covered = 0;
  for (const auto& w : vocab) covered += table.covers(w) ? 1 : 0;
  const double coverage = vocab.empty() ? 1.0 : static_cast<double>(covered) / static_cast<double>(vocab.size());
  if (coverage < min_coverage || table.empty()) {
    throw Error(ErrorKind::insufficient_coverage,
                "embeddings cover " + std::to_string(covered) + " of " + std::to_string(vocab.size()) + " words");
  }
  table.set_unknown_to_mean();
  return table;
}

}  // namespace seqmtl
