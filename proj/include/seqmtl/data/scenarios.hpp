#pragma once

// Sparsity scenarios: a fixed dev/test split plus nested training subsets of
// decreasing size, all built from whole documents.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqmtl/core/random.hpp"
#include "seqmtl/data/corpus.hpp"

namespace seqmtl {

struct ScenarioSizes {
  std::size_t train = 21000;
  std::size_t dev = 9000;
  std::size_t test_min = 5000;
  /// Smaller training sizes drawn from the largest one, descending.
  std::vector<std::size_t> subsets{12000, 6000, 1000};
};

inline std::string size_label(std::size_t k) {
  if (k % 1000 == 0) return std::to_string(k / 1000) + "K";
  return std::to_string(k);
}

inline std::size_t parse_size_label(const std::string& s) {
  if (!s.empty() && (s.back() == 'K' || s.back() == 'k')) {
    return static_cast<std::size_t>(std::stoul(s.substr(0, s.size() - 1))) * 1000;
  }
  return static_cast<std::size_t>(std::stoul(s));
}

struct SparsityScenario {
  std::string dataset;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;
};

/// Scenarios keyed by training size k; dev and test are shared.
using ScenarioSet = std::map<std::size_t, SparsityScenario>;

/// Number of leading documents (in `order`) needed to reach `threshold` tokens.
inline std::size_t take_until(const std::vector<const Document*>& order, std::size_t threshold,
                              std::size_t from = 0) {
  std::size_t tokens = 0;
  std::size_t i = from;
  while (i < order.size() && tokens < threshold) tokens += order[i++]->token_count();
  if (tokens < threshold) return std::string::npos;
  return i - from;
}

inline ScenarioSet build_scenarios(const Dataset& ds, std::uint64_t seed, const ScenarioSizes& sizes = {}) {
  const std::size_t needed = sizes.train + sizes.dev + sizes.test_min;
  if (ds.token_count() < needed) {
    throw Error(ErrorKind::insufficient_data, "dataset '" + ds.id + "' has " + std::to_string(ds.token_count()) +
                                                  " tokens, needs at least " + std::to_string(needed));
  }
  std::vector<const Document*> order;
  for (const auto& d : ds.documents) order.push_back(&d);
  Rng rng(derive_seed(seed, "split"));
  shuffle(order, rng);

  const std::size_t n_train = take_until(order, sizes.train);
  const std::size_t n_dev = n_train == std::string::npos ? n_train : take_until(order, sizes.dev, n_train);
  if (n_train == std::string::npos || n_dev == std::string::npos) {
    throw Error(ErrorKind::insufficient_data, "dataset '" + ds.id + "' cannot fill train and dev splits");
  }
  std::vector<const Document*> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<const Document*> dev(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                   order.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev));
  std::vector<const Document*> test(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev), order.end());
  std::size_t test_tokens = 0;
  for (auto* d : test) test_tokens += d->token_count();
  if (test_tokens < sizes.test_min) {
    throw Error(ErrorKind::insufficient_data, "dataset '" + ds.id + "' leaves only " + std::to_string(test_tokens) +
                                                  " test tokens");
  }

  auto copy = [](const std::vector<const Document*>& src) {
    std::vector<Document> out;
    out.reserve(src.size());
    for (auto* d : src) out.push_back(*d);
    return out;
  };

  ScenarioSet out;
  auto add = [&](std::size_t k, const std::vector<const Document*>& docs) {
    SparsityScenario sc;
    sc.dataset = ds.id;
    sc.k = k;
    sc.seed = seed;
    sc.train = copy(docs);
    sc.dev = copy(dev);
    sc.test = copy(test);
    out.emplace(k, std::move(sc));
  };
  add(sizes.train, train);

  // Smaller sizes are prefixes of one reshuffle of the largest training set.
  std::vector<const Document*> sub_order = train;
  Rng sub_rng(derive_seed(seed, "subsets"));
  shuffle(sub_order, sub_rng);
  for (std::size_t k : sizes.subsets) {
    const std::size_t n = take_until(sub_order, k);
    if (n == std::string::npos) {
      throw Error(ErrorKind::insufficient_data, "training split too small for " + size_label(k));
    }
    add(k, std::vector<const Document*>(sub_order.begin(), sub_order.begin() + static_cast<std::ptrdiff_t>(n)));
  }
  return out;
}

inline std::uint64_t dataset_hash(const Dataset& ds) {
  std::string buf;
  for (const auto& doc : ds.documents) {
    buf += doc.id;
    buf += '\n';
    for (const auto& s : doc.sentences) {
      for (const auto& t : s) {
        buf += t.surface;
        buf += '\t';
        buf += ds.tagset.name(t.tag);
        buf += '\n';
      }
      buf += '\n';
    }
  }
  return fnv1a(buf);
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

inline nlohmann::json scenario_manifest(const SparsityScenario& sc, std::uint64_t corpus_hash) {
  auto ids = [](const std::vector<Document>& docs) {
    std::vector<std::string> v;
    for (const auto& d : docs) v.push_back(d.id);
    return v;
  };
  nlohmann::json j;
  j["dataset"] = sc.dataset;
  j["corpus_hash"] = hex64(corpus_hash);
  j["seed"] = sc.seed;
  j["k"] = sc.k;
  j["k_label"] = size_label(sc.k);
  j["train"] = ids(sc.train);
  j["dev"] = ids(sc.dev);
  j["test"] = ids(sc.test);
  j["train_tokens"] = token_count(sc.train);
  j["dev_tokens"] = token_count(sc.dev);
  j["test_tokens"] = token_count(sc.test);
  return j;
}

/// Rebuilds a scenario from its manifest against the loaded dataset.
inline SparsityScenario scenario_from_manifest(const Dataset& ds, const nlohmann::json& j) {
  if (j.at("dataset").get<std::string>() != ds.id) {
    throw Error(ErrorKind::config, "manifest is for dataset '" + j.at("dataset").get<std::string>() + "'");
  }
  if (j.contains("corpus_hash") && j.at("corpus_hash").get<std::string>() != hex64(dataset_hash(ds))) {
    throw Error(ErrorKind::insufficient_data, "corpus for '" + ds.id + "' changed since the manifest was written");
  }
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : ds.documents) by_id.emplace(d.id, &d);
  auto resolve = [&](const nlohmann::json& list) {
    std::vector<Document> out;
    for (const auto& id : list) {
      auto it = by_id.find(id.get<std::string>());
      if (it == by_id.end()) throw Error(ErrorKind::insufficient_data, "document '" + id.get<std::string>() + "' missing");
      out.push_back(*it->second);
    }
    return out;
  };
  SparsityScenario sc;
  sc.dataset = ds.id;
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.k = j.at("k").get<std::size_t>();
  sc.train = resolve(j.at("train"));
  sc.dev = resolve(j.at("dev"));
  sc.test = resolve(j.at("test"));
  return sc;
}

}  // namespace seqmtl
