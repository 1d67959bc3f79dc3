#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqmtl/core/random.hpp"
#include "seqmtl/model/config.hpp"

namespace seqmtl {

/// Random hyperparameter search space: one layer of 50/100/150 units or two
/// layers of 100, dropout rates uniform in [0.2, 0.5].
struct SearchSpace {
  std::vector<std::vector<std::size_t>> layouts{{50}, {100}, {150}, {100, 100}};
  double dropout_min = 0.2;
  double dropout_max = 0.5;
  std::vector<std::string> embeddings{"glove", "komninos"};
  std::size_t runs_per_embedding = 50;
};

/// `run_index` selects the embedding family: runs [0, n) use the first id,
/// [n, 2n) the second, and so on, cycling.
inline ModelConfig sample_config(const SearchSpace& space, Rng& rng, std::size_t run_index = 0) {
  if (space.layouts.empty() || space.embeddings.empty()) throw Error(ErrorKind::config, "empty search space");
  ModelConfig c;
  c.layers = space.layouts[uniform_index(rng, space.layouts.size())];
  c.input_dropout = uniform_real(rng, space.dropout_min, space.dropout_max);
  c.recurrent_dropout = uniform_real(rng, space.dropout_min, space.dropout_max);
  const std::size_t per = std::max<std::size_t>(1, space.runs_per_embedding);
  c.embedding = space.embeddings[(run_index / per) % space.embeddings.size()];
  c.seed = rng();
  return c;
}

inline void to_json(nlohmann::json& j, const SearchSpace& s) {
  j = nlohmann::json{{"layouts", s.layouts},
                     {"dropout_min", s.dropout_min},
                     {"dropout_max", s.dropout_max},
                     {"embeddings", s.embeddings},
                     {"runs_per_embedding", s.runs_per_embedding}};
}

inline void from_json(const nlohmann::json& j, SearchSpace& s) {
  if (j.contains("layouts")) j.at("layouts").get_to(s.layouts);
  if (j.contains("dropout_min")) j.at("dropout_min").get_to(s.dropout_min);
  if (j.contains("dropout_max")) j.at("dropout_max").get_to(s.dropout_max);
  if (j.contains("embeddings")) j.at("embeddings").get_to(s.embeddings);
  if (j.contains("runs_per_embedding")) j.at("runs_per_embedding").get_to(s.runs_per_embedding);
}

}  // namespace seqmtl
