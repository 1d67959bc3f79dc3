#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace seqmtl {

struct ModelConfig {
  /// Hidden units per direction for each shared BiLSTM layer.
  std::vector<std::size_t> layers{100};
  double input_dropout = 0.25;
  double recurrent_dropout = 0.25;
  std::string embedding = "random";
  std::uint64_t seed = 1;

  bool operator==(const ModelConfig&) const = default;

  std::string layout() const {
    std::string s;
    for (std::size_t i = 0; i < layers.size(); ++i) s += (i ? "x" : "") + std::to_string(layers[i]);
    return s;
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"layers", c.layers},
                     {"input_dropout", c.input_dropout},
                     {"recurrent_dropout", c.recurrent_dropout},
                     {"embedding", c.embedding},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("layers").get_to(c.layers);
  j.at("input_dropout").get_to(c.input_dropout);
  j.at("recurrent_dropout").get_to(c.recurrent_dropout);
  j.at("embedding").get_to(c.embedding);
  j.at("seed").get_to(c.seed);
}

}  // namespace seqmtl
