#pragma once

// Hard parameter sharing: one BiLSTM trunk, one projection + CRF head per task.
// Every head reads the top trunk layer.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "seqmtl/data/embeddings.hpp"
#include "seqmtl/model/config.hpp"
#include "seqmtl/model/crf.hpp"
#include "seqmtl/model/lstm.hpp"

namespace seqmtl {

/// Frozen lookup, row i = vector of token i.
inline Matrix embed(std::span<const std::string> tokens, const EmbeddingTable& table) {
  Matrix m(tokens.size(), table.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& v = table.lookup(tokens[i]);
    for (std::size_t c = 0; c < v.size(); ++c) m(i, c) = v[c];
  }
  return m;
}

inline Matrix embed(const Sentence& sentence, const EmbeddingTable& table) {
  std::vector<std::string> words;
  words.reserve(sentence.size());
  for (const auto& t : sentence) words.push_back(t.surface);
  return embed(words, table);
}

inline std::vector<TagIndex> gold_tags(const Sentence& sentence) {
  std::vector<TagIndex> y;
  y.reserve(sentence.size());
  for (const auto& t : sentence) y.push_back(t.tag);
  return y;
}

struct TaskHead {
  TagSet tags;
  Parameter projection;  // 2H x K
  Parameter bias;        // 1 x K
  CrfParams crf;

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> p{&projection, &bias};
    for (auto* q : crf.parameters()) p.push_back(q);
    return p;
  }
};

class TaskModel {
 public:
  TaskModel() = default;
  TaskModel(ModelConfig config, std::size_t input_dim) : config_(std::move(config)), input_dim_(input_dim) {
    if (config_.layers.empty()) throw Error(ErrorKind::config, "model needs at least one BiLSTM layer");
    Rng rng(derive_seed(config_.seed, "trunk"));
    std::size_t in = input_dim_;
    for (std::size_t l = 0; l < config_.layers.size(); ++l) {
      layers_.emplace_back("layer" + std::to_string(l), in, config_.layers[l], rng);
      in = layers_.back().output_size();
    }
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const { return layers_.back().output_size(); }
  std::vector<BiLstmLayer>& layers() noexcept { return layers_; }

  void add_task(const std::string& id, const TagSet& tags) {
    if (heads_.contains(id)) throw Error(ErrorKind::config, "duplicate task '" + id + "'");
    Rng rng(derive_seed(config_.seed, "head:" + id));
    const std::size_t k = tags.size();
    TaskHead h{tags, Parameter("head." + id + ".projection", glorot_uniform(output_dim(), k, rng)),
               Parameter("head." + id + ".bias", Matrix(1, k)), CrfParams("head." + id + ".crf", k)};
    heads_.emplace(id, std::move(h));
  }

  bool has_task(const std::string& id) const { return heads_.contains(id); }
  TaskHead& head(const std::string& id) {
    auto it = heads_.find(id);
    if (it == heads_.end()) throw Error(ErrorKind::config, "unknown task '" + id + "'");
    return it->second;
  }
  const std::map<std::string, TaskHead>& heads() const noexcept { return heads_; }

  std::vector<LayerShape> layer_shapes() const {
    std::vector<LayerShape> s;
    for (const auto& l : layers_) s.push_back({l.forward.input_size(), l.forward.hidden_size()});
    return s;
  }

  MaskSet masks(Rng& rng, bool training) const {
    return make_variational_masks(layer_shapes(), config_.input_dropout, config_.recurrent_dropout, rng, training);
  }

  std::vector<Parameter*> trunk_parameters() {
    std::vector<Parameter*> p;
    for (auto& l : layers_)
      for (auto* q : l.parameters()) p.push_back(q);
    return p;
  }

  std::vector<Parameter*> head_parameters(const std::string& task) { return head(task).parameters(); }

  /// Trunk first, then heads in task-id order.
  std::vector<Parameter*> parameters() {
    auto p = trunk_parameters();
    for (auto& [id, h] : heads_)
      for (auto* q : h.parameters()) p.push_back(q);
    return p;
  }

  /// Emission rows (1 x K) for every token of an embedded sentence.
  std::vector<NodeRef> emissions(Graph& g, const Matrix& embedded, const std::string& task, const MaskSet& masks) {
    TaskHead& h = head(task);
    const NodeRef x = g.input(embedded);
    std::vector<NodeRef> rows;
    rows.reserve(embedded.rows());
    for (std::size_t t = 0; t < embedded.rows(); ++t) rows.push_back(g.row_select(x, t));
    const auto top = bilstm_forward(g, layers_, std::move(rows), masks);
    const NodeRef proj = g.parameter(h.projection);
    const NodeRef bias = g.parameter(h.bias);
    std::vector<NodeRef> out;
    out.reserve(top.size());
    for (const NodeRef r : top) out.push_back(g.add(g.matmul(r, proj), bias));
    return out;
  }

  NodeRef loss(Graph& g, const Matrix& embedded, std::span<const TagIndex> gold, const std::string& task,
               const MaskSet& masks) {
    const auto e = emissions(g, embedded, task, masks);
    TaskHead& h = head(task);
    return crf_nll(g, e, bind(g, h.crf), gold, h.tags.size());
  }

  std::vector<TagIndex> predict(const Matrix& embedded, const std::string& task) {
    Graph g;
    Rng unused(0);
    const auto e = emissions(g, embedded, task, masks(unused, false));
    TaskHead& h = head(task);
    Matrix em(embedded.rows(), h.tags.size());
    for (std::size_t t = 0; t < e.size(); ++t) {
      const Matrix& row = g.evaluate(e[t]);
      for (std::size_t c = 0; c < row.cols(); ++c) em(t, c) = row(0, c);
    }
    return crf_viterbi(em, h.crf);
  }

  std::vector<Matrix> snapshot() {
    std::vector<Matrix> v;
    for (auto* p : parameters()) v.push_back(p->value);
    return v;
  }

  void restore(const std::vector<Matrix>& values) {
    auto params = parameters();
    if (params.size() != values.size()) throw Error(ErrorKind::shape_mismatch, "snapshot size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!params[i]->value.same_shape(values[i])) throw Error(ErrorKind::shape_mismatch, "snapshot shape mismatch");
      params[i]->value = values[i];
    }
  }

 private:
  ModelConfig config_;
  std::size_t input_dim_ = 0;
  std::vector<BiLstmLayer> layers_;
  std::map<std::string, TaskHead> heads_;
};

}  // namespace seqmtl
