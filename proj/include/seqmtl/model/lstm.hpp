#pragma once

// Shared bidirectional LSTM trunk with variational dropout.
//
// Cell (no peepholes), row-vector convention x_t: 1 x d, h_t: 1 x H:
//   i = sigmoid(x Wi + h Ui + bi)     f = sigmoid(x Wf + h Uf + bf)
//   o = sigmoid(x Wo + h Uo + bo)     g = tanh(x Wg + h Ug + bg)
//   c_t = f * c_{t-1} + i * g         h_t = o * tanh(c_t)
// x is multiplied by the input mask and h_{t-1} by the recurrent mask; both
// masks are drawn once per sequence and reused at every step.

#include <cmath>
#include <string>
#include <vector>

#include "seqmtl/core/graph.hpp"
#include "seqmtl/core/random.hpp"

namespace seqmtl {

inline Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (auto& v : m.data()) v = uniform_real(rng, -r, r);
  return m;
}

struct LstmDirection {
  Parameter wi, wf, wo, wg;
  Parameter ui, uf, uo, ug;
  Parameter bi, bf, bo, bg;

  LstmDirection() = default;
  LstmDirection(const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng)
      : wi(prefix + ".wi", glorot_uniform(in, hidden, rng)),
        wf(prefix + ".wf", glorot_uniform(in, hidden, rng)),
        wo(prefix + ".wo", glorot_uniform(in, hidden, rng)),
        wg(prefix + ".wg", glorot_uniform(in, hidden, rng)),
        ui(prefix + ".ui", glorot_uniform(hidden, hidden, rng)),
        uf(prefix + ".uf", glorot_uniform(hidden, hidden, rng)),
        uo(prefix + ".uo", glorot_uniform(hidden, hidden, rng)),
        ug(prefix + ".ug", glorot_uniform(hidden, hidden, rng)),
        bi(prefix + ".bi", Matrix(1, hidden)),
        bf(prefix + ".bf", Matrix(1, hidden, 1.0)),
        bo(prefix + ".bo", Matrix(1, hidden)),
        bg(prefix + ".bg", Matrix(1, hidden)) {}

  std::size_t input_size() const { return wi.value.rows(); }
  std::size_t hidden_size() const { return wi.value.cols(); }

  std::vector<Parameter*> parameters() { return {&wi, &wf, &wo, &wg, &ui, &uf, &uo, &ug, &bi, &bf, &bo, &bg}; }
};

struct BiLstmLayer {
  LstmDirection forward;
  LstmDirection backward;

  BiLstmLayer() = default;
  BiLstmLayer(const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng)
      : forward(prefix + ".fwd", in, hidden, rng), backward(prefix + ".bwd", in, hidden, rng) {}

  std::size_t output_size() const { return 2 * forward.hidden_size(); }

  std::vector<Parameter*> parameters() {
    auto p = forward.parameters();
    for (auto* q : backward.parameters()) p.push_back(q);
    return p;
  }
};

struct DirectionMasks {
  Matrix input;      // 1 x in
  Matrix recurrent;  // 1 x H
};

struct LayerMasks {
  DirectionMasks forward;
  DirectionMasks backward;
};

using MaskSet = std::vector<LayerMasks>;

struct LayerShape {
  std::size_t input = 0;
  std::size_t hidden = 0;
};

/// Entries are 0 or 1/(1-rate) (inverted dropout); all ones when not training.
inline Matrix bernoulli_mask(std::size_t n, double rate, Rng& rng, bool training) {
  Matrix m(1, n, 1.0);
  if (!training || rate <= 0.0) return m;
  if (rate >= 1.0) throw Error(ErrorKind::config, "dropout rate must be below 1");
  const double keep = 1.0 - rate;
  for (auto& v : m.data()) v = uniform_unit(rng) < keep ? 1.0 / keep : 0.0;
  return m;
}

inline MaskSet make_variational_masks(const std::vector<LayerShape>& dims, double input_rate,
                                      double recurrent_rate, Rng& rng, bool training) {
  MaskSet out;
  out.reserve(dims.size());
  for (const auto& d : dims) {
    LayerMasks lm;
    lm.forward.input = bernoulli_mask(d.input, input_rate, rng, training);
    lm.forward.recurrent = bernoulli_mask(d.hidden, recurrent_rate, rng, training);
    lm.backward.input = bernoulli_mask(d.input, input_rate, rng, training);
    lm.backward.recurrent = bernoulli_mask(d.hidden, recurrent_rate, rng, training);
    out.push_back(std::move(lm));
  }
  return out;
}

namespace detail {

struct DirectionNodes {
  NodeRef wi, wf, wo, wg, ui, uf, uo, ug, bi, bf, bo, bg;
};

inline DirectionNodes bind(Graph& g, LstmDirection& d) {
  return {g.parameter(d.wi), g.parameter(d.wf), g.parameter(d.wo), g.parameter(d.wg),
          g.parameter(d.ui), g.parameter(d.uf), g.parameter(d.uo), g.parameter(d.ug),
          g.parameter(d.bi), g.parameter(d.bf), g.parameter(d.bo), g.parameter(d.bg)};
}

inline std::vector<NodeRef> run_direction(Graph& g, LstmDirection& dir, const std::vector<NodeRef>& xs,
                                          const DirectionMasks& masks, bool reverse) {
  const auto p = bind(g, dir);
  const std::size_t hidden = dir.hidden_size();
  const std::size_t n = xs.size();
  std::vector<NodeRef> hs(n);
  NodeRef h = g.input(Matrix(1, hidden));
  NodeRef c = g.input(Matrix(1, hidden));
  auto gate = [&](NodeRef x, NodeRef hd, NodeRef w, NodeRef u, NodeRef b) {
    return g.add(g.add(g.matmul(x, w), g.matmul(hd, u)), b);
  };
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    const NodeRef x = g.dropout(xs[t], masks.input);
    const NodeRef hd = g.dropout(h, masks.recurrent);
    const NodeRef i = g.sigmoid(gate(x, hd, p.wi, p.ui, p.bi));
    const NodeRef f = g.sigmoid(gate(x, hd, p.wf, p.uf, p.bf));
    const NodeRef o = g.sigmoid(gate(x, hd, p.wo, p.uo, p.bo));
    const NodeRef cand = g.tanh(gate(x, hd, p.wg, p.ug, p.bg));
    c = g.add(g.hadamard(f, c), g.hadamard(i, cand));
    h = g.hadamard(o, g.tanh(c));
    hs[t] = h;
  }
  return hs;
}

}  // namespace detail

/// One BiLSTM layer over per-token row nodes; returns rows of width 2H
/// (forward state then backward state).
inline std::vector<NodeRef> bilstm_layer(Graph& g, BiLstmLayer& layer, const std::vector<NodeRef>& xs,
                                         const LayerMasks& masks) {
  const auto fwd = detail::run_direction(g, layer.forward, xs, masks.forward, false);
  const auto bwd = detail::run_direction(g, layer.backward, xs, masks.backward, true);
  std::vector<NodeRef> out(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) out[t] = g.concat_cols(fwd[t], bwd[t]);
  return out;
}

inline std::vector<NodeRef> bilstm_forward(Graph& g, std::vector<BiLstmLayer>& layers, std::vector<NodeRef> xs,
                                           const MaskSet& masks) {
  if (xs.empty()) throw Error(ErrorKind::shape_mismatch, "BiLSTM needs at least one token");
  if (masks.size() != layers.size()) throw Error(ErrorKind::shape_mismatch, "one mask set per layer required");
  for (std::size_t l = 0; l < layers.size(); ++l) xs = bilstm_layer(g, layers[l], xs, masks[l]);
  return xs;
}

/// Matrix-in, matrix-out convenience: inputs L x d -> L x 2H.
inline Matrix bilstm_forward(const Matrix& inputs, std::vector<BiLstmLayer>& layers, const MaskSet& masks) {
  if (inputs.rows() == 0) throw Error(ErrorKind::shape_mismatch, "BiLSTM needs at least one token");
  if (!layers.empty() && inputs.cols() != layers.front().forward.input_size()) {
    throw Error(ErrorKind::shape_mismatch, "input width " + std::to_string(inputs.cols()) + " vs layer input " +
                                               std::to_string(layers.front().forward.input_size()));
  }
  Graph g;
  const NodeRef x = g.input(inputs);
  std::vector<NodeRef> rows;
  for (std::size_t t = 0; t < inputs.rows(); ++t) rows.push_back(g.row_select(x, t));
  const auto out = bilstm_forward(g, layers, rows, masks);
  Matrix m(inputs.rows(), g.evaluate(out[0]).cols());
  for (std::size_t t = 0; t < out.size(); ++t) {
    const Matrix& r = g.evaluate(out[t]);
    for (std::size_t c = 0; c < r.cols(); ++c) m(t, c) = r(0, c);
  }
  return m;
}

}  // namespace seqmtl
