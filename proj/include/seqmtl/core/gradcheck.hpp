#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "seqmtl/core/graph.hpp"

namespace seqmtl {

/// Builds a scalar loss into a fresh graph from the current parameter values.
/// Must be deterministic (fixed dropout masks).
using LossBuilder = std::function<NodeRef(Graph&)>;

inline std::vector<Matrix> analytic_gradients(const LossBuilder& build,
                                              std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
  Graph g;
  const NodeRef root = build(g);
  g.forward(root);
  g.backward(root);
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (Parameter* p : params) out.push_back(p->grad);
  return out;
}

/// Central differences, one parameter entry at a time.
inline std::vector<Matrix> numeric_gradients(const LossBuilder& build,
                                             std::span<Parameter* const> params, double step) {
  auto loss = [&] {
    Graph g;
    return g.forward(build(g));
  };
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (Parameter* p : params) {
    Matrix grad(p->value.rows(), p->value.cols());
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double saved = p->value[k];
      p->value[k] = saved + step;
      const double up = loss();
      p->value[k] = saved - step;
      const double down = loss();
      p->value[k] = saved;
      grad[k] = (up - down) / (2.0 * step);
    }
    out.push_back(std::move(grad));
  }
  return out;
}

/// max |a - n| / max(1, |a|, |n|) over all entries.
inline double max_relative_error(std::span<const Matrix> analytic, std::span<const Matrix> numeric) {
  if (analytic.size() != numeric.size()) {
    throw Error(ErrorKind::shape_mismatch, "gradient lists differ in length");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (!analytic[i].same_shape(numeric[i])) {
      throw Error(ErrorKind::shape_mismatch, "gradient shapes differ");
    }
    for (std::size_t k = 0; k < analytic[i].size(); ++k) {
      const double a = analytic[i][k];
      const double n = numeric[i][k];
      const double denom = std::max({1.0, std::abs(a), std::abs(n)});
      worst = std::max(worst, std::abs(a - n) / denom);
    }
  }
  return worst;
}

inline double check_gradients(const LossBuilder& build, std::span<Parameter* const> params,
                              double step = 1e-5) {
  const auto analytic = analytic_gradients(build, params);
  const auto numeric = numeric_gradients(build, params, step);
  return max_relative_error(analytic, numeric);
}

}  // namespace seqmtl
