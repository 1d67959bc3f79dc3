#pragma once

// Nadam: Adam with Nesterov momentum and the warming momentum schedule
//   mu_t = beta1 * (1 - 0.5 * 0.96^(t * psi)).
//
// For each parameter with gradient g at step t:
//   g'  = g / (1 - prod_{i<=t} mu_i)
//   m   = beta1 m + (1 - beta1) g,        m' = m / (1 - prod_{i<=t+1} mu_i)
//   v   = beta2 v + (1 - beta2) g^2,      v' = v / (1 - beta2^t)
//   m_bar = (1 - mu_t) g' + mu_{t+1} m'
//   theta -= lr * m_bar / (sqrt(v') + eps)

#include <cmath>
#include <span>
#include <unordered_map>

#include "seqmtl/core/graph.hpp"

namespace seqmtl {

struct NadamOptions {
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double schedule_decay = 0.004;
};

/// Per-parameter optimizer state.
struct NadamState {
  std::size_t step = 0;
  Matrix m;
  Matrix v;
  double momentum_product = 1.0;
};

class Nadam {
 public:
  Nadam() = default;
  explicit Nadam(NadamOptions opts) : opts_(opts) {}

  const NadamOptions& options() const noexcept { return opts_; }

  /// Applies one update from each parameter's accumulated grad. Throws
  /// non-finite-gradient without touching any parameter.
  void step(std::span<Parameter* const> params) {
    for (const Parameter* p : params) {
      if (!p->grad.all_finite()) throw Error(ErrorKind::non_finite_gradient, "gradient of " + p->name);
      if (!p->grad.same_shape(p->value)) throw Error(ErrorKind::shape_mismatch, "gradient shape of " + p->name);
    }
    for (Parameter* p : params) update(*p, state_for(*p));
  }

  NadamState& state_for(const Parameter& p) {
    auto [it, inserted] = states_.try_emplace(&p);
    if (inserted) {
      it->second.m = Matrix(p.value.rows(), p.value.cols());
      it->second.v = Matrix(p.value.rows(), p.value.cols());
    }
    return it->second;
  }

 private:
  NadamOptions opts_;
  std::unordered_map<const Parameter*, NadamState> states_;

  double mu(std::size_t t) const {
    return opts_.beta1 * (1.0 - 0.5 * std::pow(0.96, static_cast<double>(t) * opts_.schedule_decay));
  }

  void update(Parameter& p, NadamState& s) {
    const std::size_t t = ++s.step;
    const double mu_t = mu(t);
    const double mu_next = mu(t + 1);
    const double prod_t = s.momentum_product * mu_t;
    const double prod_next = prod_t * mu_next;
    s.momentum_product = prod_t;
    const double b1 = opts_.beta1;
    const double b2 = opts_.beta2;
    const double v_corr = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      const double g_hat = g / (1.0 - prod_t);
      s.m[k] = b1 * s.m[k] + (1.0 - b1) * g;
      const double m_hat = s.m[k] / (1.0 - prod_next);
      s.v[k] = b2 * s.v[k] + (1.0 - b2) * g * g;
      const double v_hat = s.v[k] / v_corr;
      const double m_bar = (1.0 - mu_t) * g_hat + mu_next * m_hat;
      p.value[k] -= opts_.learning_rate * m_bar / (std::sqrt(v_hat) + opts_.epsilon);
    }
  }
};

/// Rescales all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
inline double clip_global_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad.data()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm) {
    const double s = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad.data()) g *= s;
  }
  return norm;
}

}  // namespace seqmtl
