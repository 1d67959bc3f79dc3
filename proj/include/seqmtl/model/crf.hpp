#pragma once

// Linear-chain CRF with explicit start and end scores.
//
//   score(y) = start[y_1] + sum_t emit[t, y_t] + sum_t trans[y_t, y_{t+1}] + end[y_L]
//   NLL(y)   = logZ - score(y)

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "seqmtl/core/graph.hpp"
#include "seqmtl/data/tagset.hpp"

namespace seqmtl {

/// Transition, start and end scores of one task's CRF.
struct CrfParams {
  Parameter transitions;  // K x K, [from, to]
  Parameter start;        // 1 x K
  Parameter end;          // 1 x K

  CrfParams() = default;
  CrfParams(const std::string& prefix, std::size_t k)
      : transitions(prefix + ".transitions", Matrix(k, k)),
        start(prefix + ".start", Matrix(1, k)),
        end(prefix + ".end", Matrix(1, k)) {}

  std::size_t tags() const { return start.value.cols(); }
  std::vector<Parameter*> parameters() { return {&transitions, &start, &end}; }
};

struct CrfNodes {
  NodeRef transitions;
  NodeRef start;
  NodeRef end;
};

inline CrfNodes bind(Graph& g, CrfParams& p) {
  return {g.parameter(p.transitions), g.parameter(p.start), g.parameter(p.end)};
}

/// Negative log-likelihood of `gold` given per-token emission rows (1 x K each).
inline NodeRef crf_nll(Graph& g, const std::vector<NodeRef>& emissions, const CrfNodes& crf,
                       std::span<const TagIndex> gold, std::size_t k) {
  if (emissions.empty() || gold.size() != emissions.size()) {
    throw Error(ErrorKind::shape_mismatch, "gold length must equal the number of emission rows");
  }
  for (TagIndex y : gold) {
    if (y >= k) throw Error(ErrorKind::index_out_of_range, "gold tag " + std::to_string(y) + " >= " + std::to_string(k));
  }
  // alpha_t[j] = e_t[j] + logsumexp_i(alpha_{t-1}[i] + trans[i, j]).
  // ones(K x 1) * alpha lays alpha along every row j, so adding trans^T and a
  // row-wise logsumexp yields the recursion for all j at once.
  const NodeRef trans_t = g.transpose(crf.transitions);
  const NodeRef ones = g.input(Matrix(k, 1, 1.0));
  NodeRef alpha = g.add(crf.start, emissions[0]);
  for (std::size_t t = 1; t < emissions.size(); ++t) {
    const NodeRef spread = g.add(g.matmul(ones, alpha), trans_t);
    alpha = g.add(g.transpose(g.logsumexp_row(spread)), emissions[t]);
  }
  const NodeRef log_z = g.logsumexp_row(g.add(alpha, crf.end));

  NodeRef score = g.add(g.pick(crf.start, 0, gold[0]), g.pick(emissions[0], 0, gold[0]));
  for (std::size_t t = 1; t < gold.size(); ++t) {
    score = g.add(score, g.pick(emissions[t], 0, gold[t]));
    score = g.add(score, g.pick(crf.transitions, gold[t - 1], gold[t]));
  }
  score = g.add(score, g.pick(crf.end, 0, gold.back()));
  return g.sub(log_z, score);
}

/// Value-only NLL for an L x K emission matrix.
inline double crf_log_likelihood(const Matrix& emissions, CrfParams& crf, std::span<const TagIndex> gold) {
  if (emissions.cols() != crf.tags()) throw Error(ErrorKind::shape_mismatch, "emission width != tag count");
  Graph g;
  const NodeRef e = g.input(emissions);
  std::vector<NodeRef> rows;
  for (std::size_t t = 0; t < emissions.rows(); ++t) rows.push_back(g.row_select(e, t));
  return g.forward(crf_nll(g, rows, bind(g, crf), gold, crf.tags()));
}

inline double path_score(const Matrix& emissions, const CrfParams& crf, std::span<const TagIndex> path) {
  double s = crf.start.value(0, path[0]) + crf.end.value(0, path.back());
  for (std::size_t t = 0; t < path.size(); ++t) s += emissions(t, path[t]);
  for (std::size_t t = 1; t < path.size(); ++t) s += crf.transitions.value(path[t - 1], path[t]);
  return s;
}

/// Forward-algorithm log-partition without a graph.
inline double crf_log_partition(const Matrix& emissions, const CrfParams& crf) {
  const std::size_t k = emissions.cols();
  std::vector<double> alpha(k), next(k), tmp(k);
  for (std::size_t j = 0; j < k; ++j) alpha[j] = crf.start.value(0, j) + emissions(0, j);
  for (std::size_t t = 1; t < emissions.rows(); ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < k; ++i) tmp[i] = alpha[i] + crf.transitions.value(i, j);
      next[j] = logsumexp(tmp) + emissions(t, j);
    }
    alpha.swap(next);
  }
  for (std::size_t j = 0; j < k; ++j) alpha[j] += crf.end.value(0, j);
  return logsumexp(alpha);
}

/// Highest-scoring tag path; ties go to the lowest tag index.
inline std::vector<TagIndex> crf_viterbi(const Matrix& emissions, const CrfParams& crf) {
  const std::size_t n = emissions.rows();
  const std::size_t k = emissions.cols();
  if (n == 0) return {};
  std::vector<double> best(k), next(k);
  std::vector<std::vector<TagIndex>> back(n, std::vector<TagIndex>(k, 0));
  for (std::size_t j = 0; j < k; ++j) best[j] = crf.start.value(0, j) + emissions(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      double m = -std::numeric_limits<double>::infinity();
      TagIndex arg = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const double v = best[i] + crf.transitions.value(i, j);
        if (v > m) {
          m = v;
          arg = i;
        }
      }
      next[j] = m + emissions(t, j);
      back[t][j] = arg;
    }
    best.swap(next);
  }
  double m = -std::numeric_limits<double>::infinity();
  TagIndex last = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const double v = best[j] + crf.end.value(0, j);
    if (v > m) {
      m = v;
      last = j;
    }
  }
  std::vector<TagIndex> path(n);
  path[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t][path[t]];
  return path;
}

}  // namespace seqmtl
