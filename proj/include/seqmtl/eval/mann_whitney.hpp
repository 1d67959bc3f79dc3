#pragma once

// Mann-Whitney U with midranks for ties. Two-sided p-values either by exact
// enumeration of all rank assignments (small samples) or by the normal
// approximation with tie and continuity corrections.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "seqmtl/core/error.hpp"

namespace seqmtl {

enum class MwuMethod { automatic, exact, normal };

struct MwuResult {
  double u_a = 0.0;  // U statistic of the first sample
  double u_b = 0.0;
  double p = 1.0;    // two-sided
  bool exact = false;
};

/// Midranks (1-based) of the pooled sample.
inline std::vector<double> midranks(std::span<const double> pooled) {
  std::vector<std::size_t> idx(pooled.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return pooled[x] < pooled[y]; });
  std::vector<double> ranks(pooled.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && pooled[idx[j + 1]] == pooled[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                MwuMethod method = MwuMethod::automatic) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::config, "Mann-Whitney U needs non-empty samples");
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const std::size_t n = n1 + n2;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
  const double base = static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;

  MwuResult res;
  res.u_a = r1 - base;
  res.u_b = static_cast<double>(n1) * static_cast<double>(n2) - res.u_a;

  const bool exact = method == MwuMethod::exact || (method == MwuMethod::automatic && n <= 12);
  if (exact) {
    // Every n1-subset of the pooled midranks is equally likely under H0.
    std::vector<char> pick(n, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), 1);
    std::size_t total = 0, le = 0, ge = 0;
    const double eps = 1e-9;
    std::sort(pick.begin(), pick.end(), std::greater<>());
    do {
      double rs = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (pick[i]) rs += ranks[i];
      const double u = rs - base;
      ++total;
      if (u <= res.u_a + eps) ++le;
      if (u >= res.u_a - eps) ++ge;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    const double p_le = static_cast<double>(le) / static_cast<double>(total);
    const double p_ge = static_cast<double>(ge) / static_cast<double>(total);
    res.p = std::min(1.0, 2.0 * std::min(p_le, p_ge));
    res.exact = true;
    return res;
  }

  const double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double nn = static_cast<double>(n);
  const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                     ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (var <= 0.0) {
    res.p = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(res.u_a - mu) - 0.5) / std::sqrt(var);
  res.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

}  // namespace seqmtl
