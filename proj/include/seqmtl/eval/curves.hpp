#pragma once

// Learning-curve deltas: scores normalised by the single-task score at the
// smallest training size,
//   norm(k) = score(k) / STL(k_min),   delta(k) = MTL_norm(k) - STL_norm(k).

#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "seqmtl/core/error.hpp"
#include "seqmtl/data/scenarios.hpp"

namespace seqmtl {

struct CurvePoint {
  std::string dataset;
  std::size_t k = 0;
  double stl_norm = 0.0;
  double mtl_norm = 0.0;
  double delta = 0.0;
};

/// One point per k of `stl`; every such k must also be present in `mtl`.
inline std::vector<CurvePoint> build_curves_with_base(const std::string& dataset,
                                                      const std::map<std::size_t, double>& stl,
                                                      const std::map<std::size_t, double>& mtl, double base) {
  if (!(base > 0.0)) throw Error(ErrorKind::config, "base single-task score must be positive");
  std::vector<CurvePoint> out;
  for (const auto& [k, s] : stl) {
    const auto m = mtl.find(k);
    if (m == mtl.end()) throw Error(ErrorKind::missing_k, "missing multi-task score at " + size_label(k));
    CurvePoint p{dataset, k, s / base, m->second / base, 0.0};
    p.delta = p.mtl_norm - p.stl_norm;
    out.push_back(p);
  }
  return out;
}

/// `base_k` defaults to the smallest k present in `stl`.
inline std::vector<CurvePoint> build_curves(const std::string& dataset, const std::map<std::size_t, double>& stl,
                                            const std::map<std::size_t, double>& mtl, std::size_t base_k = 0) {
  if (stl.empty()) throw Error(ErrorKind::missing_k, "no single-task scores for " + dataset);
  if (base_k == 0) base_k = stl.begin()->first;
  const auto base = stl.find(base_k);
  if (base == stl.end()) throw Error(ErrorKind::missing_k, "missing single-task score at " + size_label(base_k));
  return build_curves_with_base(dataset, stl, mtl, base->second);
}

inline void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
  out << "dataset,k,stl_norm,mtl_norm,delta\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f\n", p.dataset.c_str(), size_label(p.k).c_str(), p.stl_norm,
                  p.mtl_norm, p.delta);
    out << buf;
  }
}

}  // namespace seqmtl
