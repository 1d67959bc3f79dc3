#pragma once

// Results grid (dataset x training size x {STL, MTL, BL}) with significance
// markers, and the learning-curve deltas derived from it.

#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "seqmtl/eval/curves.hpp"
#include "seqmtl/eval/mann_whitney.hpp"
#include "seqmtl/eval/selection.hpp"

namespace seqmtl {

struct ReportCell {
  std::optional<Selection> selection;
};

struct ReportRow {
  std::string dataset;
  std::size_t k = 0;
  std::map<TrainMode, ReportCell> cells;
  std::optional<MwuResult> mtl_vs_stl;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<CurvePoint> curves;
  std::vector<std::string> warnings;
};

inline Report build_report(const std::vector<RunRecord>& records, std::size_t top_k = 10) {
  std::map<std::pair<std::string, std::size_t>, std::map<TrainMode, std::vector<RunRecord>>> groups;
  for (const auto& r : records) groups[{r.dataset, r.k}][r.plan.mode].push_back(r);
  if (groups.empty()) throw Error(ErrorKind::empty_records, "no results to report");

  Report rep;
  for (auto& [key, by_mode] : groups) {
    ReportRow row;
    row.dataset = key.first;
    row.k = key.second;
    for (auto& [mode, recs] : by_mode) {
      try {
        Selection s = select_top_k(recs, top_k);
        if (s.short_of_k) {
          rep.warnings.push_back(key.first + " " + size_label(key.second) + " " + to_string(mode) + ": only " +
                                 std::to_string(s.records.size()) + " completed runs");
        }
        row.cells[mode].selection = std::move(s);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::empty_records) throw;
        rep.warnings.push_back(key.first + " " + size_label(key.second) + " " + to_string(mode) + ": no completed runs");
      }
    }
    const auto stl = row.cells.find(TrainMode::stl);
    const auto mtl = row.cells.find(TrainMode::mtl);
    if (stl != row.cells.end() && mtl != row.cells.end() && stl->second.selection && mtl->second.selection) {
      const auto a = test_scores(mtl->second.selection->records);
      const auto b = test_scores(stl->second.selection->records);
      row.mtl_vs_stl = mann_whitney_u(a, b);
    }
    rep.rows.push_back(std::move(row));
  }

  // Curves per dataset over the sizes where both STL and MTL exist,
  // normalised by STL at the smallest size.
  std::map<std::string, std::pair<std::map<std::size_t, double>, std::map<std::size_t, double>>> per_dataset;
  for (const auto& row : rep.rows) {
    auto& [stl, mtl] = per_dataset[row.dataset];
    for (const auto& [mode, cell] : row.cells) {
      if (!cell.selection) continue;
      if (mode == TrainMode::stl) stl[row.k] = cell.selection->mean_test;
      if (mode == TrainMode::mtl) mtl[row.k] = cell.selection->mean_test;
    }
  }
  for (const auto& [ds, maps] : per_dataset) {
    const auto& [stl, mtl] = maps;
    if (stl.empty() || !(stl.begin()->second > 0.0)) continue;
    std::map<std::size_t, double> s2, m2;
    for (const auto& [k, v] : stl) {
      if (mtl.contains(k)) {
        s2[k] = v;
        m2[k] = mtl.at(k);
      }
    }
    if (s2.empty()) continue;
    for (auto& p : build_curves_with_base(ds, s2, m2, stl.begin()->second)) rep.curves.push_back(std::move(p));
  }
  return rep;
}

/// Scores printed as percentages; "**" marks p < 0.01 and "*" p < 0.05 for
/// MTL against STL; "-" marks an absent cell.
inline void write_report(std::ostream& out, const Report& rep) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %-6s %12s %12s %12s %10s\n", "dataset", "k", "STL", "MTL", "BL", "p(MTL,STL)");
  out << buf;
  auto cell = [](const ReportRow& row, TrainMode m, const std::string& mark) {
    const auto it = row.cells.find(m);
    if (it == row.cells.end() || !it->second.selection) return std::string("-");
    char b[64];
    std::snprintf(b, sizeof b, "%.2f%s", 100.0 * it->second.selection->mean_test, mark.c_str());
    return std::string(b);
  };
  for (const auto& row : rep.rows) {
    std::string mark;
    std::string p = "-";
    if (row.mtl_vs_stl) {
      if (row.mtl_vs_stl->p < 0.01) mark = "**";
      else if (row.mtl_vs_stl->p < 0.05) mark = "*";
      char b[32];
      std::snprintf(b, sizeof b, "%.4f", row.mtl_vs_stl->p);
      p = b;
    }
    std::snprintf(buf, sizeof buf, "%-12s %-6s %12s %12s %12s %10s\n", row.dataset.c_str(), size_label(row.k).c_str(),
                  cell(row, TrainMode::stl, "").c_str(), cell(row, TrainMode::mtl, mark).c_str(),
                  cell(row, TrainMode::union_baseline, "").c_str(), p.c_str());
    out << buf;
  }
  for (const auto& w : rep.warnings) out << "warning: " << w << '\n';
}

}  // namespace seqmtl
