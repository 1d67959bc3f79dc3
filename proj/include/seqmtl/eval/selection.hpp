#pragma once

#include <algorithm>
#include <vector>

#include "seqmtl/trainer/run_record.hpp"

namespace seqmtl {

struct Selection {
  double mean_test = 0.0;
  std::vector<RunRecord> records;
  bool short_of_k = false;  // fewer than k completed records were available
};

/// Mean test score of the k completed runs with the best dev scores; ties go
/// to the lower run id.
inline Selection select_top_k(const std::vector<RunRecord>& records, std::size_t k) {
  std::vector<RunRecord> done;
  std::copy_if(records.begin(), records.end(), std::back_inserter(done), [](const auto& r) { return r.completed; });
  if (done.empty()) throw Error(ErrorKind::empty_records, "no completed runs to select from");
  std::stable_sort(done.begin(), done.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.dev_score != b.dev_score) return a.dev_score > b.dev_score;
    return a.run_id < b.run_id;
  });
  Selection s;
  s.short_of_k = done.size() < k;
  done.resize(std::min(k, done.size()));
  double sum = 0.0;
  for (const auto& r : done) sum += r.test_score;
  s.mean_test = sum / static_cast<double>(done.size());
  s.records = std::move(done);
  return s;
}

inline std::vector<double> test_scores(const std::vector<RunRecord>& records) {
  std::vector<double> v;
  for (const auto& r : records) v.push_back(r.test_score);
  return v;
}

}  // namespace seqmtl
