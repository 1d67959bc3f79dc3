#pragma once

// Random hyperparameter search: n independent runs with sampled configs and
// seeds derived from one master seed. Runs may execute on a bounded pool of
// worker threads; records are handed to a single collector.

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "seqmtl/optim/search_space.hpp"
#include "seqmtl/trainer/run_record.hpp"

namespace seqmtl {

struct RunSpec {
  std::size_t run_id = 0;
  ModelConfig config;
  TrainPlan plan;
};

/// Deterministic per-run configs and seeds.
inline std::vector<RunSpec> plan_search(const SearchSpace& space, const TrainPlan& base, std::size_t n_runs,
                                        std::uint64_t master_seed) {
  if (n_runs == 0) throw Error(ErrorKind::config, "search needs at least one run");
  std::vector<RunSpec> out;
  for (std::size_t i = 0; i < n_runs; ++i) {
    const std::uint64_t child = derive_seed(master_seed, i);
    Rng rng(child);
    RunSpec spec;
    spec.run_id = i;
    spec.config = sample_config(space, rng, i);
    spec.plan = base;
    spec.plan.seed = derive_seed(child, "plan");
    out.push_back(std::move(spec));
  }
  return out;
}

using RunFn = std::function<RunRecord(const RunSpec&)>;
using CollectFn = std::function<void(const RunRecord&)>;

/// Executes `specs` on up to `jobs` threads. A run that throws is recorded as
/// failed; the search itself never aborts. Records are returned in run order.
inline std::vector<RunRecord> run_search(const std::vector<RunSpec>& specs, const RunFn& run,
                                         const CollectFn& collect = {}, std::size_t jobs = 1) {
  std::vector<RunRecord> records(specs.size());
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      RunRecord r;
      try {
        r = run(specs[i]);
      } catch (const std::exception& e) {
        r.config = specs[i].config;
        r.plan = specs[i].plan;
        r.dataset = specs[i].plan.main;
        r.completed = false;
        r.failure = e.what();
      }
      r.run_id = specs[i].run_id;
      std::lock_guard lock(mu);
      if (collect) collect(r);
      records[i] = std::move(r);
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, specs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

inline std::vector<RunRecord> usable(const std::vector<RunRecord>& records) {
  std::vector<RunRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out), [](const auto& r) { return r.completed; });
  return out;
}

}  // namespace seqmtl
