#pragma once

// Per-epoch multi-task schedule. The main task contributes each of its B
// batches exactly once; every auxiliary task contributes B batches drawn
// uniformly with replacement from its own pool. The combined list is shuffled.

#include <vector>

#include "seqmtl/core/random.hpp"
#include "seqmtl/core/error.hpp"

namespace seqmtl {

struct ScheduleEntry {
  std::size_t task = 0;   // 0 = main, i = aux task i-1
  std::size_t batch = 0;  // index into that task's batch pool
  bool operator==(const ScheduleEntry&) const = default;
};

inline std::vector<ScheduleEntry> epoch_schedule(std::size_t main_batches, const std::vector<std::size_t>& aux_pools,
                                                 Rng& rng) {
  if (main_batches == 0) throw Error(ErrorKind::config, "main task has no batches");
  std::vector<ScheduleEntry> out;
  out.reserve(main_batches * (1 + aux_pools.size()));
  for (std::size_t b = 0; b < main_batches; ++b) out.push_back({0, b});
  for (std::size_t a = 0; a < aux_pools.size(); ++a) {
    if (aux_pools[a] == 0) throw Error(ErrorKind::config, "auxiliary task " + std::to_string(a) + " has no batches");
    for (std::size_t b = 0; b < main_batches; ++b) out.push_back({a + 1, uniform_index(rng, aux_pools[a])});
  }
  shuffle(out, rng);
  return out;
}

}  // namespace seqmtl
