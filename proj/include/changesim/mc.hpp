#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "changesim/dataset.hpp"
#include "changesim/scenarios.hpp"
#include "changesim/strategy.hpp"

namespace changesim::mc {

// Fixed 64-bit hash deriving the seed of replication i (1-based) from the
// master seed. Makes every replication's stream independent of execution
// order, which is what keeps results identical at any parallelism.
std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t i);

// Structural sampling in topological order: each non-deterministic node is
// mean + sd * (sum of coeff * standardized parent + residual_sd * N(0,1));
// deterministic nodes are computed from their parents. One column of draws
// per non-deterministic node, in topological order.
Dataset sample_dataset(const sem::LinearSem& sem, std::size_t n,
                       std::uint64_t seed, const std::string& scenario_id = "");

struct SummaryStats {
  double median = 0.0;
  double lower = 0.0;   // 2.5 centile
  double upper = 0.0;   // 97.5 centile
};

// Median with 95% simulation limits (2.5 and 97.5 centiles) by linear
// interpolation between order statistics at index h = (k-1)*p/100.
SummaryStats summarize(std::vector<double> values);

struct ReplicationSummary {
  std::string scenario_id;
  sem::Strategy strategy = sem::Strategy::ChangeScore;
  std::size_t n = 0;
  std::size_t reps = 0;     // attempted replications
  std::size_t skipped = 0;  // singular fits skipped (hard cap: 0.1% of reps)
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string units;
};

// The replication protocol: for i in 1..reps draw a dataset with seed
// mix_seed(master_seed, i), fit the strategy, collect the exposure
// coefficient; summarize. Singular replicates are skipped and counted; more
// than 0.1% of reps skipped is a hard failure. Deterministic for fixed
// inputs regardless of worker count.
ReplicationSummary run_replications(const scenarios::ScenarioSpec& spec,
                                    sem::Strategy strategy,
                                    std::size_t n, std::size_t reps,
                                    std::uint64_t master_seed,
                                    unsigned workers = 1);

// Same protocol fitting all three strategies against the same replicated
// datasets (one drawing per replication, not one per strategy). Row r of the
// result equals run_replications(spec, kAllStrategies[r], ...) exactly.
std::array<ReplicationSummary, 3> run_replications_all(
    const scenarios::ScenarioSpec& spec, std::size_t n, std::size_t reps,
    std::uint64_t master_seed, unsigned workers = 1);

}  // namespace changesim::mc
