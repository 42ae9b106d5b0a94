#include "changesim/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <utility>

#include "changesim/analysis.hpp"

namespace changesim::mc {

std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t i) {
  // splitmix64 finalizer over the i-th increment of the master seed.
  std::uint64_t z = master_seed + i * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Dataset sample_dataset(const sem::LinearSem& sem, std::size_t n,
                       std::uint64_t seed, const std::string& scenario_id) {
  if (!sem.residuals_solved)
    throw InternalError("sample_dataset requires solved residuals");
  const dag::Dag& d = sem.graph;
  const std::size_t n_nodes = d.nodes().size();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Standardized values per node; raw values derived afterwards. The draw
  // order (full column per node, nodes in topological order) is part of the
  // determinism contract.
  std::vector<std::vector<double>> z(n_nodes);
  for (std::size_t v : d.topological_order()) {
    std::vector<std::pair<std::size_t, double>> in;
    for (std::size_t ei = 0; ei < d.edges().size(); ++ei)
      if (d.edges()[ei].to == v)
        in.emplace_back(d.edges()[ei].from, sem.effective_std_coeff(ei));
    std::vector<double>& col = z[v];
    col.resize(n);
    if (d.nodes()[v].kind == dag::NodeKind::Deterministic) {
      for (std::size_t r = 0; r < n; ++r) {
        double value = 0.0;
        for (const auto& [p, b] : in) value += b * z[p][r];
        col[r] = value;
      }
    } else {
      const double resid = sem.residual_sd[v];
      for (std::size_t r = 0; r < n; ++r) {
        double value = resid * normal(rng);
        for (const auto& [p, b] : in) value += b * z[p][r];
        col[r] = value;
      }
    }
  }

  Dataset out(scenario_id, seed, n);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    Column col;
    col.name = d.nodes()[v].name;
    switch (d.nodes()[v].kind) {
      case dag::NodeKind::Observed:
        col.kind = ColumnKind::Observed;
        break;
      case dag::NodeKind::Latent:
        col.kind = ColumnKind::Latent;
        break;
      case dag::NodeKind::Deterministic:
        col.kind = ColumnKind::Derived;
        break;
    }
    col.values.resize(n);
    const double mu = sem.mean[v], s = sem.sd[v];
    for (std::size_t r = 0; r < n; ++r) col.values[r] = mu + s * z[v][r];
    out.add_column(std::move(col));
  }
  return out;
}

SummaryStats summarize(std::vector<double> values) {
  if (values.empty()) throw ValidationError("cannot summarize an empty list");
  std::sort(values.begin(), values.end());
  const auto centile = [&](double p) {
    const double h = static_cast<double>(values.size() - 1) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - std::floor(h)) * (values[lo + 1] - values[lo]);
  };
  return SummaryStats{centile(50.0), centile(2.5), centile(97.5)};
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Fits every requested strategy against replication i's dataset; NaN marks
// a singular (skipped) fit.
void replicate_into(const scenarios::ScenarioSpec& spec,
                    const std::vector<sem::Strategy>& strategies,
                    std::size_t n, std::uint64_t master_seed, std::size_t i,
                    std::vector<std::vector<double>>& out) {
  const Dataset data = sample_dataset(spec.model, n,
                                      mix_seed(master_seed, i + 1), spec.id);
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    try {
      out[s][i] = analysis::run_strategy(data, strategies[s],
                                         spec.bindings.exposure,
                                         spec.bindings.baseline,
                                         spec.bindings.followup)
                      .coefficient;
    } catch (const RankDeficientError&) {
      out[s][i] = kNaN;
    }
  }
}

std::vector<ReplicationSummary> run_protocol(
    const scenarios::ScenarioSpec& spec,
    const std::vector<sem::Strategy>& strategies, std::size_t n,
    std::size_t reps, std::uint64_t master_seed, unsigned workers) {
  if (reps < 1) throw UserError("reps must be >= 1");
  if (n < 4)
    throw UserError("n must be at least 4 (two regressors plus two)");

  std::vector<std::vector<double>> estimates(
      strategies.size(), std::vector<double>(reps, kNaN));

  if (workers <= 1) {
    for (std::size_t i = 0; i < reps; ++i)
      replicate_into(spec, strategies, n, master_seed, i, estimates);
  } else {
    // Static block partition; each index is written by exactly one worker,
    // so the merged result cannot depend on scheduling.
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = reps * w / workers;
      const std::size_t end = reps * (w + 1) / workers;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i)
            replicate_into(spec, strategies, n, master_seed, i, estimates);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<ReplicationSummary> out;
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    std::vector<double> kept;
    kept.reserve(reps);
    for (double v : estimates[s])
      if (!std::isnan(v)) kept.push_back(v);
    const std::size_t skipped = reps - kept.size();
    if (static_cast<double>(skipped) > 0.001 * static_cast<double>(reps))
      throw InternalError(
          "singular replicates exceed 0.1% of " + std::to_string(reps) +
          " for scenario " + spec.id + " (" + std::to_string(skipped) +
          " skipped)");
    const SummaryStats stats = summarize(std::move(kept));
    ReplicationSummary summary;
    summary.scenario_id = spec.id;
    summary.strategy = strategies[s];
    summary.n = n;
    summary.reps = reps;
    summary.skipped = skipped;
    summary.median = stats.median;
    summary.lower = stats.lower;
    summary.upper = stats.upper;
    summary.units = spec.units;
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace

ReplicationSummary run_replications(const scenarios::ScenarioSpec& spec,
                                    sem::Strategy strategy, std::size_t n,
                                    std::size_t reps,
                                    std::uint64_t master_seed,
                                    unsigned workers) {
  return run_protocol(spec, {strategy}, n, reps, master_seed, workers)[0];
}

std::array<ReplicationSummary, 3> run_replications_all(
    const scenarios::ScenarioSpec& spec, std::size_t n, std::size_t reps,
    std::uint64_t master_seed, unsigned workers) {
  std::vector<sem::Strategy> strategies(std::begin(sem::kAllStrategies),
                                        std::end(sem::kAllStrategies));
  auto rows = run_protocol(spec, strategies, n, reps, master_seed, workers);
  return {std::move(rows[0]), std::move(rows[1]), std::move(rows[2])};
}

}  // namespace changesim::mc
