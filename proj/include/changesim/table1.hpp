#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "changesim/mc.hpp"
#include "changesim/scenarios.hpp"

namespace changesim::scenarios {

// One scenario column of the report: the three strategy summaries plus the
// analytic oracle value per strategy (same order as sem::kAllStrategies).
struct Table1Cell {
  std::string scenario_id;
  std::array<mc::ReplicationSummary, 3> summaries;
  std::array<double, 3> oracle = {0.0, 0.0, 0.0};
};

// Full 8-scenario x 3-strategy grid in presentation order. The timestamp is
// in-memory metadata only: serialized exports carry seed/reps/n exclusively,
// so identical runs produce identical bytes.
struct Table1Report {
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t n = 0;
  std::chrono::system_clock::time_point created_at;
  std::vector<Table1Cell> cells;  // presentation order
};

// Scenario order of the report columns.
const std::vector<std::string>& table1_column_order();

// Runs run_replications_all over every built-in scenario and attaches the
// analytic oracle per cell. Deterministic for fixed (reps, n, master_seed)
// at any worker count.
Table1Report reproduce_table1(std::size_t reps, std::size_t n,
                              std::uint64_t master_seed, unsigned workers = 1);

// Markdown table: strategies as rows, scenarios as columns, cells
// "median (lower, upper)" at 3 decimals.
std::string table1_markdown(const Table1Report& report);

// Full-precision exports; CSV re-parsed equals the JSON numbers exactly.
std::string table1_csv(const Table1Report& report);
nlohmann::ordered_json table1_json(const Table1Report& report);

// Shared row formats for single replication summaries (cmd_replicate).
nlohmann::ordered_json summary_json(const mc::ReplicationSummary& s,
                                    double oracle);
std::string summary_csv_header();
std::string summary_csv_row(const mc::ReplicationSummary& s, double oracle,
                            std::uint64_t seed);

}  // namespace changesim::scenarios
