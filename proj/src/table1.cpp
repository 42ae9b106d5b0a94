#include "changesim/table1.hpp"

#include <charconv>

namespace changesim::scenarios {

namespace {

std::string fmt17(double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw InternalError("number formatting failed");
  return std::string(buf, ptr);
}

// Fixed 3 decimals for display parity with the published table.
std::string fmt3(double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
  if (ec != std::errc{}) throw InternalError("number formatting failed");
  std::string s(buf, ptr);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string capitalized(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z')
    s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

}  // namespace

const std::vector<std::string>& table1_column_order() {
  static const std::vector<std::string> order{"1A", "1B", "2A", "2B",
                                              "3A", "3B", "3A+", "3B+"};
  return order;
}

Table1Report reproduce_table1(std::size_t reps, std::size_t n,
                              std::uint64_t master_seed, unsigned workers) {
  Table1Report report;
  report.seed = master_seed;
  report.reps = reps;
  report.n = n;
  report.created_at = std::chrono::system_clock::now();
  for (const std::string& id : table1_column_order()) {
    const ScenarioSpec spec = builtin(id);
    Table1Cell cell;
    cell.scenario_id = id;
    cell.summaries = mc::run_replications_all(spec, n, reps, master_seed,
                                              workers);
    for (std::size_t s = 0; s < 3; ++s)
      cell.oracle[s] = sem::expected_coefficient(
          spec.model, sem::kAllStrategies[s], spec.bindings.exposure,
          spec.bindings.baseline, spec.bindings.followup);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

std::string table1_markdown(const Table1Report& report) {
  const std::string units =
      report.cells.empty() ? "" : report.cells[0].summaries[0].units;
  std::string out = "# Table 1\n\n";
  out += "Median regression coefficient for WC0";
  if (!units.empty()) out += " (" + units + ")";
  out += " with 95% simulation limits (2.5 and 97.5 centiles); " +
         std::to_string(report.reps) + " replications of n=" +
         std::to_string(report.n) + ", master seed " +
         std::to_string(report.seed) + ".\n\n";
  out += "| Method of analysis |";
  for (const Table1Cell& cell : report.cells)
    out += " " + cell.scenario_id + " |";
  out += "\n|";
  for (std::size_t i = 0; i <= report.cells.size(); ++i) out += " --- |";
  out += "\n";
  for (std::size_t s = 0; s < 3; ++s) {
    out += "| " + capitalized(sem::strategy_display(sem::kAllStrategies[s])) +
           " |";
    for (const Table1Cell& cell : report.cells) {
      const mc::ReplicationSummary& sum = cell.summaries[s];
      out += " " + fmt3(sum.median) + " (" + fmt3(sum.lower) + ", " +
             fmt3(sum.upper) + ") |";
    }
    out += "\n";
  }
  return out;
}

std::string summary_csv_header() {
  return "scenario,strategy,seed,n,reps,skipped,median,lower,upper,oracle";
}

std::string summary_csv_row(const mc::ReplicationSummary& s, double oracle,
                            std::uint64_t seed) {
  return s.scenario_id + "," + sem::strategy_token(s.strategy) + "," +
         std::to_string(seed) + "," + std::to_string(s.n) + "," +
         std::to_string(s.reps) + "," + std::to_string(s.skipped) + "," +
         fmt17(s.median) + "," + fmt17(s.lower) + "," + fmt17(s.upper) + "," +
         fmt17(oracle);
}

std::string table1_csv(const Table1Report& report) {
  std::string out = summary_csv_header() + "\n";
  for (const Table1Cell& cell : report.cells)
    for (std::size_t s = 0; s < 3; ++s)
      out += summary_csv_row(cell.summaries[s], cell.oracle[s], report.seed) +
             "\n";
  return out;
}

nlohmann::ordered_json summary_json(const mc::ReplicationSummary& s,
                                    double oracle) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario_id;
  j["strategy"] = sem::strategy_token(s.strategy);
  j["n"] = s.n;
  j["reps"] = s.reps;
  j["skipped"] = s.skipped;
  j["median"] = s.median;
  j["lower"] = s.lower;
  j["upper"] = s.upper;
  j["oracle"] = oracle;
  if (!s.units.empty()) j["units"] = s.units;
  return j;
}

nlohmann::ordered_json table1_json(const Table1Report& report) {
  nlohmann::ordered_json j;
  j["meta"] = {{"seed", report.seed},
               {"reps", report.reps},
               {"n", report.n},
               {"units", report.cells.empty()
                             ? ""
                             : report.cells[0].summaries[0].units}};
  j["cells"] = nlohmann::ordered_json::array();
  for (const Table1Cell& cell : report.cells)
    for (std::size_t s = 0; s < 3; ++s)
      j["cells"].push_back(summary_json(cell.summaries[s], cell.oracle[s]));
  return j;
}

}  // namespace changesim::scenarios
