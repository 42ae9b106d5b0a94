#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "changesim/analysis.hpp"
#include "changesim/dag.hpp"
#include "changesim/errors.hpp"
#include "changesim/mc.hpp"
#include "changesim/scenarios.hpp"
#include "changesim/sem.hpp"
#include "changesim/table1.hpp"
#include "json.hpp"

namespace {

using namespace changesim;

constexpr std::uint64_t kDefaultSeed = 20200510;

std::string fmt3(double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
  if (ec != std::errc{}) throw InternalError("number formatting failed");
  std::string s(buf, ptr);
  if (s == "-0.000") s = "0.000";
  return s;
}

// Writes to --out when given, stdout otherwise. Content is written verbatim;
// a single trailing newline is ensured so files and terminals both read well.
void emit(const std::string& content, const std::string& out_path) {
  std::string text = content;
  if (text.empty() || text.back() != '\n') text += '\n';
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw UserError("cannot write to '" + out_path + "'");
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

// A scenario reference is a built-in id or a path to a scenario JSON file.
scenarios::ScenarioSpec resolve_scenario(const std::string& ref) {
  const auto& ids = scenarios::builtin_ids();
  if (std::find(ids.begin(), ids.end(), ref) != ids.end())
    return scenarios::builtin(ref);
  if (std::filesystem::exists(ref)) return scenarios::load_scenario_file(ref);
  throw UnknownNameError(
      "unknown scenario '" + ref +
      "': not a built-in id (1A, 1B, 2A, 2B, 3A, 3A+, 3B, 3B+) and no such "
      "file");
}

dag::Dag resolve_dag(const std::string& dag_path,
                     const std::string& scenario_ref) {
  if (!dag_path.empty() && !scenario_ref.empty())
    throw UsageError("give either --dag or --scenario, not both");
  if (!dag_path.empty()) return dag::parse_dag(read_file(dag_path));
  if (!scenario_ref.empty()) return resolve_scenario(scenario_ref).model.graph;
  throw UsageError("need --dag FILE or --scenario ID");
}

double oracle_for(const scenarios::ScenarioSpec& spec, sem::Strategy s) {
  return sem::expected_coefficient(spec.model, s, spec.bindings.exposure,
                                   spec.bindings.baseline,
                                   spec.bindings.followup);
}

int run_cli(int argc, char** argv) {
  CLI::App app{
      "changesim: simulation laboratory and DAG toolkit for change-score "
      "analyses"};
  app.require_subcommand(1);

  // --- list-scenarios -------------------------------------------------------
  auto* list_cmd =
      app.add_subcommand("list-scenarios", "List the built-in scenarios");
  list_cmd->callback([] {
    std::string out;
    for (const std::string& id : scenarios::builtin_ids()) {
      const scenarios::ScenarioSpec spec = scenarios::builtin(id);
      const dag::Role role = dag::classify_baseline_role(
          spec.model.graph, spec.bindings.exposure, spec.bindings.baseline,
          spec.bindings.followup);
      std::string line = id;
      line.append(id.size() < 4 ? 4 - id.size() : 1, ' ');
      std::string role_text = dag::role_display(role);
      line += role_text;
      line.append(role_text.size() < 20 ? 20 - role_text.size() : 1, ' ');
      line += spec.description;
      out += line + "\n";
    }
    emit(out, "");
  });

  // --- simulate -------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Draw one dataset from a scenario and write CSV");
  std::string sim_scenario, sim_out;
  std::int64_t sim_n = -1;
  std::uint64_t sim_seed = kDefaultSeed;
  bool sim_latent = false;
  sim_cmd->add_option("--scenario", sim_scenario,
                      "Built-in id or scenario JSON file")
      ->required();
  sim_cmd->add_option("--n", sim_n, "Rows to draw (default: scenario's n)");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--out", sim_out, "Output file (default: stdout)");
  sim_cmd->add_flag("--include-latent", sim_latent,
                    "Include latent columns in the CSV");
  sim_cmd->callback([&] {
    const scenarios::ScenarioSpec spec = resolve_scenario(sim_scenario);
    const std::size_t n =
        sim_n < 0 ? spec.n : static_cast<std::size_t>(sim_n);
    const mc::Dataset data =
        mc::sample_dataset(spec.model, n, sim_seed, spec.id);
    emit(data.to_csv(sim_latent), sim_out);
  });

  // --- analyze ---------------------------------------------------------------
  auto* an_cmd = app.add_subcommand(
      "analyze", "Fit one analysis strategy to a CSV dataset");
  std::string an_data, an_strategy, an_out;
  Bindings an_bind{"WC0", "IC0", "IC1"};
  an_cmd->add_option("--data", an_data, "CSV file with a header row")
      ->required();
  an_cmd->add_option("--strategy", an_strategy,
                     "change-score | adjusted | unadjusted | "
                     "change-score-adjusted")
      ->required();
  an_cmd->add_option("--exposure", an_bind.exposure, "Exposure column");
  an_cmd->add_option("--baseline", an_bind.baseline, "Baseline column");
  an_cmd->add_option("--followup", an_bind.followup, "Follow-up column");
  an_cmd->add_option("--out", an_out, "Output file (default: stdout)");
  an_cmd->callback([&] {
    const mc::Dataset data = mc::Dataset::from_csv(read_file(an_data));
    analysis::AnalysisResult result =
        an_strategy == "change-score-adjusted"
            ? analysis::run_change_score_adjusted(
                  data, an_bind.exposure, an_bind.baseline, an_bind.followup)
            : analysis::run_strategy(data, sem::parse_strategy(an_strategy),
                                     an_bind.exposure, an_bind.baseline,
                                     an_bind.followup);
    nlohmann::ordered_json j;
    j["strategy"] = result.strategy;
    j["coefficient"] = result.coefficient;
    j["intercept"] = result.fit.intercept;
    j["all_coefficients"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : result.fit.coefficients)
      j["all_coefficients"][name] = value;
    j["n"] = result.fit.n;
    j["bindings"] = {{"exposure", result.bindings.exposure},
                     {"baseline", result.bindings.baseline},
                     {"followup", result.bindings.followup}};
    emit(j.dump(2), an_out);
  });

  // --- replicate --------------------------------------------------------------
  auto* rep_cmd = app.add_subcommand(
      "replicate", "Replication summary for one scenario");
  std::string rep_scenario, rep_strategy, rep_format = "json", rep_out;
  std::int64_t rep_n = -1, rep_reps = -1;
  std::uint64_t rep_seed = kDefaultSeed;
  unsigned rep_workers = 1;
  rep_cmd->add_option("--scenario", rep_scenario,
                      "Built-in id or scenario JSON file")
      ->required();
  rep_cmd->add_option("--strategy", rep_strategy,
                      "change-score | adjusted | unadjusted (default: all)");
  rep_cmd->add_option("--n", rep_n, "Rows per replication");
  rep_cmd->add_option("--reps", rep_reps, "Number of replications");
  rep_cmd->add_option("--seed", rep_seed, "Master seed");
  rep_cmd->add_option("--workers", rep_workers, "Worker threads");
  rep_cmd->add_option("--format", rep_format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  rep_cmd->add_option("--out", rep_out, "Output file (default: stdout)");
  rep_cmd->callback([&] {
    const scenarios::ScenarioSpec spec = resolve_scenario(rep_scenario);
    const std::size_t n = rep_n < 0 ? spec.n : static_cast<std::size_t>(rep_n);
    const std::size_t reps =
        rep_reps < 0 ? spec.reps : static_cast<std::size_t>(rep_reps);
    std::vector<mc::ReplicationSummary> rows;
    if (rep_strategy.empty()) {
      auto all = mc::run_replications_all(spec, n, reps, rep_seed, rep_workers);
      rows.assign(all.begin(), all.end());
    } else {
      if (rep_strategy == "change-score-adjusted")
        throw UsageError(
            "change-score-adjusted is an analyze-only strategy; its "
            "replication results equal 'adjusted' exactly");
      rows.push_back(mc::run_replications(spec, sem::parse_strategy(rep_strategy),
                                          n, reps, rep_seed, rep_workers));
    }
    if (rep_format == "csv") {
      std::string out = scenarios::summary_csv_header() + "\n";
      for (const auto& row : rows)
        out += scenarios::summary_csv_row(
                   row, oracle_for(spec, row.strategy), rep_seed) +
               "\n";
      emit(out, rep_out);
    } else {
      if (rows.size() == 1) {
        emit(scenarios::summary_json(rows[0], oracle_for(spec, rows[0].strategy))
                 .dump(2),
             rep_out);
      } else {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& row : rows)
          j.push_back(
              scenarios::summary_json(row, oracle_for(spec, row.strategy)));
        emit(j.dump(2), rep_out);
      }
    }
  });

  // --- table1 -----------------------------------------------------------------
  auto* t1_cmd = app.add_subcommand(
      "table1", "Replicate all 24 cells of the three-strategy table");
  std::string t1_format = "markdown", t1_out;
  std::size_t t1_reps = 10000, t1_n = 1000;
  std::uint64_t t1_seed = kDefaultSeed;
  unsigned t1_workers = 1;
  t1_cmd->add_option("--reps", t1_reps, "Replications per cell");
  t1_cmd->add_option("--n", t1_n, "Rows per replication");
  t1_cmd->add_option("--seed", t1_seed, "Master seed");
  t1_cmd->add_option("--workers", t1_workers, "Worker threads");
  t1_cmd->add_option("--format", t1_format, "markdown | csv | json")
      ->check(CLI::IsMember({"markdown", "csv", "json"}));
  t1_cmd->add_option("--out", t1_out, "Output file (default: stdout)");
  t1_cmd->callback([&] {
    const scenarios::Table1Report report =
        scenarios::reproduce_table1(t1_reps, t1_n, t1_seed, t1_workers);
    if (t1_format == "markdown")
      emit(scenarios::table1_markdown(report), t1_out);
    else if (t1_format == "csv")
      emit(scenarios::table1_csv(report), t1_out);
    else
      emit(scenarios::table1_json(report).dump(2), t1_out);
  });

  // --- oracle -----------------------------------------------------------------
  auto* or_cmd = app.add_subcommand(
      "oracle", "Analytic expected coefficients for a scenario");
  std::string or_scenario, or_out;
  or_cmd->add_option("--scenario", or_scenario,
                     "Built-in id or scenario JSON file")
      ->required();
  or_cmd->add_option("--out", or_out, "Output file (default: stdout)");
  or_cmd->callback([&] {
    const scenarios::ScenarioSpec spec = resolve_scenario(or_scenario);
    // 3-decimal display parity with the published table.
    const std::string out =
        "{\"change_score\": " +
        fmt3(oracle_for(spec, sem::Strategy::ChangeScore)) +
        ", \"adjusted\": " +
        fmt3(oracle_for(spec, sem::Strategy::FollowUpAdjusted)) +
        ", \"unadjusted\": " +
        fmt3(oracle_for(spec, sem::Strategy::FollowUpUnadjusted)) + "}";
    emit(out, or_out);
  });

  // --- dsep -------------------------------------------------------------------
  auto* ds_cmd = app.add_subcommand(
      "dsep", "d-separation verdict for two variables given a set");
  std::string ds_dag, ds_scenario, ds_x, ds_y;
  std::vector<std::string> ds_given;
  ds_cmd->add_option("--dag", ds_dag, "DAG file (.dag DSL)");
  ds_cmd->add_option("--scenario", ds_scenario,
                     "Built-in id or scenario JSON file");
  ds_cmd->add_option("--x", ds_x, "First variable")->required();
  ds_cmd->add_option("--y", ds_y, "Second variable")->required();
  ds_cmd->add_option("--given", ds_given, "Conditioning set")
      ->delimiter(',');
  ds_cmd->callback([&] {
    const dag::Dag d = resolve_dag(ds_dag, ds_scenario);
    const bool sep = dag::d_separated(d, {ds_x}, {ds_y}, ds_given);
    emit(sep ? "d-separated" : "not d-separated", "");
  });

  // --- classify ---------------------------------------------------------------
  auto* cl_cmd = app.add_subcommand(
      "classify", "Classify the baseline outcome's causal role");
  std::string cl_dag, cl_scenario, cl_estimand = "total";
  Bindings cl_bind{"WC0", "IC0", "IC1"};
  cl_cmd->add_option("--dag", cl_dag, "DAG file (.dag DSL)");
  cl_cmd->add_option("--scenario", cl_scenario,
                     "Built-in id or scenario JSON file");
  cl_cmd->add_option("--exposure", cl_bind.exposure, "Exposure node");
  cl_cmd->add_option("--baseline", cl_bind.baseline, "Baseline node");
  cl_cmd->add_option("--followup", cl_bind.followup, "Follow-up node");
  cl_cmd->add_option("--estimand", cl_estimand, "total | direct")
      ->check(CLI::IsMember({"total", "direct"}));
  cl_cmd->callback([&] {
    const dag::Dag d = resolve_dag(cl_dag, cl_scenario);
    const dag::Role role = dag::classify_baseline_role(
        d, cl_bind.exposure, cl_bind.baseline, cl_bind.followup);
    const dag::Recommendation rec = dag::recommend_strategy(
        role, cl_estimand == "direct" ? dag::Estimand::DirectEffect
                                      : dag::Estimand::TotalEffect);
    std::string out = dag::role_display(role) +
                      "; recommended: " + sem::strategy_display(rec.strategy);
    for (const std::string& w : rec.warnings) out += "\nnote: " + w;
    emit(out, "");
  });

  // --- oldham -----------------------------------------------------------------
  auto* ol_cmd = app.add_subcommand(
      "oldham", "Correlation of a difference score with its components");
  std::size_t ol_n = 100000;
  std::uint64_t ol_seed = kDefaultSeed;
  std::string ol_out;
  ol_cmd->add_option("--n", ol_n, "Sample size (>= 10)");
  ol_cmd->add_option("--seed", ol_seed, "RNG seed");
  ol_cmd->add_option("--out", ol_out, "Output file (default: stdout)");
  ol_cmd->callback([&] {
    const auto [c0, c1] = analysis::oldham_correlation(ol_n, ol_seed);
    nlohmann::ordered_json j;
    j["n"] = ol_n;
    j["seed"] = ol_seed;
    j["corr_baseline_delta"] = c0;
    j["corr_followup_delta"] = c1;
    emit(j.dump(2), ol_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const changesim::UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
