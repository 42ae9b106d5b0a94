#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "changesim/scenarios.hpp"
#include "cli_runner.hpp"
#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

TEST_CASE("cli: oracle prints three-decimal analytic coefficients") {
  auto r = run_cli("oracle --scenario 2A");
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "{\"change_score\": 0.119, \"adjusted\": 0.200, \"unadjusted\": "
        "0.350}\n");
  r = run_cli("oracle --scenario 3A");
  CHECK(r.out ==
        "{\"change_score\": -0.031, \"adjusted\": 0.050, \"unadjusted\": "
        "0.200}\n");
}

TEST_CASE("cli: list-scenarios covers all eight built-ins") {
  const auto r = run_cli("list-scenarios");
  CHECK(r.exit_code == 0);
  for (const std::string id : {"1A", "1B", "2A", "2B", "3A", "3A+", "3B",
                               "3B+"})
    CHECK(r.out.find(id) != std::string::npos);
  CHECK(r.out.find("Mediator") != std::string::npos);
  CHECK(r.out.find("Confounder") != std::string::npos);
  CHECK(r.out.find("Competing exposure") != std::string::npos);
}

TEST_CASE("cli: dsep verdicts and classify recommendations") {
  auto r = run_cli("dsep --scenario 3A+ --x WC0 --y U2");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "d-separated\n");
  r = run_cli("dsep --scenario 3A+ --x WC0 --y U2 --given IC0");
  CHECK(r.out == "not d-separated\n");
  r = run_cli("dsep --scenario 1A --x WC0 --y IC0 --given IC1");
  CHECK(r.out == "not d-separated\n");  // conditioning on a collider

  r = run_cli("classify --scenario 1A");
  CHECK(r.out.rfind("Competing exposure; recommended: follow-up unadjusted "
                    "for baseline\n",
                    0) == 0);
  CHECK(r.out.find("note: ") != std::string::npos);
  r = run_cli("classify --scenario 2B");
  CHECK(r.out ==
        "Confounder; recommended: follow-up adjusted for baseline\n");
  r = run_cli("classify --scenario 3B --estimand direct");
  CHECK(r.out.find("note: conditioning on the mediator") !=
        std::string::npos);
}

TEST_CASE("cli: dsep accepts a DAG file") {
  const std::string path = temp_path("graph.dag");
  {
    std::ofstream out(path);
    out << "dag { x -> m; m -> y }";
  }
  auto r = run_cli("dsep --dag " + path + " --x x --y y --given m");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "d-separated\n");
  r = run_cli("classify --dag " + path +
              " --exposure x --baseline m --followup y");
  CHECK(r.out.rfind("Mediator;", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("cli: exit codes distinguish user errors from internal ones") {
  auto r = run_cli("oracle --scenario 9Z");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("error:") != std::string::npos);
  CHECK(r.out.find("9Z") != std::string::npos);

  r = run_cli("dsep --scenario 1A --x WC0 --y ghost");
  CHECK(r.exit_code == 2);

  r = run_cli("no-such-command");
  CHECK(r.exit_code == 2);

  r = run_cli("replicate --scenario 1A --strategy change-score-adjusted");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("adjusted") != std::string::npos);

  r = run_cli("--help");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("simulate") != std::string::npos);

  r = run_cli("oldham --n 4");
  CHECK(r.exit_code == 2);
}

TEST_CASE("cli: simulate writes deterministic CSV; analyze round-trips") {
  const std::string a = temp_path("sim_a.csv");
  const std::string b = temp_path("sim_b.csv");
  auto r = run_cli("simulate --scenario 2A --n 120 --seed 99 --out " + a);
  REQUIRE(r.exit_code == 0);
  r = run_cli("simulate --scenario 2A --n 120 --seed 99 --out " + b);
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(a) == slurp(b));

  // The adjusted change-score fit must reproduce the adjusted follow-up
  // exposure coefficient exactly (same normal equations).
  auto adj = run_cli("analyze --data " + a + " --strategy adjusted");
  REQUIRE(adj.exit_code == 0);
  auto csa =
      run_cli("analyze --data " + a + " --strategy change-score-adjusted");
  REQUIRE(csa.exit_code == 0);
  const json ja = json::parse(adj.out);
  const json jc = json::parse(csa.out);
  CHECK(std::abs(ja["coefficient"].get<double>() -
                 jc["coefficient"].get<double>()) < 1e-12);
  CHECK(ja["n"] == 120);
  CHECK(ja["bindings"]["exposure"] == "WC0");
  CHECK(ja["all_coefficients"].contains("IC0"));

  // Latent columns stay internal unless explicitly exported.
  auto sim_b = run_cli("simulate --scenario 1B --n 10 --seed 5");
  CHECK(sim_b.out.rfind("WC0,IC0,IC1\n", 0) == 0);
  auto sim_bl =
      run_cli("simulate --scenario 1B --n 10 --seed 5 --include-latent");
  CHECK(sim_bl.out.rfind("WC0,IC0,IC1,U\n", 0) == 0);

  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("cli: replicate emits summary rows in both formats") {
  auto r = run_cli(
      "replicate --scenario 1A --strategy change-score --reps 40 --n 64 "
      "--seed 3 --format csv");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.rfind(
            "scenario,strategy,seed,n,reps,skipped,median,lower,upper,oracle"
            "\n1A,change-score,3,64,40,0,",
            0) == 0);

  r = run_cli(
      "replicate --scenario 1A --reps 40 --n 64 --seed 3 --format json");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 3);
  CHECK(j[0]["strategy"] == "change-score");
  CHECK(j[1]["strategy"] == "adjusted");
  CHECK(j[2]["strategy"] == "unadjusted");
  CHECK(j[0]["oracle"].get<double>() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(j[0]["units"] == "Log[mmol/L]/dm");
}

TEST_CASE("cli: a scenario file behaves like a built-in id") {
  using namespace changesim;
  const std::string path = temp_path("custom.json");
  {
    auto spec = scenarios::builtin("2A");
    auto j = scenarios::scenario_to_json(spec);
    j["id"] = "custom-2A";
    std::ofstream out(path);
    out << j.dump(2);
  }
  auto r = run_cli("oracle --scenario " + path);
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "{\"change_score\": 0.119, \"adjusted\": 0.200, \"unadjusted\": "
        "0.350}\n");
  r = run_cli("replicate --scenario " + path +
              " --strategy adjusted --reps 20 --n 50 --format csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("custom-2A,adjusted,") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("cli: table1 renders all formats with shared numbers") {
  const std::string md_path = temp_path("t1.md");
  auto r = run_cli("table1 --reps 30 --n 80 --seed 2 --format markdown --out " +
                   md_path);
  REQUIRE(r.exit_code == 0);
  const std::string md = slurp(md_path);
  CHECK(md.find("| Method of analysis | 1A | 1B | 2A | 2B | 3A | 3B | 3A+ | "
                "3B+ |") != std::string::npos);
  CHECK(md.find("30 replications of n=80, master seed 2") !=
        std::string::npos);
  std::filesystem::remove(md_path);

  r = run_cli("table1 --reps 30 --n 80 --seed 2 --format json");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["meta"]["units"] == "Log[mmol/L]/dm");
  REQUIRE(j["cells"].size() == 24);
  CHECK(j["cells"][0]["scenario"] == "1A");
  CHECK(j["cells"][23]["scenario"] == "3B+");
}

TEST_CASE("cli: oldham reports the tautological correlation pair") {
  auto r = run_cli("oldham --n 5000 --seed 12");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["n"] == 5000);
  CHECK(j["corr_baseline_delta"].get<double>() ==
        doctest::Approx(-0.7071).epsilon(0.06));
  CHECK(j["corr_followup_delta"].get<double>() ==
        doctest::Approx(0.7071).epsilon(0.06));
}
