#pragma once

#include <string>
#include <vector>

#include "changesim/bindings.hpp"
#include "changesim/sem.hpp"

namespace changesim::scenarios {

// One named causal configuration: a solved SEM plus the variable-role
// bindings and the replication protocol defaults.
struct ScenarioSpec {
  std::string id;           // "1A".."3B+" for built-ins, or a user label
  std::string description;  // one line, for listings
  sem::LinearSem model;     // residuals solved
  Bindings bindings;
  std::size_t n = 1000;
  std::size_t reps = 10000;
  std::string units;  // of the reported coefficient, e.g. "Log[mmol/L]/dm"
};

// Built-in ids in registry order.
const std::vector<std::string>& builtin_ids();

// The eight built-in scenarios. Shared parameterization: means/SDs
// WC0 (9.5, 1.6), IC0 (4.00, 0.74), IC1 (4.20, 0.74); IC0->IC1 = 0.65
// everywhere; WC0->IC1 = 0.200/s in 1*/2* or 0.050/s in 3* with
// s = 0.74/1.6; IC0->WC0 = 0.5 in 2*; WC0->IC0 = (0.150/s)/0.65 in 3*;
// latent U -> {WC0, IC0, IC1} = sqrt(0.08) each in 1B/3B/3B+ and sqrt(0.02)
// in 2B (the larger value would push IC1's implied variance past 1, which no
// admissible model allows); latent U2 -> {IC0, IC1} = sqrt(0.08) in 3A+/3B+.
ScenarioSpec builtin(const std::string& id);

// Loads a user scenario: the SEM JSON plus a bindings block, optional id,
// description, units, n and reps.
ScenarioSpec load_scenario_file(const std::string& path);

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

}  // namespace changesim::scenarios
