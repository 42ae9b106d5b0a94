#include "changesim/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace changesim::scenarios {

namespace {

// Canonical parameterization. Values are defined by formulas, not rounded
// decimals: the standardized total effect is what makes the raw-unit effect
// exactly 0.200, and so on.
const double kS = 0.74 / 1.6;                    // sd(outcome)/sd(exposure)
const double kTotalStd = 0.200 / kS;             // WC0->IC1 in 1*/2*
const double kDirectStd = 0.050 / kS;            // WC0->IC1 in 3*
const double kMediatorStd = (0.150 / kS) / 0.65; // WC0->IC0 in 3*
const double kConfounderStd = 0.5;               // IC0->WC0 in 2*
const double kStability = 0.65;                  // IC0->IC1 everywhere

// Symmetric latent-confounder paths: every pairwise covariance contributed
// by U (or U2) is the square of the path value. In 2B the shared sqrt(0.08)
// would push IC1's parent-combination variance past 1 (an inadmissible
// model), so 2B uses sqrt(0.02); all qualitative confounding patterns are
// preserved.
const double kU = std::sqrt(0.08);
const double kU2B = std::sqrt(0.02);
const double kU2 = std::sqrt(0.08);

dag::Dag base_family(char family) {
  dag::Dag d;
  d.add_node({"WC0", dag::NodeKind::Observed});
  d.add_node({"IC0", dag::NodeKind::Observed});
  d.add_node({"IC1", dag::NodeKind::Observed});
  switch (family) {
    case '1':
      d.add_edge("WC0", "IC1", kTotalStd);
      d.add_edge("IC0", "IC1", kStability);
      break;
    case '2':
      d.add_edge("IC0", "WC0", kConfounderStd);
      d.add_edge("WC0", "IC1", kTotalStd);
      d.add_edge("IC0", "IC1", kStability);
      break;
    case '3':
      d.add_edge("WC0", "IC0", kMediatorStd);
      d.add_edge("WC0", "IC1", kDirectStd);
      d.add_edge("IC0", "IC1", kStability);
      break;
    default:
      throw InternalError("unknown scenario family");
  }
  return d;
}

void add_shared_confounder(dag::Dag& d, double path) {
  d.add_node({"U", dag::NodeKind::Latent});
  d.add_edge("U", "WC0", path);
  d.add_edge("U", "IC0", path);
  d.add_edge("U", "IC1", path);
}

// The "+" delta: a latent common cause of mediator and outcome, added on
// top of the parent scenario so shared structure is shared by construction.
void add_mediator_outcome_confounder(dag::Dag& d) {
  d.add_node({"U2", dag::NodeKind::Latent});
  d.add_edge("U2", "IC0", kU2);
  d.add_edge("U2", "IC1", kU2);
}

struct BuiltinShape {
  char family;
  bool with_u;
  bool with_u2;
  const char* description;
};

BuiltinShape shape_of(const std::string& id) {
  if (id == "1A")
    return {'1', false, false,
            "baseline outcome independent of the exposure (randomised-like)"};
  if (id == "1B")
    return {'1', true, false,
            "competing exposure with an unmeasured cause U of all three "
            "variables"};
  if (id == "2A")
    return {'2', false, false,
            "baseline outcome causes both exposure and follow-up"};
  if (id == "2B")
    return {'2', true, false,
            "confounder plus an unmeasured cause U of all three variables"};
  if (id == "3A")
    return {'3', false, false,
            "exposure acts on the follow-up partly through the baseline "
            "outcome"};
  if (id == "3A+")
    return {'3', false, true,
            "mediator with unmeasured mediator-outcome confounding (U2)"};
  if (id == "3B")
    return {'3', true, false,
            "mediator with an unmeasured cause U of all three variables"};
  if (id == "3B+")
    return {'3', true, true,
            "mediator with U and mediator-outcome confounding (U2)"};
  throw UnknownNameError("unknown scenario '" + id +
                         "' (expected one of 1A, 1B, 2A, 2B, 3A, 3A+, 3B, "
                         "3B+)");
}

}  // namespace

const std::vector<std::string>& builtin_ids() {
  static const std::vector<std::string> ids{"1A", "1B", "2A", "2B",
                                            "3A", "3A+", "3B", "3B+"};
  return ids;
}

ScenarioSpec builtin(const std::string& id) {
  const BuiltinShape shape = shape_of(id);
  dag::Dag d = base_family(shape.family);
  if (shape.with_u)
    add_shared_confounder(d, shape.family == '2' ? kU2B : kU);
  if (shape.with_u2) add_mediator_outcome_confounder(d);

  sem::LinearSem model = sem::LinearSem::from_dag(
      d, {{"WC0", {9.5, 1.6}}, {"IC0", {4.00, 0.74}}, {"IC1", {4.20, 0.74}}});
  ScenarioSpec spec;
  spec.id = id;
  spec.description = shape.description;
  spec.model = sem::solve_residual_variances(std::move(model));
  spec.bindings = {"WC0", "IC0", "IC1"};
  spec.units = "Log[mmol/L]/dm";
  return spec;
}

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::ordered_json j;
  j["id"] = spec.id;
  if (!spec.description.empty()) j["description"] = spec.description;
  if (!spec.units.empty()) j["units"] = spec.units;
  j["n"] = spec.n;
  j["reps"] = spec.reps;
  j["bindings"] = {{"exposure", spec.bindings.exposure},
                   {"baseline", spec.bindings.baseline},
                   {"followup", spec.bindings.followup}};
  const nlohmann::ordered_json sem_part = sem::sem_to_json(spec.model);
  j["nodes"] = sem_part.at("nodes");
  j["edges"] = sem_part.at("edges");
  return j;
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec spec;
  spec.model = sem::solve_residual_variances(sem::sem_from_json(j));
  if (!j.contains("bindings") || !j.at("bindings").is_object())
    throw ValidationError("scenario file needs a 'bindings' object");
  const auto& b = j.at("bindings");
  for (const char* role : {"exposure", "baseline", "followup"})
    if (!b.contains(role))
      throw ValidationError(std::string("scenario bindings need '") + role +
                            "'");
  spec.bindings = {b.at("exposure").get<std::string>(),
                   b.at("baseline").get<std::string>(),
                   b.at("followup").get<std::string>()};
  for (const std::string& name :
       {spec.bindings.exposure, spec.bindings.baseline,
        spec.bindings.followup}) {
    if (spec.model.graph.node(name).kind != dag::NodeKind::Observed)
      throw ValidationError("binding '" + name + "' must be an observed node");
  }
  if (spec.bindings.exposure == spec.bindings.baseline ||
      spec.bindings.exposure == spec.bindings.followup ||
      spec.bindings.baseline == spec.bindings.followup)
    throw ValidationError("bindings must name three distinct nodes");
  spec.id = j.value("id", "user");
  spec.description = j.value("description", "");
  spec.units = j.value("units", "");
  spec.n = j.value("n", std::size_t{1000});
  spec.reps = j.value("reps", std::size_t{10000});
  return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("scenario file '" + path +
                          "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace changesim::scenarios
