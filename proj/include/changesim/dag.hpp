#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "changesim/errors.hpp"
#include "changesim/strategy.hpp"

namespace changesim::dag {

enum class NodeKind { Observed, Latent, Deterministic };

std::string node_kind_token(NodeKind k);
NodeKind parse_node_kind(const std::string& token);

struct Node {
  std::string name;
  NodeKind kind = NodeKind::Observed;
  // Marker attributes from the DSL; carried through round-trips but not
  // interpreted by the graph algorithms (bindings name roles explicitly).
  bool exposure_mark = false;
  bool outcome_mark = false;

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::size_t from = 0;  // node indices
  std::size_t to = 0;
  // Optional path coefficient captured from the DSL / SEM layer. For edges
  // into Deterministic nodes this is a fixed raw-unit weight (e.g. +1/-1 for
  // a change score), not a free standardized parameter.
  std::optional<double> beta;

  bool operator==(const Edge&) const = default;
};

// Directed acyclic graph over named nodes. Immutable in spirit: build with
// add_node/add_edge, then call validate() once; queries are const.
class Dag {
public:
  std::size_t add_node(Node node);                // error on duplicate name
  std::size_t ensure_node(const std::string& n);  // auto-declared Observed
  void add_edge(const std::string& from, const std::string& to,
                std::optional<double> beta = std::nullopt);

  // Acyclicity plus the Deterministic-node rules (>= 1 parent, fixed
  // incoming coefficients). Throws ValidationError.
  void validate() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Node& node_at(std::size_t i) { return nodes_[i]; }  // construction only
  bool has_node(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;  // UnknownNameError
  const Node& node(const std::string& name) const;

  bool has_edge(const std::string& from, const std::string& to) const;
  std::vector<std::size_t> parents(std::size_t v) const;
  std::vector<std::size_t> children(std::size_t v) const;
  // Indices in a valid evaluation order (parents before children).
  std::vector<std::size_t> topological_order() const;
  std::vector<std::size_t> ancestors(std::size_t v) const;    // excludes v
  std::vector<std::size_t> descendants(std::size_t v) const;  // excludes v
  bool has_directed_path(std::size_t from, std::size_t to) const;

  bool operator==(const Dag&) const = default;

private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

// --- DSL -------------------------------------------------------------------
// Grammar: `dag` `{` (node_decl | edge_decl)* `}` with
//   node_decl = IDENT ('[' attr (',' attr)* ']')?
//   attr      = latent | deterministic | exposure | outcome
//   edge_decl = IDENT '->' IDENT ('[' 'beta=' FLOAT ']')?
// Whitespace and newlines are insignificant; ';' is an optional separator;
// identifiers match [A-Za-z_][A-Za-z0-9_]*.
Dag parse_dag(const std::string& text);

// Canonical form: every node declared first (with attributes), then every
// edge, in stored order. parse_dag(print_dag(d)) is structurally equal to d.
std::string print_dag(const Dag& d);

// --- d-separation ----------------------------------------------------------
// True iff every path between a and b is blocked given z (chains and forks
// blocked by conditioning; colliders opened by conditioning on the collider
// or one of its descendants). Reachability formulation over (node, direction)
// states. Preconditions: names exist; a, b, z pairwise disjoint.
bool d_separated(const Dag& d, const std::vector<std::string>& a,
                 const std::vector<std::string>& b,
                 const std::vector<std::string>& z);

// --- role classification ----------------------------------------------------
enum class Role { CompetingExposure, Confounder, Mediator };
enum class Estimand { TotalEffect, DirectEffect };

std::string role_display(Role r);

// Classifies the baseline outcome's causal role in the supported patterns:
// Confounder iff edge baseline->exposure; Mediator iff edge
// exposure->baseline; CompetingExposure iff neither edge exists and baseline
// is an ancestor of followup. Anything else is an explicit error.
Role classify_baseline_role(const Dag& d, const std::string& exposure,
                            const std::string& baseline,
                            const std::string& followup);

struct Recommendation {
  sem::Strategy strategy;
  std::vector<std::string> warnings;
};

// Maps (role, estimand) to the regression that identifies the estimand.
// ChangeScore is never recommended. (CompetingExposure|Confounder,
// DirectEffect) is an invalid pairing and throws.
Recommendation recommend_strategy(Role role, Estimand estimand);

}  // namespace changesim::dag
