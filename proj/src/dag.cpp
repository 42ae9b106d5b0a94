#include "changesim/dag.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <utility>

namespace changesim::dag {

std::string node_kind_token(NodeKind k) {
  switch (k) {
    case NodeKind::Observed:
      return "observed";
    case NodeKind::Latent:
      return "latent";
    case NodeKind::Deterministic:
      return "deterministic";
  }
  throw InternalError("unreachable node kind");
}

NodeKind parse_node_kind(const std::string& token) {
  if (token == "observed") return NodeKind::Observed;
  if (token == "latent") return NodeKind::Latent;
  if (token == "deterministic") return NodeKind::Deterministic;
  throw ValidationError("unknown node kind '" + token + "'");
}

std::size_t Dag::add_node(Node node) {
  if (has_node(node.name))
    throw ValidationError("duplicate node '" + node.name + "'");
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

std::size_t Dag::ensure_node(const std::string& n) {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].name == n) return i;
  nodes_.push_back(Node{n, NodeKind::Observed, false, false});
  return nodes_.size() - 1;
}

void Dag::add_edge(const std::string& from, const std::string& to,
                   std::optional<double> beta) {
  if (from == to) throw ValidationError("self-loop on node '" + from + "'");
  const std::size_t f = ensure_node(from);
  const std::size_t t = ensure_node(to);
  if (has_edge(from, to))
    throw ValidationError("duplicate edge " + from + " -> " + to);
  edges_.push_back(Edge{f, t, beta});
}

bool Dag::has_node(const std::string& name) const {
  return std::any_of(nodes_.begin(), nodes_.end(),
                     [&](const Node& n) { return n.name == name; });
}

std::size_t Dag::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].name == name) return i;
  throw UnknownNameError("unknown node '" + name + "'");
}

const Node& Dag::node(const std::string& name) const {
  return nodes_[index_of(name)];
}

bool Dag::has_edge(const std::string& from, const std::string& to) const {
  if (!has_node(from) || !has_node(to)) return false;
  const std::size_t f = index_of(from);
  const std::size_t t = index_of(to);
  return std::any_of(edges_.begin(), edges_.end(), [&](const Edge& e) {
    return e.from == f && e.to == t;
  });
}

std::vector<std::size_t> Dag::parents(std::size_t v) const {
  std::vector<std::size_t> out;
  for (const Edge& e : edges_)
    if (e.to == v) out.push_back(e.from);
  return out;
}

std::vector<std::size_t> Dag::children(std::size_t v) const {
  std::vector<std::size_t> out;
  for (const Edge& e : edges_)
    if (e.from == v) out.push_back(e.to);
  return out;
}

std::vector<std::size_t> Dag::topological_order() const {
  // Kahn's algorithm, preferring lower node indices for a stable order.
  std::vector<std::size_t> indegree(nodes_.size(), 0);
  for (const Edge& e : edges_) ++indegree[e.to];
  std::vector<std::size_t> order;
  std::vector<bool> placed(nodes_.size(), false);
  while (order.size() < nodes_.size()) {
    bool progressed = false;
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
      if (placed[v] || indegree[v] != 0) continue;
      placed[v] = true;
      order.push_back(v);
      for (const Edge& e : edges_)
        if (e.from == v) --indegree[e.to];
      progressed = true;
    }
    if (!progressed)
      throw ValidationError("cycle detected: graph is not a DAG");
  }
  return order;
}

namespace {

std::vector<std::size_t> closure(const Dag& d, std::size_t start,
                                 bool upward) {
  std::vector<bool> seen(d.nodes().size(), false);
  std::deque<std::size_t> queue{start};
  std::vector<std::size_t> out;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : upward ? d.parents(v) : d.children(v)) {
      if (seen[w]) continue;
      seen[w] = true;
      out.push_back(w);
      queue.push_back(w);
    }
  }
  return out;
}

}  // namespace

std::vector<std::size_t> Dag::ancestors(std::size_t v) const {
  return closure(*this, v, /*upward=*/true);
}

std::vector<std::size_t> Dag::descendants(std::size_t v) const {
  return closure(*this, v, /*upward=*/false);
}

bool Dag::has_directed_path(std::size_t from, std::size_t to) const {
  const auto desc = descendants(from);
  return std::find(desc.begin(), desc.end(), to) != desc.end();
}

void Dag::validate() const {
  (void)topological_order();  // throws on cycles
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (nodes_[v].kind != NodeKind::Deterministic) continue;
    const auto pars = parents(v);
    if (pars.empty())
      throw ValidationError("deterministic node '" + nodes_[v].name +
                            "' must have at least one parent");
    for (const Edge& e : edges_)
      if (e.to == v && !e.beta.has_value())
        throw ValidationError(
            "edge " + nodes_[e.from].name + " -> " + nodes_[v].name +
            " into a deterministic node needs a fixed coefficient (beta=)");
  }
}

// --- d-separation -----------------------------------------------------------

bool d_separated(const Dag& d, const std::vector<std::string>& a,
                 const std::vector<std::string>& b,
                 const std::vector<std::string>& z) {
  const std::size_t n = d.nodes().size();
  std::vector<bool> in_a(n, false), in_b(n, false), in_z(n, false);
  for (const auto& name : a) in_a[d.index_of(name)] = true;
  for (const auto& name : b) in_b[d.index_of(name)] = true;
  for (const auto& name : z) in_z[d.index_of(name)] = true;
  for (std::size_t v = 0; v < n; ++v)
    if ((in_a[v] && in_b[v]) || (in_a[v] && in_z[v]) || (in_b[v] && in_z[v]))
      throw ValidationError("d-separation query sets must be disjoint");

  // z together with all its ancestors: a collider passes the trail exactly
  // when it (or a descendant) is conditioned on, i.e. the collider is in
  // this set.
  std::vector<bool> anc_z(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (!in_z[v]) continue;
    anc_z[v] = true;
    for (std::size_t u : d.ancestors(v)) anc_z[u] = true;
  }

  // Reachability over (node, direction) states. "Up" means the trail enters
  // v from one of v's children (moving against the arrows); "down" means it
  // enters from a parent. Sources start as if entered from below.
  enum Dir { Up = 0, Down = 1 };
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<std::size_t, int>> queue;
  for (std::size_t v = 0; v < n; ++v)
    if (in_a[v]) queue.emplace_back(v, Up);

  while (!queue.empty()) {
    const auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = true;
    if (!in_z[v] && in_b[v]) return false;  // active trail reaches b

    if (dir == Up) {
      if (in_z[v]) continue;  // non-collider, blocked by conditioning
      for (std::size_t p : d.parents(v)) queue.emplace_back(p, Up);
      for (std::size_t c : d.children(v)) queue.emplace_back(c, Down);
    } else {
      if (!in_z[v])
        for (std::size_t c : d.children(v)) queue.emplace_back(c, Down);
      if (anc_z[v])  // collider at v is (or leads to) a conditioned node
        for (std::size_t p : d.parents(v)) queue.emplace_back(p, Up);
    }
  }
  return true;
}

// --- role classification ----------------------------------------------------

std::string role_display(Role r) {
  switch (r) {
    case Role::CompetingExposure:
      return "Competing exposure";
    case Role::Confounder:
      return "Confounder";
    case Role::Mediator:
      return "Mediator";
  }
  throw InternalError("unreachable role value");
}

Role classify_baseline_role(const Dag& d, const std::string& exposure,
                            const std::string& baseline,
                            const std::string& followup) {
  const std::size_t x = d.index_of(exposure);
  const std::size_t y0 = d.index_of(baseline);
  const std::size_t y1 = d.index_of(followup);
  if (x == y0 || x == y1 || y0 == y1)
    throw ValidationError("exposure, baseline and followup must be distinct");
  for (std::size_t v : {x, y0, y1})
    if (d.nodes()[v].kind != NodeKind::Observed)
      throw ValidationError("role node '" + d.nodes()[v].name +
                            "' must be observed");
  if (!d.has_directed_path(x, y1))
    throw ValidationError("no directed path from '" + exposure + "' to '" +
                          followup + "'");

  const bool baseline_causes_exposure = d.has_edge(baseline, exposure);
  const bool exposure_causes_baseline = d.has_edge(exposure, baseline);
  if (baseline_causes_exposure && exposure_causes_baseline)
    throw ValidationError(
        "unsupported pattern: edges in both directions between exposure and "
        "baseline");
  if (baseline_causes_exposure) return Role::Confounder;
  if (exposure_causes_baseline) return Role::Mediator;
  if (!d.has_directed_path(y0, y1))
    throw ValidationError(
        "unsupported pattern: baseline neither causes nor is caused by the "
        "exposure, and is not an ancestor of the follow-up");
  return Role::CompetingExposure;
}

Recommendation recommend_strategy(Role role, Estimand estimand) {
  if (estimand == Estimand::DirectEffect && role != Role::Mediator)
    throw ValidationError(
        "a direct effect is only defined when the baseline outcome is a "
        "mediator");
  switch (role) {
    case Role::Confounder:
      return {sem::Strategy::FollowUpAdjusted, {}};
    case Role::Mediator:
      if (estimand == Estimand::TotalEffect)
        return {sem::Strategy::FollowUpUnadjusted, {}};
      return {sem::Strategy::FollowUpAdjusted,
              {"conditioning on the mediator opens a bias path whenever the "
               "mediator and the follow-up outcome share an unmeasured cause, "
               "so direct-effect estimation carries extra methodological "
               "difficulty"}};
    case Role::CompetingExposure:
      return {sem::Strategy::FollowUpUnadjusted,
              {"a change-score analysis avoids inferential bias only in this "
               "configuration, where exposure and baseline outcome are "
               "independent",
               "adjusting for the baseline outcome additionally shuts "
               "residual confounding routes when that independence is "
               "imperfect"}};
  }
  throw InternalError("unreachable role value");
}

}  // namespace changesim::dag
