#include "changesim/sem.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace changesim::sem {

std::size_t CovMatrix::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw UnknownNameError("unknown variable '" + name + "'");
}

double CovMatrix::at(const std::string& a, const std::string& b) const {
  return m(static_cast<Eigen::Index>(index_of(a)),
           static_cast<Eigen::Index>(index_of(b)));
}

LinearSem LinearSem::from_dag(
    const dag::Dag& d,
    const std::vector<std::pair<std::string, std::pair<double, double>>>&
        scales) {
  d.validate();
  LinearSem sem;
  sem.graph = d;
  sem.beta.reserve(d.edges().size());
  for (const dag::Edge& e : d.edges()) {
    if (!e.beta.has_value())
      throw ValidationError("edge " + d.nodes()[e.from].name + " -> " +
                            d.nodes()[e.to].name +
                            " has no path coefficient (beta=)");
    sem.beta.push_back(*e.beta);
  }
  sem.mean.assign(d.nodes().size(), 0.0);
  sem.sd.assign(d.nodes().size(), 1.0);
  for (const auto& [name, ms] : scales) {
    const std::size_t i = d.index_of(name);
    if (ms.second <= 0.0)
      throw ValidationError("node '" + name + "' needs sd > 0");
    sem.mean[i] = ms.first;
    sem.sd[i] = ms.second;
  }
  return sem;
}

double LinearSem::effective_std_coeff(std::size_t edge_index) const {
  const dag::Edge& e = graph.edges()[edge_index];
  if (graph.nodes()[e.to].kind == dag::NodeKind::Deterministic)
    return beta[edge_index] * sd[e.from];
  return beta[edge_index];
}

namespace {

// Shared topological covariance recursion. Builds the standardized
// covariance; when solving, derives residual variances (and deterministic
// scales) along the way, otherwise consumes the stored ones.
Eigen::MatrixXd std_cov_recursion(LinearSem& sem, bool solving) {
  const auto& d = sem.graph;
  const std::size_t n = d.nodes().size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
  if (solving) {
    sem.residual_sd.assign(n, 0.0);
    // Deterministic scales are derived, not free: raw value equals the fixed
    // parent combination, so mean follows from parent means and sd is 1
    // (standardized and raw deviations coincide).
    for (std::size_t v : d.topological_order()) {
      if (d.nodes()[v].kind != dag::NodeKind::Deterministic) continue;
      double mu = 0.0;
      for (std::size_t ei = 0; ei < d.edges().size(); ++ei)
        if (d.edges()[ei].to == v) mu += sem.beta[ei] * sem.mean[d.edges()[ei].from];
      sem.mean[v] = mu;
      sem.sd[v] = 1.0;
    }
  }

  for (std::size_t v : d.topological_order()) {
    // Incoming edges with their effective standardized coefficients.
    std::vector<std::pair<std::size_t, double>> in;  // (parent, coeff)
    for (std::size_t ei = 0; ei < d.edges().size(); ++ei)
      if (d.edges()[ei].to == v)
        in.emplace_back(d.edges()[ei].from, sem.effective_std_coeff(ei));

    const auto vi = static_cast<Eigen::Index>(v);
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v) continue;
      const auto ui = static_cast<Eigen::Index>(u);
      double c = 0.0;
      for (const auto& [p, b] : in)
        c += b * cov(static_cast<Eigen::Index>(p), ui);
      // Only entries of already-processed nodes are non-zero here; later
      // nodes overwrite symmetrically when their turn comes.
      if (c != 0.0) {
        cov(vi, ui) = c;
        cov(ui, vi) = c;
      }
    }
    double combo = 0.0;
    for (const auto& [p1, b1] : in)
      for (const auto& [p2, b2] : in)
        combo += b1 * b2 *
                 cov(static_cast<Eigen::Index>(p1),
                     static_cast<Eigen::Index>(p2));
    if (d.nodes()[v].kind == dag::NodeKind::Deterministic) {
      cov(vi, vi) = combo;
      if (solving) sem.residual_sd[v] = 0.0;
    } else {
      if (solving) {
        const double resid = 1.0 - combo;
        if (resid < -1e-9)
          throw NonPositiveResidualError(d.nodes()[v].name, combo);
        sem.residual_sd[v] = std::sqrt(std::max(resid, 0.0));
      }
      cov(vi, vi) = 1.0;
    }
  }
  return cov;
}

}  // namespace

LinearSem solve_residual_variances(LinearSem sem) {
  (void)std_cov_recursion(sem, /*solving=*/true);
  sem.residuals_solved = true;
  return sem;
}

CovMatrix implied_covariance(const LinearSem& sem, bool standardized) {
  if (!sem.residuals_solved)
    throw InternalError("implied_covariance requires solved residuals");
  LinearSem scratch = sem;
  Eigen::MatrixXd cov = std_cov_recursion(scratch, /*solving=*/false);
  CovMatrix out;
  for (const dag::Node& node : sem.graph.nodes()) out.names.push_back(node.name);
  if (!standardized) {
    const auto n = static_cast<Eigen::Index>(sem.graph.nodes().size());
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i)
      scale(i) = sem.sd[static_cast<std::size_t>(i)];
    cov = scale.asDiagonal() * cov * scale.asDiagonal();
  }
  out.m = std::move(cov);
  return out;
}

double total_effect(const LinearSem& sem, const std::string& x,
                    const std::string& y) {
  const auto& d = sem.graph;
  const std::size_t from = d.index_of(x);
  const std::size_t to = d.index_of(y);

  // Route 1: depth-first enumeration of directed paths.
  double path_sum = 0.0;
  std::vector<std::pair<std::size_t, double>> stack{{from, 1.0}};
  while (!stack.empty()) {
    const auto [v, prod] = stack.back();
    stack.pop_back();
    for (std::size_t ei = 0; ei < d.edges().size(); ++ei) {
      if (d.edges()[ei].from != v) continue;
      const std::size_t w = d.edges()[ei].to;
      const double p = prod * sem.effective_std_coeff(ei);
      if (w == to)
        path_sum += p;
      else
        stack.emplace_back(w, p);
    }
  }

  // Route 2: cumulative expansion of the coefficient matrix. B is nilpotent
  // on a DAG, so the geometric series terminates after n-1 powers.
  const auto n = static_cast<Eigen::Index>(d.nodes().size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t ei = 0; ei < d.edges().size(); ++ei)
    B(static_cast<Eigen::Index>(d.edges()[ei].to),
      static_cast<Eigen::Index>(d.edges()[ei].from)) =
        sem.effective_std_coeff(ei);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd power = B;
  for (Eigen::Index k = 1; k < n; ++k) {
    total += power;
    power = power * B;
  }
  const double matrix_sum =
      total(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from));

  if (std::abs(path_sum - matrix_sum) > 1e-12)
    throw InternalError("total-effect routes disagree: path " +
                        std::to_string(path_sum) + " vs matrix " +
                        std::to_string(matrix_sum));
  return path_sum;
}

double to_unstandardized(double coef, const LinearSem& sem,
                         const std::string& x, const std::string& y) {
  return coef * sem.sd[sem.graph.index_of(y)] / sem.sd[sem.graph.index_of(x)];
}

double expected_coefficient(const LinearSem& sem, Strategy strategy,
                            const std::string& exposure,
                            const std::string& baseline,
                            const std::string& followup) {
  const CovMatrix c = implied_covariance(sem, /*standardized=*/false);
  const double cxx = c.at(exposure, exposure);
  const double cxy0 = c.at(exposure, baseline);
  const double cxy1 = c.at(exposure, followup);
  switch (strategy) {
    case Strategy::FollowUpUnadjusted:
      return cxy1 / cxx;
    case Strategy::ChangeScore:
      return (cxy1 - cxy0) / cxx;
    case Strategy::FollowUpAdjusted: {
      const double cy0y0 = c.at(baseline, baseline);
      const double cy0y1 = c.at(baseline, followup);
      const double det = cxx * cy0y0 - cxy0 * cxy0;
      if (det <= 1e-12 * cxx * cy0y0)
        throw UserError(
            "singular two-regressor system: exposure and baseline are "
            "perfectly correlated");
      return (cy0y0 * cxy1 - cxy0 * cy0y1) / det;
    }
  }
  throw InternalError("unreachable strategy value");
}

double partial_correlation(const CovMatrix& cov, const std::string& a,
                           const std::string& b,
                           const std::vector<std::string>& z) {
  std::vector<std::size_t> idx{cov.index_of(a), cov.index_of(b)};
  for (const auto& name : z) idx.push_back(cov.index_of(name));
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      sub(i, j) = cov.m(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                        static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
  const Eigen::MatrixXd prec = sub.inverse();
  return -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
}

nlohmann::ordered_json sem_to_json(const LinearSem& sem) {
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < sem.graph.nodes().size(); ++i) {
    const dag::Node& n = sem.graph.nodes()[i];
    j["nodes"].push_back({{"name", n.name},
                          {"kind", dag::node_kind_token(n.kind)},
                          {"mean", sem.mean[i]},
                          {"sd", sem.sd[i]}});
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (std::size_t ei = 0; ei < sem.graph.edges().size(); ++ei) {
    const dag::Edge& e = sem.graph.edges()[ei];
    j["edges"].push_back({{"from", sem.graph.nodes()[e.from].name},
                          {"to", sem.graph.nodes()[e.to].name},
                          {"beta", sem.beta[ei]}});
  }
  return j;
}

LinearSem sem_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
    throw ValidationError("SEM JSON needs 'nodes' and 'edges' arrays");
  dag::Dag d;
  std::vector<std::pair<std::string, std::pair<double, double>>> scales;
  for (const auto& jn : j.at("nodes")) {
    if (!jn.contains("name"))
      throw ValidationError("SEM JSON node without a 'name'");
    dag::Node node;
    node.name = jn.at("name").get<std::string>();
    node.kind = dag::parse_node_kind(jn.value("kind", "observed"));
    d.add_node(node);
    scales.emplace_back(node.name,
                        std::make_pair(jn.value("mean", 0.0), jn.value("sd", 1.0)));
  }
  for (const auto& je : j.at("edges")) {
    if (!je.contains("from") || !je.contains("to") || !je.contains("beta"))
      throw ValidationError("SEM JSON edge needs 'from', 'to' and 'beta'");
    const std::string from = je.at("from").get<std::string>();
    const std::string to = je.at("to").get<std::string>();
    if (!d.has_node(from) || !d.has_node(to))
      throw ValidationError("SEM JSON edge endpoint not declared in 'nodes'");
    d.add_edge(from, to, je.at("beta").get<double>());
  }
  return LinearSem::from_dag(d, scales);
}

}  // namespace changesim::sem
