#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "changesim/dag.hpp"
#include "changesim/errors.hpp"
#include "changesim/strategy.hpp"

#include "json.hpp"

namespace changesim::sem {

// Model-implied covariance over named variables. Standardized form holds
// dimensionless correlations (unit diagonal for non-deterministic nodes);
// unstandardized form is in products of the two variables' units.
struct CovMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd m;

  std::size_t index_of(const std::string& name) const;
  double at(const std::string& a, const std::string& b) const;
};

// A Dag with linear-Gaussian semantics: standardized path coefficients on
// edges, a (mean, sd) scale per node, and residual SDs derived so that every
// non-deterministic node has unit standardized variance. Deterministic nodes
// are fixed linear composites of their parents in raw units; their derived
// scale is (combined mean, 1).
struct LinearSem {
  dag::Dag graph;
  std::vector<double> beta;  // per edge, parallel to graph.edges()
  std::vector<double> mean;  // per node
  std::vector<double> sd;    // per node, > 0
  std::vector<double> residual_sd;  // per node, filled by solve
  bool residuals_solved = false;

  // Builds from a Dag whose edges carry beta attributes. Scales default to
  // (0, 1) and can be overridden per node.
  static LinearSem from_dag(
      const dag::Dag& d,
      const std::vector<std::pair<std::string, std::pair<double, double>>>&
          scales = {});

  // Standardized coefficient the covariance algebra uses for edge e: the
  // plain path coefficient, except that a fixed raw-unit weight into a
  // deterministic node is rescaled by the parent's sd.
  double effective_std_coeff(std::size_t edge_index) const;
};

// Populates residual SDs in topological order: residual variance of each
// non-deterministic node is 1 minus the variance of its linear parent
// combination. Also derives deterministic nodes' means and unit sd. Throws
// NonPositiveResidualError when a parent combination has variance > 1.
LinearSem solve_residual_variances(LinearSem sem);

CovMatrix implied_covariance(const LinearSem& sem, bool standardized);

// Sum over all directed paths x -> ... -> y of the product of standardized
// edge coefficients. Computed twice (path enumeration and the cumulative
// matrix expansion); the two must agree to 1e-12. Returns 0 when no directed
// path exists.
double total_effect(const LinearSem& sem, const std::string& x,
                    const std::string& y);

// Standardized -> raw units: coef * sd(y) / sd(x).
double to_unstandardized(double coef, const LinearSem& sem,
                         const std::string& x, const std::string& y);

// Analytic expectation of the exposure coefficient each strategy's
// population regression would produce, in outcome units per exposure unit.
// With raw covariances C: Unadjusted = C(x,y1)/C(x,x); ChangeScore =
// [C(x,y1) - C(x,y0)]/C(x,x); Adjusted = exposure entry of the two-regressor
// least-squares solution on {x, y0}.
double expected_coefficient(const LinearSem& sem, Strategy strategy,
                            const std::string& exposure,
                            const std::string& baseline,
                            const std::string& followup);

// Partial correlation of a and b given z, from a covariance matrix, via the
// inverse of the submatrix over {a, b} union z.
double partial_correlation(const CovMatrix& cov, const std::string& a,
                           const std::string& b,
                           const std::vector<std::string>& z);

// Lossless JSON round-trip: {nodes:[{name,kind,mean,sd}],
// edges:[{from,to,beta}]}.
nlohmann::ordered_json sem_to_json(const LinearSem& sem);
LinearSem sem_from_json(const nlohmann::json& j);

}  // namespace changesim::sem
