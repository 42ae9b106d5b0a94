#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "changesim/bindings.hpp"
#include "changesim/dataset.hpp"
#include "changesim/errors.hpp"
#include "changesim/strategy.hpp"

namespace changesim::analysis {

// Least-squares fit with intercept. Construction enforces the residual
// orthogonality invariant (residuals orthogonal to every regressor column
// and to the constant column within 1e-8 relative tolerance).
struct OlsFit {
  std::map<std::string, double> coefficients;  // response units per regressor unit
  double intercept = 0.0;
  double rss = 0.0;
  std::size_t n = 0;
};

// Minimizes squared error of response on the named regressor columns plus an
// intercept. Requires at least two more rows than regressors. Throws
// RankDeficientError when the design's reciprocal condition number is below
// 1e-12 (e.g. duplicated columns).
OlsFit fit_ols(const std::vector<std::string>& names,
               const std::vector<const std::vector<double>*>& columns,
               const std::vector<double>& response);

// Element-wise y1 - y0.
std::vector<double> make_change_score(const std::vector<double>& y0,
                                      const std::vector<double>& y1);

struct AnalysisResult {
  std::string strategy;  // canonical token, e.g. "change-score"
  double coefficient = 0.0;  // the exposure coefficient of interest
  OlsFit fit;
  Bindings bindings;
};

// Runs one of the three strategies on named dataset columns:
// ChangeScore: (followup - baseline) ~ exposure; FollowUpAdjusted:
// followup ~ exposure + baseline; FollowUpUnadjusted: followup ~ exposure.
// Latent columns are rejected.
AnalysisResult run_strategy(const mc::Dataset& data, sem::Strategy strategy,
                            const std::string& exposure,
                            const std::string& baseline,
                            const std::string& followup);

// Baseline-adjusted change-score analysis, (followup - baseline) ~ exposure
// + baseline. Its exposure coefficient equals FollowUpAdjusted's exactly;
// offered for that demonstration.
AnalysisResult run_change_score_adjusted(const mc::Dataset& data,
                                         const std::string& exposure,
                                         const std::string& baseline,
                                         const std::string& followup);

// Pearson correlation; requires both inputs to have positive variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Draws two independent standard-normal columns y0, y1 of length n and
// returns (corr(y0, y1-y0), corr(y1, y1-y0)): the tautological +/- 1/sqrt(2)
// association of a difference score with its components. Requires n >= 10.
std::pair<double, double> oldham_correlation(std::size_t n,
                                             std::uint64_t seed);

}  // namespace changesim::analysis
