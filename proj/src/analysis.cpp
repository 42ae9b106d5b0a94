#include "changesim/analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace changesim::analysis {

OlsFit fit_ols(const std::vector<std::string>& names,
               const std::vector<const std::vector<double>*>& columns,
               const std::vector<double>& response) {
  if (names.size() != columns.size())
    throw InternalError("regressor names and columns disagree");
  const std::size_t n = response.size();
  const std::size_t k = columns.size();
  for (std::size_t i = 0; i < k; ++i)
    if (columns[i]->size() != n)
      throw ValidationError("regressor '" + names[i] +
                            "' length differs from the response");
  if (n < k + 2)
    throw UserError("need at least " + std::to_string(k + 2) +
                    " rows to fit " + std::to_string(k) +
                    " regressors plus an intercept");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(k + 1);
  Eigen::MatrixXd X(rows, cols);
  X.col(0).setOnes();
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) =
          (*columns[j])[i];
  Eigen::VectorXd y(rows);
  for (std::size_t i = 0; i < n; ++i)
    y(static_cast<Eigen::Index>(i)) = response[i];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::VectorXd rdiag =
      qr.matrixR().topLeftCorner(cols, cols).diagonal().cwiseAbs();
  const double rmax = rdiag.maxCoeff();
  if (rmax == 0.0 || rdiag.minCoeff() / rmax < 1e-12)
    throw RankDeficientError(
        "rank-deficient design: regressors are collinear");
  const Eigen::VectorXd b = qr.solve(y);

  const Eigen::VectorXd resid = y - X * b;
  // Orthogonality is the defining normal-equation property; a violation
  // means the solve silently failed, so it is checked on every fit.
  const double ynorm = y.norm() + 1.0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double denom = X.col(j).norm() * ynorm;
    if (std::abs(resid.dot(X.col(j))) > 1e-8 * denom)
      throw InternalError("residuals are not orthogonal to regressor " +
                          std::to_string(j));
  }

  OlsFit fit;
  fit.intercept = b(0);
  for (std::size_t j = 0; j < k; ++j)
    fit.coefficients[names[j]] = b(static_cast<Eigen::Index>(j + 1));
  fit.rss = resid.squaredNorm();
  fit.n = n;
  return fit;
}

std::vector<double> make_change_score(const std::vector<double>& y0,
                                      const std::vector<double>& y1) {
  if (y0.size() != y1.size())
    throw ValidationError("change score needs equal-length columns");
  std::vector<double> delta(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) delta[i] = y1[i] - y0[i];
  return delta;
}

namespace {

const std::vector<double>& analysis_column(const mc::Dataset& data,
                                           const std::string& name) {
  const mc::Column& col = data.column(name);
  if (col.kind == mc::ColumnKind::Latent)
    throw ValidationError("column '" + name +
                          "' is latent and not available for analysis");
  return col.values;
}

}  // namespace

AnalysisResult run_strategy(const mc::Dataset& data, sem::Strategy strategy,
                            const std::string& exposure,
                            const std::string& baseline,
                            const std::string& followup) {
  const std::vector<double>& x = analysis_column(data, exposure);
  const std::vector<double>& y0 = analysis_column(data, baseline);
  const std::vector<double>& y1 = analysis_column(data, followup);

  AnalysisResult result;
  result.strategy = sem::strategy_token(strategy);
  result.bindings = {exposure, baseline, followup};
  switch (strategy) {
    case sem::Strategy::ChangeScore: {
      const std::vector<double> delta = make_change_score(y0, y1);
      result.fit = fit_ols({exposure}, {&x}, delta);
      break;
    }
    case sem::Strategy::FollowUpAdjusted:
      result.fit = fit_ols({exposure, baseline}, {&x, &y0}, y1);
      break;
    case sem::Strategy::FollowUpUnadjusted:
      result.fit = fit_ols({exposure}, {&x}, y1);
      break;
  }
  result.coefficient = result.fit.coefficients.at(exposure);
  return result;
}

AnalysisResult run_change_score_adjusted(const mc::Dataset& data,
                                         const std::string& exposure,
                                         const std::string& baseline,
                                         const std::string& followup) {
  const std::vector<double>& x = analysis_column(data, exposure);
  const std::vector<double>& y0 = analysis_column(data, baseline);
  const std::vector<double>& y1 = analysis_column(data, followup);
  const std::vector<double> delta = make_change_score(y0, y1);
  AnalysisResult result;
  result.strategy = "change-score-adjusted";
  result.bindings = {exposure, baseline, followup};
  result.fit = fit_ols({exposure, baseline}, {&x, &y0}, delta);
  result.coefficient = result.fit.coefficients.at(exposure);
  return result;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw ValidationError("correlation needs two equal-length columns");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    throw ValidationError("correlation undefined for a constant column");
  return sab / std::sqrt(saa * sbb);
}

std::pair<double, double> oldham_correlation(std::size_t n,
                                             std::uint64_t seed) {
  if (n < 10) throw UsageError("oldham needs n >= 10");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> y0(n), y1(n);
  for (std::size_t i = 0; i < n; ++i) y0[i] = normal(rng);
  for (std::size_t i = 0; i < n; ++i) y1[i] = normal(rng);
  const std::vector<double> delta = make_change_score(y0, y1);
  return {pearson(y0, delta), pearson(y1, delta)};
}

}  // namespace changesim::analysis
