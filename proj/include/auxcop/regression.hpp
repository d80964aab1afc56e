#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "auxcop/core_types.hpp"
#include "auxcop/rng.hpp"

namespace auxcop {

struct DesignSpec {
  std::string response;
  std::vector<std::string> covariates;
  /// Centre numeric covariates and scale them to standard deviation 0.5.
  bool scale_numeric = false;
};

struct Design {
  Eigen::MatrixXd x;  // intercept first
  Eigen::VectorXd y;
  std::vector<std::string> names;
};

/// Intercept plus covariates; categorical covariates become indicators for
/// every level but the first ("col=level"). `values` must have no NaN.
Design build_design(const std::vector<ColumnSchema>& schemas, const Eigen::MatrixXd& values,
                    const DesignSpec& spec);

struct RegressionFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd var;  // sampling variance of each coefficient
  std::vector<std::string> names;
};

/// Least squares with variances sigma^2 (X'X)^{-1}. Throws RankDeficient.
RegressionFit fit_ols(const Design& design);

/// Sum of rho_tau(y - X beta).
double pinball_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta, double tau);

/// Exact minimizer of the pinball loss. A few reweighted least-squares passes
/// give a starting point (or `start`, when given) and a descent over basic
/// solutions finishes. Throws RankDeficient.
Eigen::VectorXd quantile_coefficients(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      double tau, const Eigen::VectorXd& start = {});

/// Quantile regression with nonparametric bootstrap variances.
RegressionFit fit_quantile_regression(const Design& design, double tau, Rng& rng,
                                      int bootstrap = 200);

}  // namespace auxcop
