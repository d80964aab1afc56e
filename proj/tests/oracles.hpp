#pragma once

// Reference computations used only by the tests. Each one is built from a
// different route than the library code it checks (Boost special functions,
// dense inverses, brute-force quadrature, hand formulas).

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double phi_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2); }

inline double phi_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

inline double phi_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Conditional mean and variance of coordinate j through the precision matrix:
/// var = 1 / Q_jj, mean = alpha_j - sum_{k != j} Q_jk (z_k - alpha_k) / Q_jj.
inline std::pair<double, double> conditional_by_precision(const Eigen::MatrixXd& c,
                                                          const Eigen::VectorXd& alpha,
                                                          const Eigen::VectorXd& z,
                                                          Eigen::Index j) {
  const Eigen::MatrixXd q = c.inverse();
  double s = 0.0;
  for (Eigen::Index k = 0; k < c.rows(); ++k)
    if (k != j) s += q(j, k) * (z(k) - alpha(k));
  return {alpha(j) - s / q(j, j), 1.0 / q(j, j)};
}

/// P(a_lo < X <= a_hi, b_lo < Y <= b_hi) by integrating phi(x) times the
/// conditional probability of Y over x.
inline double bvn_rect_quadrature(double rho, double a_lo, double a_hi, double b_lo, double b_hi) {
  const double lo = std::max(a_lo, -12.0);
  const double hi = std::min(a_hi, 12.0);
  if (!(hi > lo)) return 0.0;
  const double s = std::sqrt(1.0 - rho * rho);
  auto f = [&](double x) {
    const double u = b_hi >= 1e300 ? 1.0 : phi_cdf((b_hi - rho * x) / s);
    const double l = b_lo <= -1e300 ? 0.0 : phi_cdf((b_lo - rho * x) / s);
    return phi_pdf(x) * (u - l);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
}

inline double orthant(double rho) { return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi); }

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Asymptotic critical value of the KS statistic at level alpha.
inline double ks_critical(std::size_t n, double alpha = 0.01) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

/// CDF of N(mu, s^2) truncated to (lo, hi).
inline std::function<double(double)> truncated_cdf(double mu, double s, double lo, double hi) {
  return [=](double x) {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    const double a = (lo - mu) / s, b = (hi - mu) / s, t = (x - mu) / s;
    // Work in the tail that keeps precision.
    if (a > 0.0) {
      const double qa = phi_cdf(-a), qb = phi_cdf(-b), qt = phi_cdf(-t);
      return (qa - qt) / (qa - qb);
    }
    return (phi_cdf(t) - phi_cdf(a)) / (phi_cdf(b) - phi_cdf(a));
  };
}

/// Rubin's rules written out directly.
struct Rubin {
  double qbar, ubar, b, t;
};
inline Rubin rubin(const std::vector<double>& q, const std::vector<double>& u) {
  const double m = static_cast<double>(q.size());
  double qbar = 0.0, ubar = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    qbar += q[i] / m;
    ubar += u[i] / m;
  }
  double b = 0.0;
  for (double v : q) b += (v - qbar) * (v - qbar) / (m - 1.0);
  return {qbar, ubar, b, ubar + (1.0 + 1.0 / m) * b};
}

/// Normal-equations least squares.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (x.transpose() * x).inverse() * (x.transpose() * y);
}

/// Log of an unnormalized Gaussian density, used for grid checks of
/// conjugate updates.
inline double log_normal_kernel(double x, double mean, double var) {
  return -0.5 * (x - mean) * (x - mean) / var;
}

}  // namespace oracle
