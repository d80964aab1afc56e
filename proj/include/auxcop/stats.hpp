#pragma once

#include <Eigen/Dense>
#include <limits>

#include "auxcop/rng.hpp"

namespace auxcop {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- standard normal -------------------------------------------------------

double norm_pdf(double x);
/// Phi(x).
double norm_cdf(double x);
/// 1 - Phi(x), computed without cancellation in the upper tail.
double norm_sf(double x);
/// Phi^{-1}(p); returns -inf at p = 0 and +inf at p = 1.
double norm_quantile(double p);

// ---- truncated normal ------------------------------------------------------

struct TruncationInterval {
  double lo = -kInf;
  double hi = kInf;
};

struct ConditionalMoments {
  double mu = 0.0;
  double sigma2 = 1.0;
};

/// Draw from N(mu, sigma2) restricted to (lo, hi). The result is strictly
/// inside the interval. Inverse-CDF in the bulk, exponential or uniform
/// rejection once the interval mass drops below 1e-10.
double sample_truncated_normal(Rng& rng, const ConditionalMoments& moments,
                               const TruncationInterval& interval);

/// Standard-normal version on the standardised bounds (a, b).
double sample_std_truncated_normal(Rng& rng, double a, double b);

// ---- Gaussian conditionals -------------------------------------------------

/// Cholesky factor of a symmetric PD matrix. Tries the matrix as given and then
/// adds jitter 1e-10, 1e-9, ..., 1e-6 to the diagonal; throws SingularSubmatrix
/// if every rung fails or reports a condition number above 1e12.
Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& m);

/// Full conditional of coordinate j of N(alpha, C) given the other coordinates of z.
ConditionalMoments conditional_moments(const Eigen::MatrixXd& c, const Eigen::VectorXd& alpha,
                                       const Eigen::VectorXd& z, Eigen::Index j);

/// P(R_j = 1 | z_y) under a Gaussian copula whose last row/column is the
/// missingness indicator latent and whose leading p x p block is the study block.
double missingness_probability(const Eigen::MatrixXd& c_sub, double alpha_r,
                               const Eigen::VectorXd& z_y);

/// Coefficients b in alpha* = alpha_r + b' z_y; the mechanism is monotone
/// increasing in each z_k with b_k > 0.
Eigen::VectorXd missingness_coefficients(const Eigen::MatrixXd& c_sub);

/// P(a_lo < X <= a_hi, b_lo < Y <= b_hi) for a standard bivariate normal with
/// correlation rho. Infinite limits are allowed.
double bivariate_normal_rect(double rho, double a_lo, double a_hi, double b_lo, double b_hi);

}  // namespace auxcop
