#pragma once

#include <Eigen/Dense>
#include <vector>

#include "auxcop/rng.hpp"

namespace auxcop {

struct Hyperparameters {
  double a1 = 2.0;
  double a2 = 3.0;
  double nu = 3.0;
  double a_sigma = 1.0;
  double b_sigma = 0.3;
  int rank = 0;  // 0 means k = d

  int resolved_rank(int d) const { return rank > 0 ? rank : d; }
};

/// z_i = alpha + Lambda eta_i + eps_i, eps_i ~ N(0, diag(sigma2)), with the
/// multiplicative gamma shrinkage prior on the columns of Lambda.
struct FactorState {
  Eigen::MatrixXd lambda;  // d x k
  Eigen::VectorXd sigma2;  // d
  Eigen::MatrixXd eta;     // n x k
  Eigen::VectorXd alpha;   // d; fixed at 0 unless free_intercept[j]
  Eigen::MatrixXd phi;     // d x k local precisions
  Eigen::VectorXd delta;   // k
  Eigen::VectorXd xi;      // k, running product of delta
  std::vector<bool> free_intercept;

  Eigen::Index dim() const { return lambda.rows(); }
  Eigen::Index rank() const { return lambda.cols(); }
  Eigen::Index rows() const { return eta.rows(); }
  void refresh_xi();
};

/// Lambda entries N(0, 0.01), sigma2 = 1, eta = 0, alpha = 0, unit shrinkage.
FactorState init_factor_state(Rng& rng, Eigen::Index n, Eigen::Index d, Eigen::Index k,
                              std::vector<bool> free_intercept);

/// Joint draw of every parameter from the prior (eta included).
FactorState sample_factor_prior(Rng& rng, Eigen::Index n, Eigen::Index d,
                                const Hyperparameters& hyper, std::vector<bool> free_intercept);

/// Row j of Lambda given column j of z. `eta_gram` is eta' eta.
void update_loadings_row(Rng& rng, FactorState& s, const Eigen::MatrixXd& z, Eigen::Index j,
                         const Eigen::MatrixXd& eta_gram);
void update_loadings(Rng& rng, FactorState& s, const Eigen::MatrixXd& z);

void update_sigma2(Rng& rng, FactorState& s, const Hyperparameters& hyper,
                   const Eigen::MatrixXd& z, Eigen::Index j);

/// eta_i given row i of z, for a single row.
void update_factor_row(Rng& rng, FactorState& s, const Eigen::MatrixXd& z, Eigen::Index i);
/// All rows at once; the posterior precision I + Lambda' Sigma^{-1} Lambda is shared.
void update_factors(Rng& rng, FactorState& s, const Eigen::MatrixXd& z);

/// phi, then delta_1..delta_k in order, then xi.
void update_shrinkage(Rng& rng, FactorState& s, const Hyperparameters& hyper);

/// alpha_j under its N(0, 1) prior. Throws ContractViolation for columns whose
/// intercept is pinned at zero.
void update_intercept(Rng& rng, FactorState& s, const Eigen::MatrixXd& z, Eigen::Index j);

/// One full pass of the parameter updates given the latent matrix:
/// loadings, sigma2, factors, shrinkage, intercepts.
void update_parameters(Rng& rng, FactorState& s, const Hyperparameters& hyper,
                       const Eigen::MatrixXd& z);

/// Lambda Lambda' + Sigma.
Eigen::MatrixXd covariance_from_factor(const FactorState& s);
/// D^{-1/2} Omega D^{-1/2}, D = diag(Omega).
Eigen::MatrixXd correlation_from_factor(const FactorState& s);

}  // namespace auxcop
