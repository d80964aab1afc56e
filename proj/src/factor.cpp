#include "auxcop/factor.hpp"

#include "auxcop/error.hpp"
#include "auxcop/stats.hpp"

namespace auxcop {

namespace {

Eigen::VectorXd standard_normals(Rng& rng, Eigen::Index k) {
  Eigen::VectorXd e(k);
  for (Eigen::Index h = 0; h < k; ++h) e(h) = rng.normal();
  return e;
}

// Draw from N(P^{-1} b, P^{-1}) given the Cholesky factor of P.
Eigen::VectorXd draw_canonical(Rng& rng, const Eigen::LLT<Eigen::MatrixXd>& llt,
                               const Eigen::VectorXd& b) {
  Eigen::VectorXd x = llt.solve(b);
  x += llt.matrixU().solve(standard_normals(rng, b.size()));
  return x;
}

}  // namespace

void FactorState::refresh_xi() {
  xi.resize(delta.size());
  double prod = 1.0;
  for (Eigen::Index h = 0; h < delta.size(); ++h) {
    prod *= delta(h);
    xi(h) = prod;
  }
}

FactorState init_factor_state(Rng& rng, Eigen::Index n, Eigen::Index d, Eigen::Index k,
                              std::vector<bool> free_intercept) {
  if (static_cast<Eigen::Index>(free_intercept.size()) != d)
    throw Error(Errc::contract_violation, "free_intercept size must equal d");
  FactorState s;
  s.lambda.resize(d, k);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index h = 0; h < k; ++h) s.lambda(j, h) = rng.normal(0.0, 0.1);
  s.sigma2 = Eigen::VectorXd::Ones(d);
  s.eta = Eigen::MatrixXd::Zero(n, k);
  s.alpha = Eigen::VectorXd::Zero(d);
  s.phi = Eigen::MatrixXd::Ones(d, k);
  s.delta = Eigen::VectorXd::Ones(k);
  s.free_intercept = std::move(free_intercept);
  s.refresh_xi();
  return s;
}

FactorState sample_factor_prior(Rng& rng, Eigen::Index n, Eigen::Index d,
                                const Hyperparameters& hyper, std::vector<bool> free_intercept) {
  const Eigen::Index k = hyper.resolved_rank(static_cast<int>(d));
  FactorState s = init_factor_state(rng, n, d, k, std::move(free_intercept));
  for (Eigen::Index h = 0; h < k; ++h)
    s.delta(h) = rng.gamma(h == 0 ? hyper.a1 : hyper.a2, 1.0);
  s.refresh_xi();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index h = 0; h < k; ++h) {
      s.phi(j, h) = rng.gamma(0.5 * hyper.nu, 0.5 * hyper.nu);
      s.lambda(j, h) = rng.normal() / std::sqrt(s.phi(j, h) * s.xi(h));
    }
    s.sigma2(j) = 1.0 / rng.gamma(hyper.a_sigma, hyper.b_sigma);
    s.alpha(j) = s.free_intercept[static_cast<std::size_t>(j)] ? rng.normal() : 0.0;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index h = 0; h < k; ++h) s.eta(i, h) = rng.normal();
  return s;
}

void update_loadings_row(Rng& rng, FactorState& s, const Eigen::MatrixXd& z, Eigen::Index j,
                         const Eigen::MatrixXd& eta_gram) {
  const double prec = 1.0 / s.sigma2(j);
  Eigen::MatrixXd p = eta_gram * prec;
  p.diagonal() += (s.phi.row(j).transpose().array() * s.xi.array()).matrix();
  const Eigen::VectorXd b =
      s.eta.transpose() * (z.col(j).array() - s.alpha(j)).matrix() * prec;
  s.lambda.row(j) = draw_canonical(rng, robust_cholesky(p), b).transpose();
}

void update_loadings(Rng& rng, FactorState& s, const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd gram = s.eta.transpose() * s.eta;
  for (Eigen::Index j = 0; j < s.dim(); ++j) update_loadings_row(rng, s, z, j, gram);
}

void update_sigma2(Rng& rng, FactorState& s, const Hyperparameters& hyper,
                   const Eigen::MatrixXd& z, Eigen::Index j) {
  const Eigen::Index n = z.rows();
  double rss = 0.0;
  if (n > 0) {
    const Eigen::VectorXd resid =
        (z.col(j).array() - s.alpha(j)).matrix() - s.eta * s.lambda.row(j).transpose();
    rss = resid.squaredNorm();
  }
  const double precision =
      rng.gamma(hyper.a_sigma + 0.5 * static_cast<double>(n), hyper.b_sigma + 0.5 * rss);
  s.sigma2(j) = 1.0 / precision;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_precision(const FactorState& s) {
  const Eigen::MatrixXd scaled = s.sigma2.cwiseInverse().asDiagonal() * s.lambda;
  Eigen::MatrixXd p = s.lambda.transpose() * scaled;
  p.diagonal().array() += 1.0;
  return robust_cholesky(p);
}

}  // namespace

void update_factor_row(Rng& rng, FactorState& s, const Eigen::MatrixXd& z, Eigen::Index i) {
  const auto llt = factor_precision(s);
  const Eigen::VectorXd resid = z.row(i).transpose() - s.alpha;
  const Eigen::VectorXd b = s.lambda.transpose() * s.sigma2.cwiseInverse().asDiagonal() * resid;
  s.eta.row(i) = draw_canonical(rng, llt, b).transpose();
}

void update_factors(Rng& rng, FactorState& s, const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.rows();
  const Eigen::Index k = s.rank();
  if (n == 0) return;
  const auto llt = factor_precision(s);
  // Row i of B is Lambda' Sigma^{-1} (z_i - alpha).
  const Eigen::MatrixXd weighted = s.sigma2.cwiseInverse().asDiagonal() * s.lambda;
  const Eigen::MatrixXd b = (z.rowwise() - s.alpha.transpose()) * weighted;
  Eigen::MatrixXd noise(k, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index h = 0; h < k; ++h) noise(h, i) = rng.normal();
  Eigen::MatrixXd draw = llt.solve(b.transpose());
  draw += llt.matrixU().solve(noise);
  s.eta = draw.transpose();
}

void update_shrinkage(Rng& rng, FactorState& s, const Hyperparameters& hyper) {
  const Eigen::Index d = s.dim();
  const Eigen::Index k = s.rank();
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index h = 0; h < k; ++h) {
      const double l = s.lambda(j, h);
      s.phi(j, h) =
          rng.gamma(0.5 * (hyper.nu + 1.0), 0.5 * (hyper.nu + s.xi(h) * l * l));
    }

  // Column sums of phi_jl lambda_jl^2.
  const Eigen::VectorXd col_ss =
      (s.phi.array() * s.lambda.array().square()).colwise().sum().transpose();
  for (Eigen::Index h = 0; h < k; ++h) {
    // Leave-one-out products prod_{t <= l, t != h} delta_t for l >= h.
    double loo = 1.0;
    for (Eigen::Index t = 0; t < h; ++t) loo *= s.delta(t);
    double rate = 1.0;
    for (Eigen::Index l = h; l < k; ++l) {
      if (l > h) loo *= s.delta(l);
      rate += 0.5 * loo * col_ss(l);
    }
    const double shape = (h == 0 ? hyper.a1 : hyper.a2) +
                         0.5 * static_cast<double>(d) * static_cast<double>(k - h);
    s.delta(h) = rng.gamma(shape, rate);
  }
  s.refresh_xi();
}

void update_intercept(Rng& rng, FactorState& s, const Eigen::MatrixXd& z, Eigen::Index j) {
  if (!s.free_intercept[static_cast<std::size_t>(j)])
    throw Error(Errc::contract_violation,
                "intercept of column " + std::to_string(j) + " is fixed at zero");
  const double prec = 1.0 / s.sigma2(j);
  const Eigen::Index n = z.rows();
  double sum = 0.0;
  if (n > 0) sum = (z.col(j) - s.eta * s.lambda.row(j).transpose()).sum();
  const double post_var = 1.0 / (static_cast<double>(n) * prec + 1.0);
  s.alpha(j) = rng.normal(post_var * sum * prec, std::sqrt(post_var));
}

void update_parameters(Rng& rng, FactorState& s, const Hyperparameters& hyper,
                       const Eigen::MatrixXd& z) {
  update_loadings(rng, s, z);
  for (Eigen::Index j = 0; j < s.dim(); ++j) update_sigma2(rng, s, hyper, z, j);
  update_factors(rng, s, z);
  update_shrinkage(rng, s, hyper);
  for (Eigen::Index j = 0; j < s.dim(); ++j)
    if (s.free_intercept[static_cast<std::size_t>(j)]) update_intercept(rng, s, z, j);
}

Eigen::MatrixXd covariance_from_factor(const FactorState& s) {
  Eigen::MatrixXd omega = s.lambda * s.lambda.transpose();
  omega.diagonal() += s.sigma2;
  return omega;
}

Eigen::MatrixXd correlation_from_factor(const FactorState& s) {
  const Eigen::MatrixXd omega = covariance_from_factor(s);
  const Eigen::VectorXd inv_sd = omega.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd c = inv_sd.asDiagonal() * omega * inv_sd.asDiagonal();
  c.diagonal().setOnes();
  return c;
}

}  // namespace auxcop
