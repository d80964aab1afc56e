#include "auxcop/stats.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "auxcop/error.hpp"

namespace auxcop {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

bool strictly_inside(double x, double a, double b) { return x > a && x < b; }

// Uniform proposal on (a, b) with the normal density as target. The envelope
// is the density at the point of (a, b) closest to zero.
double uniform_rejection(Rng& rng, double a, double b) {
  const double peak = (a > 0.0) ? a : (b < 0.0 ? b : 0.0);
  const double width = b - a;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double x = a + rng.uniform() * width;
    if (!strictly_inside(x, a, b)) continue;
    if (rng.uniform() <= std::exp(0.5 * (peak * peak - x * x))) return x;
  }
  return std::midpoint(a, b);
}

// Robert (1995) translated-exponential proposal for the tail (a, b), a > 0.
double exponential_rejection(Rng& rng, double a, double b) {
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double x = a + rng.exponential(lambda);
    if (!strictly_inside(x, a, b)) continue;
    const double d = x - lambda;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return x;
  }
}

// Interval with b > 0 and a < b.
double sample_upper(Rng& rng, double a, double b) {
  if (a < 0.0) {
    if (b - a < 1.0) return uniform_rejection(rng, a, b);
    const double pa = norm_cdf(a);
    const double pb = norm_cdf(b);
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double x = norm_quantile(pa + rng.uniform() * (pb - pa));
      if (strictly_inside(x, a, b)) return x;
    }
    return uniform_rejection(rng, a, b);
  }
  // a >= 0: work with upper-tail probabilities to keep precision.
  if (b * b - a * a <= 2.0) return uniform_rejection(rng, a, b);
  const double qa = norm_sf(a);
  const double qb = norm_sf(b);
  if (qa - qb >= 1e-10) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double x = -norm_quantile(qb + rng.uniform() * (qa - qb));
      if (strictly_inside(x, a, b)) return x;
    }
  }
  return exponential_rejection(rng, a, b);
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double norm_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return ppnd16(p);
}

double sample_std_truncated_normal(Rng& rng, double a, double b) {
  if (!(a < b)) throw Error(Errc::empty_interval, "truncation interval is empty");
  if (a == -kInf && b == kInf) return rng.normal();
  if (b <= 0.0) return -sample_upper(rng, -b, -a);
  return sample_upper(rng, a, b);
}

double sample_truncated_normal(Rng& rng, const ConditionalMoments& moments,
                               const TruncationInterval& interval) {
  if (!(interval.lo < interval.hi))
    throw Error(Errc::empty_interval, "truncation interval is empty");
  const double sd = std::sqrt(moments.sigma2);
  const double a = (interval.lo - moments.mu) / sd;
  const double b = (interval.hi - moments.mu) / sd;
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double x = moments.mu + sd * sample_std_truncated_normal(rng, a, b);
    if (strictly_inside(x, interval.lo, interval.hi)) return x;
  }
  // Interval narrower than the rounding of mu + sd * x; return an interior point.
  if (std::isfinite(interval.lo) && std::isfinite(interval.hi))
    return std::midpoint(interval.lo, interval.hi);
  return std::isfinite(interval.lo) ? std::nextafter(interval.lo, kInf)
                                    : std::nextafter(interval.hi, -kInf);
}

Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& m) {
  static constexpr double kJitter[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  if (!m.allFinite()) throw Error(Errc::singular_submatrix, "matrix has non-finite entries");
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (double jitter : kJitter) {
    Eigen::MatrixXd trial = m;
    trial.diagonal().array() += jitter;
    llt.compute(trial);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) return llt;
  }
  throw Error(Errc::singular_submatrix, "Cholesky failed after jitter ladder (max 1e-6)");
}

ConditionalMoments conditional_moments(const Eigen::MatrixXd& c, const Eigen::VectorXd& alpha,
                                       const Eigen::VectorXd& z, Eigen::Index j) {
  const Eigen::Index d = c.rows();
  if (d == 1) return {alpha(0), c(0, 0)};
  std::vector<Eigen::Index> others;
  others.reserve(static_cast<std::size_t>(d - 1));
  for (Eigen::Index k = 0; k < d; ++k)
    if (k != j) others.push_back(k);

  const Eigen::MatrixXd c_oo = c(others, others);
  const Eigen::VectorXd c_oj = c(others, j);
  const Eigen::VectorXd w = robust_cholesky(c_oo).solve(c_oj);
  const Eigen::VectorXd resid = z(others) - alpha(others);
  const double sigma2 = c(j, j) - c_oj.dot(w);
  return {alpha(j) + w.dot(resid), std::max(sigma2, 1e-300)};
}

Eigen::VectorXd missingness_coefficients(const Eigen::MatrixXd& c_sub) {
  const Eigen::Index p = c_sub.rows() - 1;
  if (p == 0) return Eigen::VectorXd();
  const Eigen::MatrixXd c_y = c_sub.topLeftCorner(p, p);
  const Eigen::VectorXd c_yr = c_sub.topRightCorner(p, 1);
  return robust_cholesky(c_y).solve(c_yr);
}

double missingness_probability(const Eigen::MatrixXd& c_sub, double alpha_r,
                               const Eigen::VectorXd& z_y) {
  const Eigen::Index p = c_sub.rows() - 1;
  if (p == 0) return norm_cdf(alpha_r / std::sqrt(c_sub(0, 0)));
  const Eigen::VectorXd w = missingness_coefficients(c_sub);
  const double mean = alpha_r + w.dot(z_y);
  const double var = c_sub(p, p) - c_sub.col(p).head(p).dot(w);
  // 1 - Phi((0 - mean) / sd)
  return norm_cdf(mean / std::sqrt(std::max(var, 1e-300)));
}

double bivariate_normal_rect(double rho, double a_lo, double a_hi, double b_lo, double b_hi) {
  constexpr double kLimit = 10.0;
  const double x_lo = std::max(a_lo, -kLimit);
  const double x_hi = std::min(a_hi, kLimit);
  if (!(x_lo < x_hi) || !(b_lo < b_hi)) return 0.0;
  if (rho == 0.0) return (norm_cdf(a_hi) - norm_cdf(a_lo)) * (norm_cdf(b_hi) - norm_cdf(b_lo));

  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  auto integrand = [&](double x) {
    const double upper = b_hi == kInf ? 1.0 : norm_cdf((b_hi - rho * x) / s);
    const double lower = b_lo == -kInf ? 0.0 : norm_cdf((b_lo - rho * x) / s);
    return norm_pdf(x) * (upper - lower);
  };

  // Split at the points where the conditional CDF switches, which are sharp
  // when |rho| is close to one.
  std::vector<double> cuts{x_lo, x_hi};
  for (double b : {b_lo, b_hi}) {
    if (!std::isfinite(b)) continue;
    const double x = b / rho;
    if (x > x_lo && x < x_hi) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k] < cuts[k + 1])) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, cuts[k], cuts[k + 1], 20, 1e-13);
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace auxcop
