#include "auxcop/marginals.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "auxcop/error.hpp"
#include "auxcop/stats.hpp"

namespace auxcop {

namespace {

namespace bm = boost::math;

template <class Dist>
class BoostMarginal : public ContinuousMarginal {
 public:
  BoostMarginal(Dist dist, std::string name, nlohmann::json spec)
      : dist_(dist), name_(std::move(name)), spec_(std::move(spec)) {}

  double cdf(double x) const override {
    const auto [lo, hi] = bm::support(dist_);
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    return bm::cdf(dist_, x);
  }
  double sf(double x) const override {
    const auto [lo, hi] = bm::support(dist_);
    if (x <= lo) return 1.0;
    if (x >= hi) return 0.0;
    return bm::cdf(bm::complement(dist_, x));
  }
  double quantile(double p) const override {
    if (p <= 0.0) return bm::support(dist_).first;
    if (p >= 1.0) return bm::support(dist_).second;
    return bm::quantile(dist_, p);
  }
  double upper_quantile(double q) const override {
    if (q <= 0.0) return bm::support(dist_).second;
    if (q >= 1.0) return bm::support(dist_).first;
    return bm::quantile(bm::complement(dist_, q));
  }
  std::string name() const override { return name_; }
  nlohmann::json to_json() const override { return spec_; }

 private:
  Dist dist_;
  std::string name_;
  nlohmann::json spec_;
};

}  // namespace

MarginalPtr make_normal(double mean, double sd) {
  return std::make_shared<BoostMarginal<bm::normal_distribution<double>>>(
      bm::normal_distribution<double>(mean, sd), "normal",
      nlohmann::json{{"family", "normal"}, {"mean", mean}, {"sd", sd}});
}

MarginalPtr make_gamma(double shape, double rate) {
  return std::make_shared<BoostMarginal<bm::gamma_distribution<double>>>(
      bm::gamma_distribution<double>(shape, 1.0 / rate), "gamma",
      nlohmann::json{{"family", "gamma"}, {"shape", shape}, {"rate", rate}});
}

MarginalPtr make_beta(double a, double b) {
  return std::make_shared<BoostMarginal<bm::beta_distribution<double>>>(
      bm::beta_distribution<double>(a, b), "beta",
      nlohmann::json{{"family", "beta"}, {"a", a}, {"b", b}});
}

MarginalPtr make_noncentral_t(double df, double ncp) {
  return std::make_shared<BoostMarginal<bm::non_central_t_distribution<double>>>(
      bm::non_central_t_distribution<double>(df, ncp), "noncentral_t",
      nlohmann::json{{"family", "noncentral_t"}, {"df", df}, {"ncp", ncp}});
}

MarginalPtr marginal_from_json(const nlohmann::json& spec) {
  const std::string family = spec.at("family").get<std::string>();
  if (family == "normal") return make_normal(spec.value("mean", 0.0), spec.value("sd", 1.0));
  if (family == "gamma") return make_gamma(spec.at("shape"), spec.value("rate", 1.0));
  if (family == "exponential") return make_gamma(1.0, spec.value("rate", 1.0));
  if (family == "beta") return make_beta(spec.at("a"), spec.at("b"));
  if (family == "noncentral_t") return make_noncentral_t(spec.at("df"), spec.value("ncp", 0.0));
  throw Error(Errc::config_error, "unknown marginal family '" + family + "'");
}

double known_marginal_transform(const ContinuousMarginal& f, double y) {
  const double p = f.cdf(y);
  if (!(p > 0.0 && p < 1.0))
    throw Error(Errc::degenerate_cdf, "F(y) is 0 or 1 at y = " + std::to_string(y));
  if (p <= 0.5) return norm_quantile(p);
  return -norm_quantile(f.sf(y));
}

double known_marginal_inverse(const ContinuousMarginal& f, double z) {
  if (z <= 0.0) return f.quantile(norm_cdf(z));
  return f.upper_quantile(norm_sf(z));
}

}  // namespace auxcop
