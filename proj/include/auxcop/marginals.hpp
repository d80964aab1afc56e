#pragma once

#include <memory>
#include <json.hpp>
#include <string>

namespace auxcop {

/// A fully specified continuous marginal F_j.
class ContinuousMarginal {
 public:
  virtual ~ContinuousMarginal() = default;
  virtual double cdf(double x) const = 0;
  /// 1 - F(x); families override when they can avoid the cancellation.
  virtual double sf(double x) const { return 1.0 - cdf(x); }
  virtual double quantile(double p) const = 0;
  /// F^{-1}(1 - q) for small q.
  virtual double upper_quantile(double q) const { return quantile(1.0 - q); }
  virtual std::string name() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

using MarginalPtr = std::shared_ptr<const ContinuousMarginal>;

MarginalPtr make_normal(double mean, double sd);
MarginalPtr make_gamma(double shape, double rate);
MarginalPtr make_beta(double a, double b);
MarginalPtr make_noncentral_t(double df, double ncp);

/// {"family": "gamma", "shape": 1, "rate": 1} and friends.
MarginalPtr marginal_from_json(const nlohmann::json& spec);

/// z = Phi^{-1}(F(y)), evaluated through the upper tail when F(y) > 1/2.
/// Throws DegenerateCDF when F(y) is 0 or 1.
double known_marginal_transform(const ContinuousMarginal& f, double y);

/// y = F^{-1}(Phi(z)), the inverse of known_marginal_transform.
double known_marginal_inverse(const ContinuousMarginal& f, double z);

}  // namespace auxcop
