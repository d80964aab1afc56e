#pragma once

#include <span>
#include <vector>

#include "auxcop/core_types.hpp"

namespace auxcop {

struct Knot {
  double value = 0.0;
  double level = 0.0;
};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson tangents,
/// one-sided secant slopes at the ends). Constant outside the knot range.
class MonotoneSpline {
 public:
  MonotoneSpline() = default;

  double operator()(double x) const;
  double derivative(double x) const;
  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }
  std::vector<Knot> knots() const;

  friend MonotoneSpline fit_monotone(std::vector<Knot> knots);

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

/// Sorts by value, collapses equal values keeping the largest level, and fits.
/// Throws NonMonotoneKnots if a level decreases, TooFew for fewer than 2 knots.
MonotoneSpline fit_monotone(std::vector<Knot> knots);

/// Generalized inverse inf{x : F(x) >= p}. For count columns the result is the
/// smallest integer k in the support with F(k) >= p.
double inverse_eval(const MonotoneSpline& f, double p, ColumnKind kind);

/// Levels at the intermediate points of `bins`: for each bin whose upper edge
/// has an unknown level and which holds at least one entry, the level of that
/// edge is Phi((max z - loc) / scale), clamped to the known levels enclosing
/// the bin. `z` is aligned with bins.bin_of.
std::vector<Knot> estimate_levels(const BinnedColumn& bins, std::span<const double> z,
                                  double loc = 0.0, double scale = 1.0);

/// Known points of `aux` together with estimated intermediate levels.
std::vector<Knot> marginal_knots(const AuxiliaryQuantileSet& aux,
                                 const std::vector<Knot>& estimated);

}  // namespace auxcop
