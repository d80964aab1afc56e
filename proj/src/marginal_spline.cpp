#include "auxcop/marginal_spline.hpp"

#include <algorithm>
#include <cmath>

#include "auxcop/error.hpp"

namespace auxcop {

MonotoneSpline fit_monotone(std::vector<Knot> knots) {
  std::stable_sort(knots.begin(), knots.end(),
                   [](const Knot& a, const Knot& b) { return a.value < b.value; });
  MonotoneSpline s;
  for (const auto& k : knots) {
    if (!std::isfinite(k.value) || !std::isfinite(k.level))
      throw Error(Errc::non_monotone_knots, "non-finite knot");
    if (!s.x_.empty() && s.x_.back() == k.value) {
      s.y_.back() = std::max(s.y_.back(), k.level);
      continue;
    }
    s.x_.push_back(k.value);
    s.y_.push_back(k.level);
  }
  if (s.x_.size() < 2) throw Error(Errc::too_few, "monotone spline needs two distinct knots");
  for (std::size_t i = 1; i < s.y_.size(); ++i)
    if (s.y_[i] < s.y_[i - 1])
      throw Error(Errc::non_monotone_knots,
                  "level decreases between x = " + std::to_string(s.x_[i - 1]) + " and " +
                      std::to_string(s.x_[i]));

  const std::size_t n = s.x_.size();
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    secant[i] = (s.y_[i + 1] - s.y_[i]) / (s.x_[i + 1] - s.x_[i]);

  s.m_.assign(n, 0.0);
  // One-sided three-point end slopes, kept within the monotone region.
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::fabs(m) > 3.0 * std::fabs(d0)) m = 3.0 * d0;
    return m;
  };
  if (n == 2) {
    s.m_[0] = s.m_[1] = secant[0];
  } else {
    s.m_[0] = end_slope(s.x_[1] - s.x_[0], s.x_[2] - s.x_[1], secant[0], secant[1]);
    s.m_[n - 1] = end_slope(s.x_[n - 1] - s.x_[n - 2], s.x_[n - 2] - s.x_[n - 3], secant[n - 2],
                            secant[n - 3]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = secant[i - 1];
    const double b = secant[i];
    s.m_[i] = (a > 0.0 && b > 0.0) ? 0.5 * (a + b) : 0.0;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (secant[i] == 0.0) {
      s.m_[i] = s.m_[i + 1] = 0.0;
      continue;
    }
    const double alpha = s.m_[i] / secant[i];
    const double beta = s.m_[i + 1] / secant[i];
    const double r2 = alpha * alpha + beta * beta;
    if (r2 > 9.0) {
      const double t = 3.0 / std::sqrt(r2);
      s.m_[i] = t * alpha * secant[i];
      s.m_[i + 1] = t * beta * secant[i];
    }
  }
  return s;
}

std::size_t MonotoneSpline::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  i = std::clamp<std::size_t>(i, 1, x_.size() - 1);
  return i - 1;
}

double MonotoneSpline::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  // Increment form: exact on flat segments.
  return y_[i] + h01 * (y_[i + 1] - y_[i]) + h * (h10 * m_[i] + h11 * m_[i + 1]);
}

double MonotoneSpline::derivative(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double d00 = (6.0 * t2 - 6.0 * t) / h;
  const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double d01 = (-6.0 * t2 + 6.0 * t) / h;
  const double d11 = 3.0 * t2 - 2.0 * t;
  return d00 * y_[i] + d10 * m_[i] + d01 * y_[i + 1] + d11 * m_[i + 1];
}

std::vector<Knot> MonotoneSpline::knots() const {
  std::vector<Knot> out(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) out[i] = {x_[i], y_[i]};
  return out;
}

double inverse_eval(const MonotoneSpline& f, double p, ColumnKind kind) {
  const double lo = f.lower();
  const double hi = f.upper();
  if (kind == ColumnKind::count) {
    auto k_lo = static_cast<long long>(std::ceil(lo));
    auto k_hi = static_cast<long long>(std::floor(hi));
    if (p <= f(static_cast<double>(k_lo))) return static_cast<double>(k_lo);
    while (k_hi - k_lo > 1) {
      const long long mid = k_lo + (k_hi - k_lo) / 2;
      if (f(static_cast<double>(mid)) >= p)
        k_hi = mid;
      else
        k_lo = mid;
    }
    return static_cast<double>(k_hi);
  }

  if (p <= f(lo)) return lo;
  if (p >= f(hi)) return hi;
  // Bracket a <= x* <= b with f(a) < p <= f(b), then Newton steps kept inside the
  // bracket, falling back to bisection.
  double a = lo;
  double b = hi;
  double x = std::midpoint(a, b);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = f(x);
    if (fx >= p)
      b = x;
    else
      a = x;
    if (std::fabs(fx - p) < 1e-13 && fx >= p) break;
    if (b - a <= 1e-15 * std::max(1.0, std::fabs(b))) break;
    const double d = f.derivative(x);
    double next = d > 0.0 ? x - (fx - p) / d : std::midpoint(a, b);
    if (!(next > a && next < b)) next = std::midpoint(a, b);
    x = next;
  }
  return f(x) >= p ? x : b;
}

std::vector<Knot> estimate_levels(const BinnedColumn& bins, std::span<const double> z,
                                  double loc, double scale) {
  const std::size_t nb = bins.bin_count();
  std::vector<double> max_z(nb, -kInf);
  for (std::size_t e = 0; e < bins.bin_of.size(); ++e) {
    const auto q = static_cast<std::size_t>(bins.bin_of[e]);
    max_z[q] = std::max(max_z[q], z[e]);
  }
  std::vector<Knot> out;
  for (std::size_t q = 0; q < nb; ++q) {
    const auto& b = bins.bins[q];
    if (!b.upper_is_intermediate() || max_z[q] == -kInf) continue;
    const double level = norm_cdf((max_z[q] - loc) / scale);
    out.push_back({b.value_hi, std::clamp(level, b.known_tau_lo, b.known_tau_hi)});
  }
  return out;
}

std::vector<Knot> marginal_knots(const AuxiliaryQuantileSet& aux,
                                 const std::vector<Knot>& estimated) {
  std::vector<Knot> out;
  for (const auto& p : aux.points)
    if (p.known()) out.push_back({p.value, *p.tau});
  out.insert(out.end(), estimated.begin(), estimated.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Knot& a, const Knot& b) { return a.value < b.value; });
  return out;
}

}  // namespace auxcop
