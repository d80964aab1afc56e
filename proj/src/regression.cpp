#include "auxcop/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "auxcop/error.hpp"

namespace auxcop {

Design build_design(const std::vector<ColumnSchema>& schemas, const Eigen::MatrixXd& values,
                    const DesignSpec& spec) {
  auto index_of = [&](const std::string& name) {
    for (std::size_t j = 0; j < schemas.size(); ++j)
      if (schemas[j].name == name) return static_cast<Eigen::Index>(j);
    throw Error(Errc::config_error, "no column named '" + name + "'");
  };
  if (values.hasNaN()) throw Error(Errc::contract_violation, "design requires completed data");
  const Eigen::Index n = values.rows();

  Design d;
  const Eigen::Index ry = index_of(spec.response);
  if (schemas[static_cast<std::size_t>(ry)].kind == ColumnKind::categorical)
    throw Error(Errc::config_error, "response '" + spec.response + "' must not be categorical");
  d.y = values.col(ry);

  std::vector<Eigen::VectorXd> cols{Eigen::VectorXd::Ones(n)};
  d.names.push_back("(Intercept)");
  for (const auto& name : spec.covariates) {
    const Eigen::Index j = index_of(name);
    const auto& s = schemas[static_cast<std::size_t>(j)];
    if (s.kind == ColumnKind::categorical) {
      for (std::size_t c = 1; c < s.levels.size(); ++c) {
        cols.push_back((values.col(j).array() == static_cast<double>(c)).cast<double>().matrix());
        d.names.push_back(name + "=" + s.levels[c]);
      }
      continue;
    }
    Eigen::VectorXd v = values.col(j);
    if (spec.scale_numeric && s.is_numeric() && n > 1) {
      const double mean = v.mean();
      const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(n - 1));
      if (sd > 0.0) v = ((v.array() - mean) * (0.5 / sd)).matrix();
    }
    cols.push_back(v);
    d.names.push_back(name);
  }
  d.x.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) d.x.col(static_cast<Eigen::Index>(k)) = cols[k];
  return d;
}

RegressionFit fit_ols(const Design& design) {
  const Eigen::Index n = design.x.rows();
  const Eigen::Index p = design.x.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  if (qr.rank() < p)
    throw Error(Errc::rank_deficient, "design has rank " + std::to_string(qr.rank()) + " < " +
                                          std::to_string(p));
  RegressionFit fit;
  fit.names = design.names;
  fit.coef = qr.solve(design.y);
  const double rss = (design.y - design.x * fit.coef).squaredNorm();
  const double sigma2 = n > p ? rss / static_cast<double>(n - p) : 0.0;
  const Eigen::MatrixXd xtx_inv =
      (design.x.transpose() * design.x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.var = sigma2 * xtx_inv.diagonal();
  return fit;
}

double pinball_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta, double tau) {
  const Eigen::VectorXd r = y - x * beta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) loss += r(i) * (tau - (r(i) < 0.0 ? 1.0 : 0.0));
  return loss;
}

namespace {

// Rows in ascending |residual| order, skipping any that would make the
// selected rows linearly dependent.
std::vector<Eigen::Index> initial_basis(const Eigen::MatrixXd& x, const Eigen::VectorXd& r) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return std::fabs(r(a)) < std::fabs(r(b)); });
  std::vector<Eigen::Index> basis;
  Eigen::MatrixXd rows(0, p);
  for (Eigen::Index i : order) {
    Eigen::MatrixXd trial(rows.rows() + 1, p);
    trial << rows, x.row(i);
    if (Eigen::FullPivLU<Eigen::MatrixXd>(trial).rank() == trial.rows()) {
      rows = std::move(trial);
      basis.push_back(i);
      if (static_cast<Eigen::Index>(basis.size()) == p) break;
    }
  }
  return basis;
}

// Exact minimizer of the pinball loss by descent over basic solutions (fits
// through p observations). Each step leaves the vertex along the edge with
// the steepest descent and moves to the loss-minimizing breakpoint on it.
Eigen::VectorXd vertex_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& wt, double tau, const Eigen::VectorXd& approx) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  std::vector<Eigen::Index> basis = initial_basis(x, y - x * approx);
  if (static_cast<Eigen::Index>(basis.size()) < p)
    throw Error(Errc::rank_deficient, "quantile regression design is rank deficient");

  std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i : basis) in_basis[static_cast<std::size_t>(i)] = 1;
  Eigen::MatrixXd xh(p, p);
  Eigen::VectorXd yh(p);
  std::vector<std::pair<double, double>> breaks;  // (t, |x_i d|)
  std::vector<Eigen::Index> break_row;
  const double ytol = 1e-12 * (1.0 + y.cwiseAbs().maxCoeff());

  Eigen::VectorXd beta;
  for (int iter = 0; iter < 50 * static_cast<int>(n); ++iter) {
    for (Eigen::Index k = 0; k < p; ++k) {
      xh.row(k) = x.row(basis[static_cast<std::size_t>(k)]);
      yh(k) = y(basis[static_cast<std::size_t>(k)]);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(xh);
    const Eigen::MatrixXd inv = lu.inverse();
    beta = inv * yh;
    const Eigen::VectorXd r = y - x * beta;
    const Eigen::MatrixXd xd = x * inv;  // column k: x_i . d_k

    // Slope along +d_k (s = +1) and -d_k (s = -1). Moving along s d_k the
    // basis row k gets residual -s t.
    double best = -1e-12;
    Eigen::Index best_k = -1;
    double best_s = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      double base = 0.0;   // from rows with nonzero residual (scales with s)
      bool has_zero = false;  // non-basis rows with zero residual add |.| terms
      for (Eigen::Index i = 0; i < n; ++i) {
        if (in_basis[static_cast<std::size_t>(i)]) continue;
        const double a = wt(i) * xd(i, k);
        if (r(i) > ytol)
          base -= tau * a;
        else if (r(i) < -ytol)
          base += (1.0 - tau) * a;
        else
          has_zero = true;
      }
      for (double s : {1.0, -1.0}) {
        const double own = wt(basis[static_cast<std::size_t>(k)]);
        double slope = s * base + own * (s > 0 ? 1.0 - tau : tau);
        if (has_zero) {
          // Zero-residual rows: residual moves as -s a t.
          double extra = 0.0;
          for (Eigen::Index i = 0; i < n; ++i) {
            if (in_basis[static_cast<std::size_t>(i)] || std::fabs(r(i)) > ytol) continue;
            const double u = -s * wt(i) * xd(i, k);
            extra += u > 0 ? tau * u : (tau - 1.0) * u;
          }
          slope += extra;
        }
        if (slope < best) {
          best = slope;
          best_k = k;
          best_s = s;
        }
      }
    }
    if (best_k < 0) return beta;

    // Walk the breakpoints t_i = r_i / (s a_i) > 0 until the slope turns
    // non-negative; that row replaces basis row best_k.
    breaks.clear();
    break_row.clear();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_basis[static_cast<std::size_t>(i)]) continue;
      const double a = best_s * xd(i, best_k);
      if (std::fabs(a) < 1e-14) continue;
      const double t = r(i) / a;
      if (t > 0.0 || (std::fabs(r(i)) <= ytol && t >= 0.0)) {
        breaks.emplace_back(std::max(t, 0.0), wt(i) * std::fabs(a));
        break_row.push_back(i);
      }
    }
    if (breaks.empty())
      throw Error(Errc::non_convergence, "quantile regression objective is unbounded");
    idx.resize(breaks.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return breaks[static_cast<std::size_t>(a)].first < breaks[static_cast<std::size_t>(b)].first;
    });
    double slope = best;
    Eigen::Index enter = -1;
    for (Eigen::Index q : idx) {
      slope += breaks[static_cast<std::size_t>(q)].second;
      if (slope >= 0.0) {
        enter = break_row[static_cast<std::size_t>(q)];
        break;
      }
    }
    if (enter < 0) enter = break_row[static_cast<std::size_t>(idx.back())];
    in_basis[static_cast<std::size_t>(basis[static_cast<std::size_t>(best_k)])] = 0;
    basis[static_cast<std::size_t>(best_k)] = enter;
    in_basis[static_cast<std::size_t>(enter)] = 1;
  }
  throw Error(Errc::non_convergence, "quantile regression vertex descent did not terminate");
}

Eigen::VectorXd weighted_quantile(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& wt, double tau,
                                  const Eigen::VectorXd& start) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(Errc::config_error, "tau must lie in (0, 1)");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < p) throw Error(Errc::rank_deficient, "quantile regression needs at least as many rows as columns");
  if (start.size() == p) return vertex_descent(x, y, wt, tau, start);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw Error(Errc::rank_deficient, "quantile regression design is rank deficient");
  Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd shift = (2.0 * tau - 1.0) * (x.transpose() * wt);

  // A few MM (reweighted least squares) passes put the descent close to the optimum.
  Eigen::VectorXd r = y - x * beta;
  double scale = r.cwiseAbs().mean();
  if (!(scale > 0.0)) scale = 1.0;
  Eigen::VectorXd w(n);
  for (double eps = 0.1 * scale; eps > 1e-5 * scale; eps *= 0.1) {
    for (int it = 0; it < 20; ++it) {
      r = y - x * beta;
      for (Eigen::Index i = 0; i < n; ++i) w(i) = wt(i) / std::max(std::fabs(r(i)), eps);
      const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
      const Eigen::VectorXd next = (xtw * x).ldlt().solve(xtw * y + shift);
      if (!next.allFinite())
        throw Error(Errc::non_convergence, "quantile regression iteration produced non-finite values");
      const double step = (next - beta).cwiseAbs().maxCoeff();
      beta = next;
      if (step < 1e-8 * (1.0 + beta.cwiseAbs().maxCoeff())) break;
    }
  }
  return vertex_descent(x, y, wt, tau, beta);
}

}  // namespace

Eigen::VectorXd quantile_coefficients(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      double tau, const Eigen::VectorXd& start) {
  return weighted_quantile(x, y, Eigen::VectorXd::Ones(x.rows()), tau, start);
}

RegressionFit fit_quantile_regression(const Design& design, double tau, Rng& rng, int bootstrap) {
  RegressionFit fit;
  fit.names = design.names;
  fit.coef = quantile_coefficients(design.x, design.y, tau);
  const Eigen::Index n = design.x.rows();
  const Eigen::Index p = design.x.cols();

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(p);
  int used = 0;
  // A resample is the original rows with multiplicity weights, so repeated
  // rows never appear twice in the descent.
  std::vector<int> count(static_cast<std::size_t>(n));
  for (int b = 0; b < bootstrap; ++b) {
    std::fill(count.begin(), count.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) ++count[rng.index(static_cast<std::uint64_t>(n))];
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n; ++i)
      if (count[static_cast<std::size_t>(i)] > 0) rows.push_back(i);
    const Eigen::MatrixXd xb = design.x(rows, Eigen::all);
    const Eigen::VectorXd yb = design.y(rows);
    Eigen::VectorXd wb(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
      wb(static_cast<Eigen::Index>(k)) = count[static_cast<std::size_t>(rows[k])];
    Eigen::VectorXd est;
    try {
      est = weighted_quantile(xb, yb, wb, tau, fit.coef);
    } catch (const Error& e) {
      if (e.code() == Errc::rank_deficient) continue;  // e.g. a level absent from the resample
      throw;
    }
    ++used;
    // Welford update.
    const Eigen::VectorXd delta = est - mean;
    mean += delta / used;
    sq += (delta.array() * (est - mean).array()).matrix();
  }
  if (used < 2) throw Error(Errc::non_convergence, "too few usable bootstrap resamples");
  fit.var = sq / (used - 1);
  return fit;
}

}  // namespace auxcop
