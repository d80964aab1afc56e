#include "auxcop/imputation.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <optional>

#include "auxcop/error.hpp"
#include "auxcop/marginal_spline.hpp"
#include "auxcop/stats.hpp"

namespace auxcop {

CompletedDataset impute_from_draw(const Dataset& data, const PosteriorOutput& post,
                                  const PosteriorDraw& draw) {
  CompletedDataset out;
  out.values = data.values();
  out.sweep = draw.sweep;
  if (post.missing_cells.empty()) return out;
  if (draw.missing_values.size() != post.missing_cells.size())
    throw Error(Errc::contract_violation, "draw does not carry values for the missing cells");

  // One inverse CDF per column for this draw.
  std::vector<std::optional<MonotoneSpline>> splines(static_cast<std::size_t>(data.cols()));
  auto spline_for = [&](Eigen::Index j) -> const MonotoneSpline& {
    auto& slot = splines[static_cast<std::size_t>(j)];
    if (!slot) {
      const auto& model = post.models[static_cast<std::size_t>(j)];
      std::vector<Knot> knots;
      if (static_cast<std::size_t>(j) < draw.marginal_knots.size())
        knots = draw.marginal_knots[static_cast<std::size_t>(j)];
      if (knots.empty()) {
        if (!model.aux)
          throw Error(Errc::config_error, "no marginal available for column '" +
                                              data.schema(j).name + "'");
        knots = marginal_knots(*model.aux, {});
      }
      slot = fit_monotone(std::move(knots));
    }
    return *slot;
  };

  for (std::size_t c = 0; c < post.missing_cells.size(); ++c) {
    const auto [i, j] = post.missing_cells[c];
    const double v = draw.missing_values[c];
    const auto& schema = data.schema(j);
    const auto& model = post.models[static_cast<std::size_t>(j)];
    double y = v;
    if (schema.is_numeric()) {
      if (post.mode == LikelihoodMode::full_marginal && schema.kind == ColumnKind::continuous &&
          model.marginal) {
        y = v >= 0.5 ? model.marginal->upper_quantile(1.0 - v) : model.marginal->quantile(v);
      } else {
        y = inverse_eval(spline_for(j), v, schema.kind);
      }
    }
    out.values(i, j) = y;
  }
  return out;
}

std::vector<std::size_t> imputation_indices(std::size_t retained, int m, int spacing) {
  if (m < 1 || spacing < 1) throw Error(Errc::config_error, "m and spacing must be >= 1");
  const auto need = static_cast<std::size_t>(m) * static_cast<std::size_t>(spacing);
  if (need > retained)
    throw Error(Errc::insufficient_draws,
                std::to_string(m) + " imputations spaced " + std::to_string(spacing) +
                    " need " + std::to_string(need) + " retained draws, have " +
                    std::to_string(retained) + "; lower --m or --spacing or run more iterations");
  std::vector<std::size_t> out;
  for (int k = 1; k <= m; ++k)
    out.push_back(retained - static_cast<std::size_t>(m - k) * static_cast<std::size_t>(spacing) - 1);
  return out;
}

std::vector<CompletedDataset> make_imputations(const Dataset& data, const PosteriorOutput& post,
                                               int m, int spacing) {
  std::vector<CompletedDataset> out;
  for (std::size_t idx : imputation_indices(post.draws.size(), m, spacing))
    out.push_back(impute_from_draw(data, post, post.draws[idx]));
  return out;
}

PooledEstimate rubin_combine(std::span<const double> estimates, std::span<const double> variances) {
  if (estimates.size() != variances.size())
    throw Error(Errc::contract_violation, "estimates and variances differ in length");
  const auto m = static_cast<int>(estimates.size());
  if (m < 2) throw Error(Errc::contract_violation, "Rubin's rules need at least 2 imputations");

  PooledEstimate r;
  r.m = m;
  // Centre on the first estimate so identical estimates give B == 0 exactly.
  const double shift = estimates[0];
  for (int k = 0; k < m; ++k) {
    if (variances[static_cast<std::size_t>(k)] < 0.0)
      throw Error(Errc::contract_violation, "negative within-imputation variance");
    r.qbar += estimates[static_cast<std::size_t>(k)] - shift;
    r.ubar += variances[static_cast<std::size_t>(k)];
  }
  r.qbar = shift + r.qbar / m;
  r.ubar /= m;
  for (int k = 0; k < m; ++k) {
    const double dev = estimates[static_cast<std::size_t>(k)] - r.qbar;
    r.b += dev * dev;
  }
  r.b /= (m - 1);
  const double inflate = 1.0 + 1.0 / m;
  r.t = r.ubar + inflate * r.b;

  double crit;
  if (r.b == 0.0) {
    r.df = kInf;
    crit = norm_quantile(0.975);
  } else {
    const double ratio = 1.0 + r.ubar / (inflate * r.b);
    r.df = (m - 1) * ratio * ratio;
    crit = boost::math::quantile(boost::math::students_t(r.df), 0.975);
  }
  const double half = crit * std::sqrt(r.t);
  r.ci_lo = r.qbar - half;
  r.ci_hi = r.qbar + half;
  return r;
}

}  // namespace auxcop
