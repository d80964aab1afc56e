#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "auxcop/core_types.hpp"
#include "auxcop/sampler.hpp"

namespace auxcop {

struct CompletedDataset {
  Eigen::MatrixXd values;  // same coding as Dataset, no NaN
  int sweep = 0;
};

/// Fills the missing cells of `data` from one posterior draw: numeric cells by
/// inverting the draw's marginal (known CDF, or the monotone spline through the
/// known and estimated quantiles), binary and categorical cells directly.
CompletedDataset impute_from_draw(const Dataset& data, const PosteriorOutput& post,
                                  const PosteriorDraw& draw);

/// Positions (0-based, into post.draws) of m imputations spaced `spacing`
/// apart and ending at the last retained draw. Throws InsufficientDraws when
/// m * spacing exceeds the number retained.
std::vector<std::size_t> imputation_indices(std::size_t retained, int m, int spacing);

std::vector<CompletedDataset> make_imputations(const Dataset& data, const PosteriorOutput& post,
                                               int m, int spacing);

struct PooledEstimate {
  double qbar = 0.0;
  double ubar = 0.0;
  double b = 0.0;
  double t = 0.0;
  double df = 0.0;  // +inf when b == 0
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int m = 0;
};

/// Rubin's rules with a t reference for the 95% interval.
PooledEstimate rubin_combine(std::span<const double> estimates, std::span<const double> variances);

}  // namespace auxcop
