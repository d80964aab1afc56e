#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace auxcop {

/// Contingency table of two variables discretized at fixed latent cutpoints.
/// cuts_a has rows + 1 entries from -inf to +inf; likewise cuts_b.
struct CellTable {
  Eigen::MatrixXd counts;
  std::vector<double> cuts_a;
  std::vector<double> cuts_b;

  double total() const { return counts.sum(); }
  /// False when the table is empty, so cell probabilities are undefined.
  bool defined() const { return total() > 0.0; }
  Eigen::MatrixXd proportions() const;
};

/// Counts of complete pairs (a_i, b_i); negative categories mark a missing
/// member of the pair and are skipped.
CellTable empirical_cells(std::span<const int> a, std::span<const int> b,
                          std::vector<double> cuts_a, std::vector<double> cuts_b);

/// Table of (bin of Y, missingness indicator of Y) when Y is observed only for
/// R = 0. `bin_or_missing` holds the bin of each observed entry and -1 for a
/// missing one; `bin_taus` are the known level edges (bins + 1 values, 0 to 1).
/// The unobserved R = 1 row of each bin is completed from the known bin mass:
/// pi(q, 1) = (tau_{q+1} - tau_q) - pi(q, 0), floored at zero. The indicator
/// cutpoint is Phi^{-1}(1 - missing rate).
CellTable indicator_pair_table(std::span<const int> bin_or_missing,
                               const std::vector<double>& bin_taus);

/// Sum of counts times log rectangle probability at correlation rho.
double polychoric_log_likelihood(const CellTable& table, double rho);

/// Maximizer of the polychoric likelihood on (-1 + 1e-4, 1 - 1e-4) by golden
/// section. Throws BoundaryEstimate when the maximizer sits on the guard.
double polychoric_mle(const CellTable& table);

}  // namespace auxcop
