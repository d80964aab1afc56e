#include "auxcop/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "auxcop/error.hpp"
#include "auxcop/stats.hpp"

namespace auxcop {

Eigen::MatrixXd CellTable::proportions() const {
  const double n = total();
  if (n <= 0.0) return Eigen::MatrixXd::Constant(counts.rows(), counts.cols(), std::nan(""));
  return counts / n;
}

CellTable empirical_cells(std::span<const int> a, std::span<const int> b,
                          std::vector<double> cuts_a, std::vector<double> cuts_b) {
  if (a.size() != b.size()) throw Error(Errc::contract_violation, "pair lengths differ");
  if (cuts_a.size() < 2 || cuts_b.size() < 2)
    throw Error(Errc::contract_violation, "each margin needs at least one category");
  for (std::size_t k = 1; k < cuts_a.size(); ++k)
    if (!(cuts_a[k] > cuts_a[k - 1])) throw Error(Errc::non_monotone, "cutpoints must increase");
  for (std::size_t k = 1; k < cuts_b.size(); ++k)
    if (!(cuts_b[k] > cuts_b[k - 1])) throw Error(Errc::non_monotone, "cutpoints must increase");

  CellTable t;
  t.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cuts_a.size() - 1),
                                   static_cast<Eigen::Index>(cuts_b.size() - 1));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || b[i] < 0) continue;
    if (a[i] >= t.counts.rows() || b[i] >= t.counts.cols())
      throw Error(Errc::contract_violation, "category index outside the table");
    t.counts(a[i], b[i]) += 1.0;
  }
  t.cuts_a = std::move(cuts_a);
  t.cuts_b = std::move(cuts_b);
  return t;
}

CellTable indicator_pair_table(std::span<const int> bin_or_missing,
                               const std::vector<double>& bin_taus) {
  const auto bins = static_cast<Eigen::Index>(bin_taus.size()) - 1;
  if (bins < 1) throw Error(Errc::too_few, "need at least one bin");
  const auto n = static_cast<double>(bin_or_missing.size());
  CellTable t;
  t.counts = Eigen::MatrixXd::Zero(bins, 2);
  double missing = 0.0;
  for (int q : bin_or_missing) {
    if (q < 0) {
      missing += 1.0;
      continue;
    }
    if (q >= bins) throw Error(Errc::contract_violation, "bin index outside the table");
    t.counts(q, 0) += 1.0;
  }
  for (Eigen::Index q = 0; q < bins; ++q) {
    const double mass = bin_taus[static_cast<std::size_t>(q + 1)] - bin_taus[static_cast<std::size_t>(q)];
    t.counts(q, 1) = std::max(0.0, mass * n - t.counts(q, 0));
  }
  t.cuts_a.reserve(bin_taus.size());
  for (double tau : bin_taus) t.cuts_a.push_back(norm_quantile(tau));
  const double rate = n > 0.0 ? missing / n : 0.5;
  t.cuts_b = {-kInf, norm_quantile(1.0 - rate), kInf};
  return t;
}

double polychoric_log_likelihood(const CellTable& table, double rho) {
  double ll = 0.0;
  for (Eigen::Index q = 0; q < table.counts.rows(); ++q)
    for (Eigen::Index k = 0; k < table.counts.cols(); ++k) {
      const double c = table.counts(q, k);
      if (c <= 0.0) continue;
      const double pr = bivariate_normal_rect(
          rho, table.cuts_a[static_cast<std::size_t>(q)], table.cuts_a[static_cast<std::size_t>(q + 1)],
          table.cuts_b[static_cast<std::size_t>(k)], table.cuts_b[static_cast<std::size_t>(k + 1)]);
      ll += c * std::log(std::max(pr, 1e-300));
    }
  return ll;
}

double polychoric_mle(const CellTable& table) {
  constexpr double kGuard = 1e-4;
  if (!table.defined()) throw Error(Errc::contract_violation, "empty table");
  double a = -1.0 + kGuard;
  double b = 1.0 - kGuard;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = polychoric_log_likelihood(table, x1);
  double f2 = polychoric_log_likelihood(table, x2);
  while (b - a > 1e-9) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = polychoric_log_likelihood(table, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = polychoric_log_likelihood(table, x1);
    }
  }
  const double rho = 0.5 * (a + b);
  if (rho <= -1.0 + 2.0 * kGuard || rho >= 1.0 - 2.0 * kGuard)
    throw Error(Errc::boundary_estimate,
                "polychoric estimate pinned at " + std::to_string(rho) + " (boundary guard)");
  return rho;
}

}  // namespace auxcop
