#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "auxcop/core_types.hpp"
#include "auxcop/marginals.hpp"
#include "auxcop/rng.hpp"
#include "auxcop/sampler.hpp"

namespace auxcop {

/// Correlation from a scaled inverse-Wishart draw with df = dim + 2 and
/// identity scale, rescaled to unit diagonal.
Eigen::MatrixXd gen_correlation(Rng& rng, int dim);

/// The three margins cycled over the study columns: Gamma(1,1),
/// noncentral t(5, 2), Beta(1,2).
std::vector<MarginalPtr> cycle_marginals(int p);

/// Finite support used for a known continuous margin: (F^{-1}(1e-12), F^{-1}(1 - 1e-12)).
std::pair<double, double> support_bounds(const ContinuousMarginal& f);

/// Synthetic data together with the truth that must never reach the fitter.
struct SimulatedData {
  Dataset data;                      // masked
  Eigen::MatrixXd complete;          // every y, including the masked ones
  Eigen::MatrixXd c0;                // 2p x 2p truth
  std::vector<MarginalPtr> marginals;
  std::vector<std::pair<double, double>> bounds;
};

/// z ~ N(alpha, C0) with alpha = (0_p, alpha_r); y_j = F_j^{-1}(Phi(z_j)),
/// clamped into the finite support; y_ij masked when z_{i,p+j} > 0.
SimulatedData gen_copula_data(Rng& rng, const Eigen::MatrixXd& c0,
                              const std::vector<MarginalPtr>& marginals,
                              const Eigen::VectorXd& alpha_r, int n);

/// Bernoulli(Phi(intercept + slope * standardized value)) mask, 1 = missing.
std::vector<int> apply_an_missingness(Rng& rng, const std::vector<double>& values,
                                      double intercept = -0.5, double slope = -1.3);

enum class AuxGranularity { full, eql_median, eql_deciles, eql_quarter, ehql_median, mar_baseline };

const char* to_string(AuxGranularity g) noexcept;
AuxGranularity aux_granularity_from_string(const std::string& s);

/// Quantiles of a known margin at `taus` (tau 0 and 1 map to the finite bounds).
AuxiliaryQuantileSet true_aux(const ContinuousMarginal& f, const std::vector<double>& taus,
                              std::pair<double, double> bounds);

std::vector<double> decile_taus();

/// Dataset, column models and likelihood mode for fitting `sim` under a
/// granularity. The MAR baseline drops the indicators and uses empirical
/// deciles of the observed values.
struct FitSetup {
  Dataset data;
  std::vector<ColumnModel> models;
  LikelihoodMode mode = LikelihoodMode::ehql;
};
FitSetup fit_setup(const SimulatedData& sim, AuxGranularity g);

/// Credible-interval summary of the correlation draws against a truth, over
/// the unique off-diagonal entries of the leading `block` rows/columns.
struct CorrelationSummary {
  double coverage = 0.0;
  double mean_width = 0.0;
  double median_abs_error = 0.0;
  double frobenius = 0.0;
  int entries = 0;
};
CorrelationSummary summarize_correlation(const PosteriorOutput& post, const Eigen::MatrixXd& truth,
                                         Eigen::Index block);

/// Sup-norm distance at the intermediate points of column j between the truth
/// F_j and (a) the posterior-mean estimated marginal, (b) the observed-data ECDF.
struct MarginalRecovery {
  double model_error = 0.0;
  double ecdf_error = 0.0;
  int points = 0;
};
MarginalRecovery marginal_recovery(const PosteriorOutput& post, const SimulatedData& sim,
                                   Eigen::Index j);

struct ReportRow {
  std::string metric;
  std::string method;
  int n = 0;
  int p = 0;
  int rep = 0;
  double value = 0.0;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;

  void add(std::string metric, std::string method, int n, int p, int rep, double value);
  /// Mean of `metric` for `method` (optionally restricted to sample size n).
  double mean(const std::string& metric, const std::string& method, int n = 0) const;
  std::string to_csv() const;
  /// Means grouped by (metric, method, n).
  nlohmann::json summary() const;
  bool empty() const { return rows.empty(); }
};

struct SimConfig {
  std::vector<int> sample_sizes{1000};
  int p = 5;
  double missing_rate = 0.5;
  std::vector<AuxGranularity> granularities{AuxGranularity::full, AuxGranularity::eql_median,
                                            AuxGranularity::ehql_median,
                                            AuxGranularity::mar_baseline};
  int replications = 1;
  std::uint64_t seed = 1;
  int iters = 2000;
  int burnin = 1000;
  int thin = 1;
};

/// For each replication a C0 and one dataset of the largest size, whose
/// leading rows give the smaller sizes; every granularity is fitted to each.
/// Metrics: coverage, width, median_abs_error, frobenius (all 2p latents),
/// and study_coverage, study_width over the study block.
ExperimentReport run_consistency_study(const SimConfig& config);

/// Repeated-sampling multiple-imputation study on a synthetic mixed-type
/// population (binary, count, 3-level categorical, two continuous columns).
struct CoverageConfig {
  int population = 50000;
  int n = 500;
  int replications = 100;
  int m = 20;
  int spacing = 125;
  int iters = 5000;
  int burnin = 2500;
  double tau = 0.5;
  int bootstrap = 200;
  double mcar_rate = 0.05;
  std::uint64_t seed = 2024;
  int threads = 0;  // 0: COPULA_THREADS or hardware concurrency
  bool include_baseline = true;
};

struct Population {
  Dataset data;  // complete
  std::vector<std::string> covariates;
  std::string response;
  std::string mnar_column;
  Eigen::VectorXd target;  // population quantile-regression coefficients
  std::vector<std::string> coef_names;
  double mnar_mean = 0.0;
  double mnar_sd = 1.0;
};

Population make_population(Rng& rng, int size, double tau);

/// Metrics per coefficient name: coverage, bias, mse, width (method "ehql" or
/// "mar_baseline").
ExperimentReport run_coverage_study(const CoverageConfig& config);

/// Worker count from COPULA_THREADS (default: hardware concurrency), at least 1.
int configured_threads();

}  // namespace auxcop
