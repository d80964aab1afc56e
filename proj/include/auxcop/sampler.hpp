#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "auxcop/core_types.hpp"
#include "auxcop/factor.hpp"
#include "auxcop/marginal_spline.hpp"
#include "auxcop/marginals.hpp"
#include "auxcop/rng.hpp"

namespace auxcop {

enum class LikelihoodMode { full_marginal, eql, ehql };

const char* to_string(LikelihoodMode mode) noexcept;
LikelihoodMode likelihood_mode_from_string(const std::string& s);

enum class LatentRole { numeric, binary, level, indicator };

struct LatentColumn {
  LatentRole role = LatentRole::numeric;
  Eigen::Index source = 0;  // dataset column
  int level = -1;           // categorical level for LatentRole::level
};

/// What the sampler knows about the marginal of one dataset column. Numeric
/// columns need `aux` under EQL/EHQL; continuous columns need `marginal` under
/// full_marginal (count columns then fall back to `aux`).
struct ColumnModel {
  std::optional<AuxiliaryQuantileSet> aux;
  MarginalPtr marginal;
};

struct ChainConfig {
  LikelihoodMode mode = LikelihoodMode::ehql;
  Hyperparameters hyper;
  int iters = 5000;
  int burnin = 2500;
  int thin = 1;
  std::uint64_t seed = 0;
  int candidate_bins = 20;
  /// Keep per-draw values for the missing cells (needed for imputation).
  bool store_missing = true;
  /// Keep per-draw marginal knots for EHQL columns.
  bool store_marginals = true;

  void validate() const;
};

struct MissingCell {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
};

struct PosteriorDraw {
  int sweep = 0;
  Eigen::MatrixXd corr;        // d x d copula correlation
  Eigen::VectorXd alpha;       // d
  Eigen::VectorXd omega_diag;  // diag(Lambda Lambda' + Sigma)
  /// Per dataset column, the knot set of the estimated marginal (EHQL only).
  std::vector<std::vector<Knot>> marginal_knots;
  /// Aligned with PosteriorOutput::missing_cells: Phi of the standardized latent
  /// for numeric cells, 0/1 for binary, level index for categorical.
  std::vector<double> missing_values;
};

struct PosteriorOutput {
  LikelihoodMode mode = LikelihoodMode::ehql;
  std::vector<ColumnSchema> schemas;
  std::vector<ColumnModel> models;  // aux carries the intermediate points used
  std::vector<LatentColumn> layout;
  Eigen::Index study_dim = 0;       // leading latent columns belonging to study variables
  std::vector<MissingCell> missing_cells;
  PosteriorDraw initial;
  std::vector<PosteriorDraw> draws;
  double seconds = 0.0;

  /// Posterior mean of the copula correlation over the retained draws.
  Eigen::MatrixXd mean_correlation() const;
  /// Latent index of the study column / indicator of dataset column j, or -1.
  Eigen::Index latent_of(Eigen::Index j) const;
  Eigen::Index indicator_of(Eigen::Index j) const;
};

/// Latent layout for a dataset: study latents in column order (categoricals
/// expanded to one latent per level), then one indicator per modeled column.
std::vector<LatentColumn> build_layout(const std::vector<ColumnSchema>& schemas);

/// Probability of each level of a missing categorical cell: level c is the
/// one positive latent, P ~ Phi(mu_c/sd_c) prod_{c' != c} Phi(-mu_c'/sd_c').
/// Normalized; computed in log space.
std::vector<double> level_probabilities(std::span<const double> mu, std::span<const double> sd);

/// Hybrid-likelihood interval of an observed latent: the known-level interval
/// of its bin narrowed by the largest latent in the occupied bins below and the
/// smallest in those above (pass -inf / +inf when there are none). Throws
/// EmptyInterval if the bounds cross.
TruncationInterval ordering_interval(const TruncationInterval& known, double below_max,
                                     double above_min);

/// Gibbs sampler over (factor parameters, latent matrix).
class CopulaSampler {
 public:
  CopulaSampler(const Dataset& data, std::vector<ColumnModel> models, ChainConfig config);

  /// One sweep: factor parameters given Z, then every latent column given eta.
  void sweep();
  PosteriorDraw snapshot(int sweep_index) const;

  const Eigen::MatrixXd& latent() const { return z_; }
  const FactorState& factors() const { return state_; }
  const std::vector<LatentColumn>& layout() const { return layout_; }
  const std::vector<MissingCell>& missing_cells() const { return missing_cells_; }
  /// Bins of a numeric dataset column (nullptr in full_marginal mode or for
  /// other kinds); bin_of is aligned with observed_rows(j).
  const BinnedColumn* bins(Eigen::Index j) const;
  const std::vector<Eigen::Index>& observed_rows(Eigen::Index j) const;
  const std::vector<ColumnModel>& models() const { return models_; }
  Eigen::Index study_dim() const { return study_dim_; }

 private:
  struct NumericColumn {
    Eigen::Index source = 0;
    Eigen::Index latent = 0;
    std::vector<Eigen::Index> obs_rows;
    std::vector<Eigen::Index> mis_rows;
    BinnedColumn bins;
    std::vector<std::vector<std::size_t>> members;  // entries (into obs_rows) per bin
    std::vector<TruncationInterval> known_interval;  // per bin
    std::vector<double> fixed;                       // full_marginal latents
    bool ordered = false;                            // EHQL ordering bounds active
  };
  struct CategoricalColumn {
    Eigen::Index source = 0;
    Eigen::Index first = 0;  // latent index of level 0
    int levels = 0;
    std::vector<int> current;  // level per row (sampled when missing)
  };

  void init_numeric(const Dataset& data, Eigen::Index j, Eigen::Index latent);
  void init_latents(const Dataset& data);
  void update_numeric(NumericColumn& col);
  void update_signed(Eigen::Index latent, Eigen::Index source, bool indicator);
  void update_categorical(CategoricalColumn& col);
  double draw(Eigen::Index i, Eigen::Index l, const TruncationInterval& iv);

  ChainConfig config_;
  Rng rng_;
  std::vector<ColumnSchema> schemas_;
  std::vector<ColumnModel> models_;
  std::vector<LatentColumn> layout_;
  Eigen::Index study_dim_ = 0;
  Eigen::MatrixXi r_;        // missingness mask
  Eigen::MatrixXd y_;        // data values (NaN missing)
  Eigen::MatrixXd z_;        // n x d latent
  Eigen::MatrixXd mean_;     // n x d, alpha + eta Lambda'
  Eigen::VectorXd sd_;       // sqrt(sigma2)
  FactorState state_;
  std::vector<NumericColumn> numeric_;
  std::vector<CategoricalColumn> categorical_;
  std::vector<std::vector<Eigen::Index>> observed_rows_;
  std::vector<MissingCell> missing_cells_;
};

/// Runs iters sweeps and keeps every thin-th draw after burn-in.
PosteriorOutput run_chain(const Dataset& data, std::vector<ColumnModel> models,
                          const ChainConfig& config);

/// Single-site update of z_j for every row given a dense correlation C and
/// intercepts (latent-level form of the sampler, used to cross-check the
/// factor-conditional updates).
void dense_single_site_sweep(Rng& rng, const Eigen::MatrixXd& c, const Eigen::VectorXd& alpha,
                             Eigen::MatrixXd& z,
                             const std::vector<std::vector<TruncationInterval>>& intervals);

}  // namespace auxcop
