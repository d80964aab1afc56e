#include "auxcop/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>

#include "auxcop/error.hpp"
#include "auxcop/stats.hpp"

namespace auxcop {

const char* to_string(LikelihoodMode mode) noexcept {
  switch (mode) {
    case LikelihoodMode::full_marginal: return "full_marginal";
    case LikelihoodMode::eql: return "eql";
    case LikelihoodMode::ehql: return "ehql";
  }
  return "?";
}

LikelihoodMode likelihood_mode_from_string(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "full" || t == "full_marginal") return LikelihoodMode::full_marginal;
  if (t == "eql") return LikelihoodMode::eql;
  if (t == "ehql") return LikelihoodMode::ehql;
  throw Error(Errc::config_error, "mode must be one of full_marginal, eql, ehql (got '" + s + "')");
}

void ChainConfig::validate() const {
  if (iters < 0) throw Error(Errc::config_error, "iters must be >= 0");
  if (burnin < 0 || (iters > 0 && burnin >= iters))
    throw Error(Errc::config_error, "burnin must be in [0, iters)");
  if (thin < 1) throw Error(Errc::config_error, "thin must be >= 1");
  if (candidate_bins < 2) throw Error(Errc::config_error, "candidate_bins must be >= 2");
  if (hyper.a1 <= 0 || hyper.a2 <= 0 || hyper.nu <= 0 || hyper.a_sigma <= 0 || hyper.b_sigma <= 0)
    throw Error(Errc::config_error, "hyperparameters must be positive");
  if (hyper.rank < 0) throw Error(Errc::config_error, "rank must be >= 0");
}

std::vector<LatentColumn> build_layout(const std::vector<ColumnSchema>& schemas) {
  std::vector<LatentColumn> out;
  for (std::size_t j = 0; j < schemas.size(); ++j) {
    const auto src = static_cast<Eigen::Index>(j);
    switch (schemas[j].kind) {
      case ColumnKind::continuous:
      case ColumnKind::count: out.push_back({LatentRole::numeric, src, -1}); break;
      case ColumnKind::binary: out.push_back({LatentRole::binary, src, -1}); break;
      case ColumnKind::categorical:
        for (std::size_t c = 0; c < schemas[j].levels.size(); ++c)
          out.push_back({LatentRole::level, src, static_cast<int>(c)});
        break;
    }
  }
  for (std::size_t j = 0; j < schemas.size(); ++j)
    if (schemas[j].missingness == MissingnessMode::modeled)
      out.push_back({LatentRole::indicator, static_cast<Eigen::Index>(j), -1});
  return out;
}

Eigen::MatrixXd PosteriorOutput::mean_correlation() const {
  if (draws.empty()) return initial.corr;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(draws.front().corr.rows(), draws.front().corr.cols());
  for (const auto& d : draws) sum += d.corr;
  return sum / static_cast<double>(draws.size());
}

Eigen::Index PosteriorOutput::latent_of(Eigen::Index j) const {
  for (std::size_t l = 0; l < layout.size(); ++l)
    if (layout[l].source == j && layout[l].role != LatentRole::indicator)
      return static_cast<Eigen::Index>(l);
  return -1;
}

Eigen::Index PosteriorOutput::indicator_of(Eigen::Index j) const {
  for (std::size_t l = 0; l < layout.size(); ++l)
    if (layout[l].source == j && layout[l].role == LatentRole::indicator)
      return static_cast<Eigen::Index>(l);
  return -1;
}

namespace {

double clamp_rate(double rate, Eigen::Index n) {
  const double eps = 0.5 / static_cast<double>(std::max<Eigen::Index>(n, 1));
  return std::clamp(rate, eps, 1.0 - eps);
}

// log Phi(x) that stays finite far into the lower tail.
double log_norm_cdf(double x) {
  if (x > -30.0) return std::log(norm_cdf(x));
  return -0.5 * x * x - std::log(-x) - 0.91893853320467274178;
}

}  // namespace

std::vector<double> level_probabilities(std::span<const double> mu, std::span<const double> sd) {
  const std::size_t levels = mu.size();
  std::vector<double> log_pos(levels), log_neg(levels), weight(levels);
  double total_neg = 0.0;
  for (std::size_t c = 0; c < levels; ++c) {
    const double t = mu[c] / sd[c];
    log_pos[c] = log_norm_cdf(t);
    log_neg[c] = log_norm_cdf(-t);
    total_neg += log_neg[c];
  }
  double mx = -kInf;
  for (std::size_t c = 0; c < levels; ++c) {
    weight[c] = log_pos[c] + total_neg - log_neg[c];
    mx = std::max(mx, weight[c]);
  }
  double sum = 0.0;
  for (auto& w : weight) sum += (w = std::exp(w - mx));
  for (auto& w : weight) w /= sum;
  return weight;
}

TruncationInterval ordering_interval(const TruncationInterval& known, double below_max,
                                     double above_min) {
  const TruncationInterval iv{std::max(known.lo, below_max), std::min(known.hi, above_min)};
  if (!(iv.lo < iv.hi)) throw Error(Errc::empty_interval, "ordering bounds crossed");
  return iv;
}

CopulaSampler::CopulaSampler(const Dataset& data, std::vector<ColumnModel> models,
                             ChainConfig config)
    : config_(std::move(config)),
      rng_(config_.seed),
      schemas_(data.schemas()),
      models_(std::move(models)) {
  config_.validate();
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (models_.empty()) models_.resize(static_cast<std::size_t>(p));
  if (static_cast<Eigen::Index>(models_.size()) != p)
    throw Error(Errc::config_error, "one ColumnModel per dataset column is required");

  layout_ = build_layout(schemas_);
  const auto d = static_cast<Eigen::Index>(layout_.size());
  study_dim_ = static_cast<Eigen::Index>(
      std::count_if(layout_.begin(), layout_.end(),
                    [](const LatentColumn& c) { return c.role != LatentRole::indicator; }));
  std::vector<bool> free(static_cast<std::size_t>(d));
  for (Eigen::Index l = 0; l < d; ++l)
    free[static_cast<std::size_t>(l)] = layout_[static_cast<std::size_t>(l)].role != LatentRole::numeric;

  y_ = data.values();
  r_ = data.mask();
  z_ = Eigen::MatrixXd::Zero(n, d);
  state_ = init_factor_state(rng_, n, d, config_.hyper.resolved_rank(static_cast<int>(d)), free);

  observed_rows_.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) observed_rows_[static_cast<std::size_t>(j)] = data.observed_rows(j);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (r_(i, j)) missing_cells_.push_back({i, j});

  for (Eigen::Index l = 0; l < d; ++l) {
    const auto& lc = layout_[static_cast<std::size_t>(l)];
    if (lc.role == LatentRole::numeric) init_numeric(data, lc.source, l);
    if (lc.role == LatentRole::level && lc.level == 0) {
      CategoricalColumn col;
      col.source = lc.source;
      col.first = l;
      col.levels = static_cast<int>(schemas_[static_cast<std::size_t>(lc.source)].levels.size());
      categorical_.push_back(col);
    }
  }
  init_latents(data);
  mean_ = (state_.eta * state_.lambda.transpose()).rowwise() + state_.alpha.transpose();
  sd_ = state_.sigma2.cwiseSqrt();
}

void CopulaSampler::init_numeric(const Dataset& data, Eigen::Index j, Eigen::Index latent) {
  const auto& schema = schemas_[static_cast<std::size_t>(j)];
  auto& model = models_[static_cast<std::size_t>(j)];
  NumericColumn col;
  col.source = j;
  col.latent = latent;
  col.obs_rows = observed_rows_[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    if (data.is_missing(i, j)) col.mis_rows.push_back(i);
  std::vector<double> observed;
  observed.reserve(col.obs_rows.size());
  for (Eigen::Index i : col.obs_rows) observed.push_back(data.value(i, j));

  const bool full = config_.mode == LikelihoodMode::full_marginal &&
                    schema.kind == ColumnKind::continuous;
  if (full) {
    if (!model.marginal)
      throw Error(Errc::config_error,
                  "column '" + schema.name + "' needs a known marginal in full_marginal mode");
    col.fixed.reserve(observed.size());
    for (std::size_t e = 0; e < observed.size(); ++e) {
      col.fixed.push_back(known_marginal_transform(*model.marginal, observed[e]));
      z_(col.obs_rows[e], latent) = col.fixed.back();
    }
    numeric_.push_back(std::move(col));
    return;
  }

  if (!model.aux)
    throw Error(Errc::config_error, "column '" + schema.name + "' needs auxiliary quantiles");
  if (config_.mode == LikelihoodMode::ehql)
    model.aux = augment_with_intermediate(*model.aux, observed, schema.kind, config_.candidate_bins);
  col.bins = build_bins(*model.aux, observed);
  const std::size_t nb = col.bins.bin_count();
  col.members.resize(nb);
  for (std::size_t e = 0; e < observed.size(); ++e)
    col.members[static_cast<std::size_t>(col.bins.bin_of[e])].push_back(e);
  for (const auto& b : col.bins.bins) col.known_interval.push_back(b.latent());
  std::size_t occupied = 0;
  for (const auto& m : col.members) occupied += m.empty() ? 0 : 1;
  col.ordered = config_.mode == LikelihoodMode::ehql && model.aux->intermediate_count() > 0 &&
                occupied > 1;

  // Start inside every constraint: within each run of bins sharing the same
  // known levels, place bin groups at their cumulative-proportion quantiles.
  std::size_t q = 0;
  while (q < nb) {
    const double ta = col.bins.bins[q].known_tau_lo;
    const double tb = col.bins.bins[q].known_tau_hi;
    std::size_t end = q;
    std::size_t total = 0;
    while (end < nb && col.bins.bins[end].known_tau_lo == ta &&
           col.bins.bins[end].known_tau_hi == tb) {
      total += col.members[end].size();
      ++end;
    }
    double cum = 0.0;
    for (std::size_t b = q; b < end; ++b) {
      const auto c = static_cast<double>(col.members[b].size());
      if (c == 0.0) continue;
      const double frac = (cum + 0.5 * c) / static_cast<double>(total);
      const double zval = norm_quantile(ta + (tb - ta) * frac);
      for (std::size_t e : col.members[b]) z_(col.obs_rows[e], latent) = zval;
      cum += c;
    }
    q = end;
  }
  numeric_.push_back(std::move(col));
}

void CopulaSampler::init_latents(const Dataset& data) {
  const Eigen::Index n = data.rows();
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(layout_.size()); ++l) {
    const auto& lc = layout_[static_cast<std::size_t>(l)];
    const Eigen::Index j = lc.source;
    switch (lc.role) {
      case LatentRole::numeric: break;
      case LatentRole::indicator: {
        state_.alpha(l) = norm_quantile(clamp_rate(data.missing_rate(j), n));
        for (Eigen::Index i = 0; i < n; ++i) z_(i, l) = r_(i, j) ? 0.5 : -0.5;
        break;
      }
      case LatentRole::binary: {
        const auto obs = data.observed(j);
        const double ones = obs.empty() ? 0.5
                                        : std::accumulate(obs.begin(), obs.end(), 0.0) /
                                              static_cast<double>(obs.size());
        state_.alpha(l) = norm_quantile(clamp_rate(ones, n));
        for (Eigen::Index i = 0; i < n; ++i)
          z_(i, l) = r_(i, j) ? 0.0 : (y_(i, j) == 1.0 ? 0.5 : -0.5);
        break;
      }
      case LatentRole::level: break;
    }
  }
  for (auto& col : categorical_) {
    const auto obs = data.observed(col.source);
    std::vector<double> freq(static_cast<std::size_t>(col.levels), 0.0);
    for (double v : obs) freq[static_cast<std::size_t>(v)] += 1.0;
    const int mode_level =
        static_cast<int>(std::max_element(freq.begin(), freq.end()) - freq.begin());
    for (int c = 0; c < col.levels; ++c) {
      const double f = obs.empty() ? 1.0 / col.levels : freq[static_cast<std::size_t>(c)] / obs.size();
      state_.alpha(col.first + c) = norm_quantile(clamp_rate(f, n));
    }
    col.current.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const int level = r_(i, col.source) ? mode_level : static_cast<int>(y_(i, col.source));
      col.current[static_cast<std::size_t>(i)] = level;
      for (int c = 0; c < col.levels; ++c) z_(i, col.first + c) = c == level ? 0.5 : -0.5;
    }
  }
}

double CopulaSampler::draw(Eigen::Index i, Eigen::Index l, const TruncationInterval& iv) {
  const double sd = sd_(l);
  return sample_truncated_normal(rng_, {mean_(i, l), sd * sd}, iv);
}

void CopulaSampler::update_numeric(NumericColumn& col) {
  const Eigen::Index l = col.latent;
  for (Eigen::Index i : col.mis_rows) z_(i, l) = mean_(i, l) + sd_(l) * rng_.normal();
  if (!col.fixed.empty() || col.obs_rows.empty()) return;

  const std::size_t nb = col.bins.bin_count();
  if (!col.ordered) {
    for (std::size_t q = 0; q < nb; ++q)
      for (std::size_t e : col.members[q]) {
        const Eigen::Index i = col.obs_rows[e];
        z_(i, l) = draw(i, l, col.known_interval[q]);
      }
    return;
  }

  // Neighbouring bins bound each other: bins below were already refreshed this
  // sweep, bins above still hold the previous sweep's values.
  std::vector<double> suffix_min(nb + 1, kInf);
  for (std::size_t q = nb; q-- > 0;) {
    double m = suffix_min[q + 1];
    for (std::size_t e : col.members[q]) m = std::min(m, z_(col.obs_rows[e], l));
    suffix_min[q] = m;
  }
  double below_max = -kInf;
  for (std::size_t q = 0; q < nb; ++q) {
    if (col.members[q].empty()) continue;
    TruncationInterval iv;
    try {
      iv = ordering_interval(col.known_interval[q], below_max, suffix_min[q + 1]);
    } catch (const Error& e) {
      throw Error(e.code(), "column '" + schemas_[static_cast<std::size_t>(col.source)].name +
                                "', bin " + std::to_string(q) + ": " + e.what());
    }
    double bin_max = -kInf;
    for (std::size_t e : col.members[q]) {
      const Eigen::Index i = col.obs_rows[e];
      z_(i, l) = draw(i, l, iv);
      bin_max = std::max(bin_max, z_(i, l));
    }
    below_max = std::max(below_max, bin_max);
  }
}

void CopulaSampler::update_signed(Eigen::Index l, Eigen::Index source, bool indicator) {
  static const TruncationInterval kPositive{0.0, kInf};
  static const TruncationInterval kNegative{-kInf, 0.0};
  for (Eigen::Index i = 0; i < z_.rows(); ++i) {
    if (indicator) {
      z_(i, l) = draw(i, l, r_(i, source) ? kPositive : kNegative);
    } else if (r_(i, source)) {
      z_(i, l) = mean_(i, l) + sd_(l) * rng_.normal();
    } else {
      z_(i, l) = draw(i, l, y_(i, source) == 1.0 ? kPositive : kNegative);
    }
  }
}

void CopulaSampler::update_categorical(CategoricalColumn& col) {
  static const TruncationInterval kPositive{0.0, kInf};
  static const TruncationInterval kNegative{-kInf, 0.0};
  const auto levels = static_cast<std::size_t>(col.levels);
  std::vector<double> mu(levels), sd(levels), weight(levels);
  for (Eigen::Index i = 0; i < z_.rows(); ++i) {
    int level;
    if (r_(i, col.source)) {
      for (std::size_t c = 0; c < levels; ++c) {
        const Eigen::Index l = col.first + static_cast<Eigen::Index>(c);
        mu[c] = mean_(i, l);
        sd[c] = sd_(l);
      }
      weight = level_probabilities(mu, sd);
      double u = rng_.uniform();
      level = static_cast<int>(levels) - 1;
      for (std::size_t c = 0; c < levels; ++c) {
        if (u < weight[c]) {
          level = static_cast<int>(c);
          break;
        }
        u -= weight[c];
      }
      col.current[static_cast<std::size_t>(i)] = level;
    } else {
      level = col.current[static_cast<std::size_t>(i)];
    }
    for (int c = 0; c < col.levels; ++c) {
      const Eigen::Index l = col.first + c;
      z_(i, l) = draw(i, l, c == level ? kPositive : kNegative);
    }
  }
}

void CopulaSampler::sweep() {
  update_parameters(rng_, state_, config_.hyper, z_);
  mean_ = (state_.eta * state_.lambda.transpose()).rowwise() + state_.alpha.transpose();
  sd_ = state_.sigma2.cwiseSqrt();

  for (auto& col : numeric_) update_numeric(col);
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(layout_.size()); ++l) {
    const auto& lc = layout_[static_cast<std::size_t>(l)];
    if (lc.role == LatentRole::binary) update_signed(l, lc.source, false);
  }
  for (auto& col : categorical_) update_categorical(col);
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(layout_.size()); ++l) {
    const auto& lc = layout_[static_cast<std::size_t>(l)];
    if (lc.role == LatentRole::indicator) update_signed(l, lc.source, true);
  }
}

const BinnedColumn* CopulaSampler::bins(Eigen::Index j) const {
  for (const auto& col : numeric_)
    if (col.source == j) return col.fixed.empty() && !col.bins.bins.empty() ? &col.bins : nullptr;
  return nullptr;
}

const std::vector<Eigen::Index>& CopulaSampler::observed_rows(Eigen::Index j) const {
  return observed_rows_[static_cast<std::size_t>(j)];
}

PosteriorDraw CopulaSampler::snapshot(int sweep_index) const {
  PosteriorDraw out;
  out.sweep = sweep_index;
  const Eigen::MatrixXd omega = covariance_from_factor(state_);
  out.omega_diag = omega.diagonal();
  const Eigen::VectorXd inv_sd = out.omega_diag.cwiseSqrt().cwiseInverse();
  out.corr = inv_sd.asDiagonal() * omega * inv_sd.asDiagonal();
  out.corr.diagonal().setOnes();
  out.alpha = state_.alpha;

  if (config_.store_marginals && config_.mode == LikelihoodMode::ehql) {
    out.marginal_knots.resize(schemas_.size());
    for (const auto& col : numeric_) {
      if (!col.fixed.empty() || col.bins.bins.empty()) continue;
      std::vector<double> zobs(col.obs_rows.size());
      for (std::size_t e = 0; e < zobs.size(); ++e) zobs[e] = z_(col.obs_rows[e], col.latent);
      const auto est = estimate_levels(col.bins, zobs, state_.alpha(col.latent),
                                       std::sqrt(out.omega_diag(col.latent)));
      out.marginal_knots[static_cast<std::size_t>(col.source)] =
          marginal_knots(*models_[static_cast<std::size_t>(col.source)].aux, est);
    }
  }

  if (config_.store_missing) {
    out.missing_values.reserve(missing_cells_.size());
    std::vector<Eigen::Index> first_latent(schemas_.size(), -1);
    for (std::size_t l = layout_.size(); l-- > 0;)
      if (layout_[l].role != LatentRole::indicator)
        first_latent[static_cast<std::size_t>(layout_[l].source)] = static_cast<Eigen::Index>(l);
    for (const auto& cell : missing_cells_) {
      const auto& schema = schemas_[static_cast<std::size_t>(cell.col)];
      const Eigen::Index l = first_latent[static_cast<std::size_t>(cell.col)];
      double v = 0.0;
      switch (schema.kind) {
        case ColumnKind::continuous:
        case ColumnKind::count:
          v = norm_cdf((z_(cell.row, l) - state_.alpha(l)) / std::sqrt(out.omega_diag(l)));
          break;
        case ColumnKind::binary: v = z_(cell.row, l) > 0.0 ? 1.0 : 0.0; break;
        case ColumnKind::categorical:
          for (const auto& cat : categorical_)
            if (cat.source == cell.col) v = cat.current[static_cast<std::size_t>(cell.row)];
          break;
      }
      out.missing_values.push_back(v);
    }
  }
  return out;
}

PosteriorOutput run_chain(const Dataset& data, std::vector<ColumnModel> models,
                          const ChainConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  CopulaSampler sampler(data, std::move(models), config);
  PosteriorOutput out;
  out.mode = config.mode;
  out.schemas = data.schemas();
  out.layout = sampler.layout();
  out.study_dim = sampler.study_dim();
  out.missing_cells = sampler.missing_cells();
  out.initial = sampler.snapshot(0);
  if (config.iters > config.burnin)
    out.draws.reserve(static_cast<std::size_t>((config.iters - config.burnin) / config.thin));
  for (int s = 1; s <= config.iters; ++s) {
    try {
      sampler.sweep();
    } catch (const Error& e) {
      throw Error(e.code(), "sweep " + std::to_string(s) + ": " + e.what());
    }
    if (s > config.burnin && (s - config.burnin) % config.thin == 0)
      out.draws.push_back(sampler.snapshot(s));
  }
  out.models = sampler.models();
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void dense_single_site_sweep(Rng& rng, const Eigen::MatrixXd& c, const Eigen::VectorXd& alpha,
                             Eigen::MatrixXd& z,
                             const std::vector<std::vector<TruncationInterval>>& intervals) {
  const Eigen::Index d = c.rows();
  std::vector<Eigen::VectorXd> weights(static_cast<std::size_t>(d));
  std::vector<double> var(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    // Conditional moments with z = alpha give mu = alpha_j; the weights are
    // recovered from unit perturbations of the other coordinates.
    Eigen::VectorXd base = alpha;
    const ConditionalMoments m0 = conditional_moments(c, alpha, base, j);
    var[static_cast<std::size_t>(j)] = m0.sigma2;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      if (k == j) continue;
      Eigen::VectorXd probe = alpha;
      probe(k) += 1.0;
      w(k) = conditional_moments(c, alpha, probe, j).mu - m0.mu;
    }
    weights[static_cast<std::size_t>(j)] = w;
  }
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const Eigen::VectorXd resid = z.row(i).transpose() - alpha;
      const double mu = alpha(j) + weights[static_cast<std::size_t>(j)].dot(resid);
      z(i, j) = sample_truncated_normal(
          rng, {mu, var[static_cast<std::size_t>(j)]},
          intervals[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
}

}  // namespace auxcop
