#include "auxcop/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "auxcop/error.hpp"
#include "auxcop/imputation.hpp"
#include "auxcop/io.hpp"
#include "auxcop/regression.hpp"
#include "auxcop/stats.hpp"

namespace auxcop {

namespace {

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t t = 0; t < count; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < count; t = next++) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double type7_quantile(std::vector<double>& v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median_of(std::vector<double> v) { return v.empty() ? 0.0 : type7_quantile(v, 0.5); }

std::uint64_t method_key(AuxGranularity g) { return static_cast<std::uint64_t>(g) + 1; }

}  // namespace

int configured_threads() {
  if (const char* env = std::getenv("COPULA_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Eigen::MatrixXd gen_correlation(Rng& rng, int dim) {
  if (dim < 2) throw Error(Errc::config_error, "correlation dimension must be >= 2");
  const double df = dim + 2.0;
  // Bartlett factor of W ~ Wishart(df, I); Sigma = W^{-1} ~ inverse-Wishart(df, I).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    a(i, i) = std::sqrt(rng.gamma(0.5 * (df - i), 0.5));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd w = a * a.transpose();
  const Eigen::MatrixXd sigma = w.llt().solve(Eigen::MatrixXd::Identity(dim, dim));
  const Eigen::VectorXd inv_sd = sigma.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd c = inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal();
  c = (0.5 * (c + c.transpose())).eval();
  c.diagonal().setOnes();
  return c;
}

std::vector<MarginalPtr> cycle_marginals(int p) {
  std::vector<MarginalPtr> out;
  for (int j = 0; j < p; ++j) {
    switch (j % 3) {
      case 0: out.push_back(make_gamma(1.0, 1.0)); break;
      case 1: out.push_back(make_noncentral_t(5.0, 2.0)); break;
      default: out.push_back(make_beta(1.0, 2.0)); break;
    }
  }
  return out;
}

std::pair<double, double> support_bounds(const ContinuousMarginal& f) {
  return {f.quantile(1e-12), f.upper_quantile(1e-12)};
}

SimulatedData gen_copula_data(Rng& rng, const Eigen::MatrixXd& c0,
                              const std::vector<MarginalPtr>& marginals,
                              const Eigen::VectorXd& alpha_r, int n) {
  const auto p = static_cast<Eigen::Index>(marginals.size());
  if (c0.rows() != 2 * p || alpha_r.size() != p)
    throw Error(Errc::contract_violation, "C0 must be 2p x 2p and alpha_r of length p");
  const Eigen::MatrixXd l = robust_cholesky(c0).matrixL();

  SimulatedData sim;
  sim.c0 = c0;
  sim.marginals = marginals;
  for (const auto& f : marginals) sim.bounds.push_back(support_bounds(*f));
  sim.complete.resize(n, p);
  Eigen::MatrixXd masked(n, p);
  Eigen::VectorXd e(2 * p);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < 2 * p; ++k) e(k) = rng.normal();
    Eigen::VectorXd z = l * e;
    z.tail(p) += alpha_r;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto [lo, hi] = sim.bounds[static_cast<std::size_t>(j)];
      const double y = std::clamp(known_marginal_inverse(*marginals[static_cast<std::size_t>(j)], z(j)), lo, hi);
      sim.complete(i, j) = y;
      masked(i, j) = z(p + j) > 0.0 ? kMissing : y;
    }
  }
  std::vector<ColumnSchema> schemas;
  for (Eigen::Index j = 0; j < p; ++j)
    schemas.push_back({"y" + std::to_string(j + 1), ColumnKind::continuous, {}, MissingnessMode::modeled});
  sim.data = Dataset(std::move(schemas), std::move(masked));
  return sim;
}

std::vector<int> apply_an_missingness(Rng& rng, const std::vector<double>& values, double intercept,
                                      double slope) {
  std::vector<int> mask(values.size(), 0);
  if (values.empty()) return mask;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double scaled = sd > 0.0 ? (values[i] - mean) / sd : 0.0;
    mask[i] = rng.bernoulli(norm_cdf(intercept + slope * scaled)) ? 1 : 0;
  }
  return mask;
}

const char* to_string(AuxGranularity g) noexcept {
  switch (g) {
    case AuxGranularity::full: return "full";
    case AuxGranularity::eql_median: return "eql_m";
    case AuxGranularity::eql_deciles: return "eql_deciles";
    case AuxGranularity::eql_quarter: return "eql_every4";
    case AuxGranularity::ehql_median: return "ehql_m";
    case AuxGranularity::mar_baseline: return "mar_baseline";
  }
  return "?";
}

AuxGranularity aux_granularity_from_string(const std::string& s) {
  for (auto g : {AuxGranularity::full, AuxGranularity::eql_median, AuxGranularity::eql_deciles,
                 AuxGranularity::eql_quarter, AuxGranularity::ehql_median,
                 AuxGranularity::mar_baseline})
    if (s == to_string(g)) return g;
  throw Error(Errc::config_error, "unknown auxiliary granularity '" + s + "'");
}

AuxiliaryQuantileSet true_aux(const ContinuousMarginal& f, const std::vector<double>& taus,
                              std::pair<double, double> bounds) {
  AuxiliaryQuantileSet aux;
  for (double tau : taus) {
    double v = tau <= 0.0 ? bounds.first : tau >= 1.0 ? bounds.second : f.quantile(tau);
    aux.points.push_back({v, tau});
  }
  return aux;
}

std::vector<double> decile_taus() {
  std::vector<double> t;
  for (int k = 0; k <= 10; ++k) t.push_back(k / 10.0);
  return t;
}

FitSetup fit_setup(const SimulatedData& sim, AuxGranularity g) {
  const auto p = sim.data.cols();
  FitSetup setup;
  setup.data = sim.data;
  setup.models.resize(static_cast<std::size_t>(p));
  std::vector<double> taus;
  switch (g) {
    case AuxGranularity::full: setup.mode = LikelihoodMode::full_marginal; break;
    case AuxGranularity::eql_median: setup.mode = LikelihoodMode::eql; taus = {0.0, 0.5, 1.0}; break;
    case AuxGranularity::eql_deciles: setup.mode = LikelihoodMode::eql; taus = decile_taus(); break;
    case AuxGranularity::eql_quarter:
      setup.mode = LikelihoodMode::eql;
      for (int k = 0; k <= 25; ++k) taus.push_back(k * 0.04);
      taus.back() = 1.0;
      break;
    case AuxGranularity::ehql_median: setup.mode = LikelihoodMode::ehql; taus = {0.0, 0.5, 1.0}; break;
    case AuxGranularity::mar_baseline: {
      setup.mode = LikelihoodMode::ehql;
      auto schemas = sim.data.schemas();
      for (auto& s : schemas) s.missingness = MissingnessMode::mcar;
      setup.data = Dataset(std::move(schemas), sim.data.values());
      for (Eigen::Index j = 0; j < p; ++j)
        setup.models[static_cast<std::size_t>(j)].aux =
            empirical_aux(sim.data.observed(j), decile_taus(), sim.data.schema(j).kind);
      return setup;
    }
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& model = setup.models[static_cast<std::size_t>(j)];
    const auto& f = sim.marginals[static_cast<std::size_t>(j)];
    if (g == AuxGranularity::full)
      model.marginal = f;
    else
      model.aux = true_aux(*f, taus, sim.bounds[static_cast<std::size_t>(j)]);
  }
  return setup;
}

CorrelationSummary summarize_correlation(const PosteriorOutput& post, const Eigen::MatrixXd& truth,
                                         Eigen::Index block) {
  CorrelationSummary s;
  const Eigen::MatrixXd mean = post.mean_correlation();
  std::vector<double> abs_err;
  double covered = 0.0;
  double width = 0.0;
  double frob = 0.0;
  std::vector<double> vals(post.draws.size());
  for (Eigen::Index u = 0; u < block; ++u)
    for (Eigen::Index v = u + 1; v < block; ++v) {
      for (std::size_t t = 0; t < post.draws.size(); ++t) vals[t] = post.draws[t].corr(u, v);
      double lo = mean(u, v), hi = mean(u, v);
      if (!vals.empty()) {
        lo = type7_quantile(vals, 0.025);
        hi = type7_quantile(vals, 0.975);
      }
      const double t0 = truth(u, v);
      covered += (t0 >= lo && t0 <= hi) ? 1.0 : 0.0;
      width += hi - lo;
      abs_err.push_back(std::fabs(mean(u, v) - t0));
      frob += 2.0 * (mean(u, v) - t0) * (mean(u, v) - t0);
      ++s.entries;
    }
  if (s.entries > 0) {
    s.coverage = covered / s.entries;
    s.mean_width = width / s.entries;
  }
  s.median_abs_error = median_of(abs_err);
  s.frobenius = std::sqrt(frob);
  return s;
}

MarginalRecovery marginal_recovery(const PosteriorOutput& post, const SimulatedData& sim,
                                   Eigen::Index j) {
  MarginalRecovery r;
  const auto& aux = post.models[static_cast<std::size_t>(j)].aux;
  if (!aux || post.draws.empty()) return r;
  std::vector<double> points;
  for (const auto& pt : aux->points)
    if (!pt.known()) points.push_back(pt.value);
  if (points.empty()) return r;

  std::vector<double> mean(points.size(), 0.0);
  std::size_t used = 0;
  for (const auto& d : post.draws) {
    if (static_cast<std::size_t>(j) >= d.marginal_knots.size() ||
        d.marginal_knots[static_cast<std::size_t>(j)].empty())
      continue;
    const auto spline = fit_monotone(d.marginal_knots[static_cast<std::size_t>(j)]);
    for (std::size_t q = 0; q < points.size(); ++q) mean[q] += spline(points[q]);
    ++used;
  }
  if (used == 0) return r;
  const auto observed = sim.data.observed(j);
  const auto& f = *sim.marginals[static_cast<std::size_t>(j)];
  for (std::size_t q = 0; q < points.size(); ++q) {
    const double truth = f.cdf(points[q]);
    const double est = mean[q] / static_cast<double>(used);
    const double ecdf =
        static_cast<double>(std::count_if(observed.begin(), observed.end(),
                                          [&](double y) { return y <= points[q]; })) /
        static_cast<double>(observed.size());
    r.model_error = std::max(r.model_error, std::fabs(est - truth));
    r.ecdf_error = std::max(r.ecdf_error, std::fabs(ecdf - truth));
  }
  r.points = static_cast<int>(points.size());
  return r;
}

void ExperimentReport::add(std::string metric, std::string method, int n, int p, int rep,
                           double value) {
  rows.push_back({std::move(metric), std::move(method), n, p, rep, value});
}

double ExperimentReport::mean(const std::string& metric, const std::string& method, int n) const {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : rows)
    if (r.metric == metric && r.method == method && (n == 0 || r.n == n)) {
      sum += r.value;
      ++count;
    }
  return count ? sum / count : std::nan("");
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << "metric,method,n,p,rep,value\n";
  for (const auto& r : rows)
    out << r.metric << ',' << r.method << ',' << r.n << ',' << r.p << ',' << r.rep << ','
        << format_double(r.value) << '\n';
  return out.str();
}

nlohmann::json ExperimentReport::summary() const {
  std::map<std::tuple<std::string, std::string, int>, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    auto& slot = acc[{r.metric, r.method, r.n}];
    slot.first += r.value;
    slot.second += 1;
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, v] : acc)
    out.push_back({{"metric", std::get<0>(key)},
                   {"method", std::get<1>(key)},
                   {"n", std::get<2>(key)},
                   {"mean", v.first / v.second},
                   {"count", v.second}});
  return out;
}

namespace {

SimulatedData leading_rows(const SimulatedData& sim, int n) {
  SimulatedData out;
  out.c0 = sim.c0;
  out.marginals = sim.marginals;
  out.bounds = sim.bounds;
  out.complete = sim.complete.topRows(n);
  out.data = Dataset(sim.data.schemas(), sim.data.values().topRows(n));
  return out;
}

}  // namespace

ExperimentReport run_consistency_study(const SimConfig& config) {
  if (config.sample_sizes.empty() || config.p < 1)
    throw Error(Errc::config_error, "sample_sizes and p must be set");
  const int nmax = *std::max_element(config.sample_sizes.begin(), config.sample_sizes.end());
  const auto margins = cycle_marginals(config.p);

  std::vector<SimulatedData> sims;
  for (int r = 0; r < config.replications; ++r) {
    Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(r), 0);
    const Eigen::MatrixXd c0 = gen_correlation(rng, 2 * config.p);
    const Eigen::VectorXd alpha_r =
        Eigen::VectorXd::Constant(config.p, norm_quantile(config.missing_rate));
    sims.push_back(gen_copula_data(rng, c0, margins, alpha_r, nmax));
  }

  struct Task {
    int rep;
    int n;
    AuxGranularity g;
  };
  std::vector<Task> tasks;
  for (int r = 0; r < config.replications; ++r)
    for (int n : config.sample_sizes)
      for (auto g : config.granularities) tasks.push_back({r, n, g});

  std::vector<std::vector<ReportRow>> results(tasks.size());
  parallel_for(tasks.size(), configured_threads(), [&](std::size_t t) {
    const Task& task = tasks[t];
    const SimulatedData sim = leading_rows(sims[static_cast<std::size_t>(task.rep)], task.n);
    const FitSetup setup = fit_setup(sim, task.g);
    ChainConfig cc;
    cc.mode = setup.mode;
    cc.iters = config.iters;
    cc.burnin = config.burnin;
    cc.thin = config.thin;
    cc.seed = Rng::substream(config.seed, static_cast<std::uint64_t>(task.rep) + 1,
                             method_key(task.g) * 100003 + static_cast<std::uint64_t>(task.n))
                  .engine()();
    cc.store_missing = false;
    cc.store_marginals = false;
    const PosteriorOutput post = run_chain(setup.data, setup.models, cc);
    const std::string method = to_string(task.g);
    auto& rows = results[t];
    auto push = [&](const char* metric, double v) {
      rows.push_back({metric, method, task.n, config.p, task.rep, v});
    };
    const Eigen::Index d = post.layout.size();
    if (task.g != AuxGranularity::mar_baseline) {
      const auto all = summarize_correlation(post, sim.c0, d);
      push("coverage", all.coverage);
      push("width", all.mean_width);
      push("median_abs_error", all.median_abs_error);
      push("frobenius", all.frobenius);
    }
    const auto study = summarize_correlation(post, sim.c0, config.p);
    push("study_coverage", study.coverage);
    push("study_width", study.mean_width);
    push("study_median_abs_error", study.median_abs_error);
    push("seconds", post.seconds);
  });

  ExperimentReport report;
  for (auto& rows : results)
    for (auto& r : rows) report.rows.push_back(std::move(r));
  return report;
}

Population make_population(Rng& rng, int size, double tau) {
  // Latent correlation among (econ, age, race, ndi, math).
  Eigen::MatrixXd r(5, 5);
  r << 1.0, -0.3, 0.3, 0.4, -0.3,
      -0.3, 1.0, -0.1, -0.2, 0.2,
      0.3, -0.1, 1.0, 0.3, -0.2,
      0.4, -0.2, 0.3, 1.0, -0.4,
      -0.3, 0.2, -0.2, -0.4, 1.0;
  const Eigen::MatrixXd l = robust_cholesky(r).matrixL();
  const auto ndi_margin = make_gamma(9.0, 3.0);
  const double econ_cut = norm_quantile(0.55);
  const double race_cut1 = norm_quantile(0.55);
  const double race_cut2 = norm_quantile(0.85);

  Eigen::MatrixXd values(size, 5);
  Eigen::VectorXd e(5);
  for (int i = 0; i < size; ++i) {
    for (int k = 0; k < 5; ++k) e(k) = rng.normal();
    const Eigen::VectorXd w = l * e;
    values(i, 0) = w(0) > econ_cut ? 1.0 : 0.0;
    values(i, 1) = std::clamp(std::round(27.0 + 6.0 * w(1)), 15.0, 44.0);
    values(i, 2) = w(2) < race_cut1 ? 0.0 : (w(2) < race_cut2 ? 1.0 : 2.0);
    values(i, 3) = known_marginal_inverse(*ndi_margin, w(3));
    values(i, 4) = 250.0 + 10.0 * w(4);
  }
  std::vector<ColumnSchema> schemas{
      {"econ_disadv", ColumnKind::binary, {}, MissingnessMode::mcar},
      {"mother_age", ColumnKind::count, {}, MissingnessMode::mcar},
      {"mother_race", ColumnKind::categorical, {"A", "B", "C"}, MissingnessMode::mcar},
      {"ndi", ColumnKind::continuous, {}, MissingnessMode::modeled},
      {"math_score", ColumnKind::continuous, {}, MissingnessMode::mcar}};

  Population pop;
  pop.data = Dataset(std::move(schemas), std::move(values));
  pop.response = "math_score";
  pop.covariates = {"econ_disadv", "mother_age", "mother_race", "ndi"};
  pop.mnar_column = "ndi";
  const Design design =
      build_design(pop.data.schemas(), pop.data.values(), {pop.response, pop.covariates, false});
  pop.coef_names = design.names;
  pop.target = quantile_coefficients(design.x, design.y, tau);
  const Eigen::VectorXd ndi = pop.data.values().col(3);
  pop.mnar_mean = ndi.mean();
  pop.mnar_sd = std::sqrt((ndi.array() - pop.mnar_mean).square().sum() / (ndi.size() - 1.0));
  return pop;
}

ExperimentReport run_coverage_study(const CoverageConfig& config) {
  ExperimentReport report;
  if (config.replications <= 0) return report;
  if (config.n > config.population)
    throw Error(Errc::config_error, "sample size exceeds the population");

  Rng pop_rng = Rng::substream(config.seed, 0xC0FFEE, 0);
  const Population pop = make_population(pop_rng, config.population, config.tau);
  const Eigen::Index mnar = pop.data.column_index(pop.mnar_column);
  std::vector<double> pop_mnar(static_cast<std::size_t>(pop.data.rows()));
  for (Eigen::Index i = 0; i < pop.data.rows(); ++i) pop_mnar[static_cast<std::size_t>(i)] = pop.data.value(i, mnar);
  const auto [mn, mx] = std::minmax_element(pop_mnar.begin(), pop_mnar.end());
  const double pop_median = median_of(pop_mnar);
  AuxiliaryQuantileSet mnar_aux;
  mnar_aux.points = {{*mn, 0.0}, {pop_median, 0.5}, {*mx, 1.0}};

  const std::vector<std::string> methods =
      config.include_baseline ? std::vector<std::string>{"ehql", "mar_baseline"}
                              : std::vector<std::string>{"ehql"};
  const int threads = config.threads > 0 ? config.threads : configured_threads();

  std::vector<std::vector<ReportRow>> results(static_cast<std::size_t>(config.replications));
  parallel_for(results.size(), threads, [&](std::size_t rep) {
    Rng rng = Rng::substream(config.seed, rep + 1, 0);
    // Simple random sample without replacement.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pop.data.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    for (int k = 0; k < config.n; ++k) {
      const auto pick = k + static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(idx.size() - k)));
      std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick)]);
    }
    Eigen::MatrixXd values(config.n, pop.data.cols());
    for (int k = 0; k < config.n; ++k) values.row(k) = pop.data.values().row(idx[static_cast<std::size_t>(k)]);

    std::vector<double> mnar_values(static_cast<std::size_t>(config.n));
    for (int k = 0; k < config.n; ++k) mnar_values[static_cast<std::size_t>(k)] = values(k, mnar);
    const auto mask = apply_an_missingness(rng, mnar_values);
    for (int k = 0; k < config.n; ++k)
      if (mask[static_cast<std::size_t>(k)]) values(k, mnar) = kMissing;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j == mnar) continue;
      for (int k = 0; k < config.n; ++k)
        if (rng.bernoulli(config.mcar_rate)) values(k, j) = kMissing;
    }

    auto& rows = results[rep];
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const bool baseline = methods[mi] == "mar_baseline";
      auto schemas = pop.data.schemas();
      if (baseline)
        for (auto& s : schemas) s.missingness = MissingnessMode::mcar;
      const Dataset data(schemas, values);
      std::vector<ColumnModel> models(schemas.size());
      for (Eigen::Index j = 0; j < data.cols(); ++j) {
        if (!schemas[static_cast<std::size_t>(j)].is_numeric()) continue;
        models[static_cast<std::size_t>(j)].aux =
            (j == mnar && !baseline)
                ? mnar_aux
                : empirical_aux(data.observed(j), decile_taus(), schemas[static_cast<std::size_t>(j)].kind);
      }
      ChainConfig cc;
      cc.mode = LikelihoodMode::ehql;
      cc.iters = config.iters;
      cc.burnin = config.burnin;
      cc.seed = Rng::substream(config.seed, rep + 1, mi + 1).engine()();
      const PosteriorOutput post = run_chain(data, models, cc);
      const auto imputations = make_imputations(data, post, config.m, config.spacing);

      const Eigen::Index ncoef = pop.target.size();
      std::vector<std::vector<double>> est(static_cast<std::size_t>(ncoef)), var(static_cast<std::size_t>(ncoef));
      Rng boot = Rng::substream(config.seed, rep + 1, 100 + mi);
      for (const auto& imp : imputations) {
        const Design design =
            build_design(data.schemas(), imp.values, {pop.response, pop.covariates, false});
        const auto fit = fit_quantile_regression(design, config.tau, boot, config.bootstrap);
        for (Eigen::Index c = 0; c < ncoef; ++c) {
          est[static_cast<std::size_t>(c)].push_back(fit.coef(c));
          var[static_cast<std::size_t>(c)].push_back(fit.var(c));
        }
      }
      for (Eigen::Index c = 0; c < ncoef; ++c) {
        const auto pooled = rubin_combine(est[static_cast<std::size_t>(c)], var[static_cast<std::size_t>(c)]);
        const double truth = pop.target(c);
        const std::string& name = pop.coef_names[static_cast<std::size_t>(c)];
        const int rep_i = static_cast<int>(rep);
        rows.push_back({"coverage/" + name, methods[mi], config.n, 0, rep_i,
                        (truth >= pooled.ci_lo && truth <= pooled.ci_hi) ? 1.0 : 0.0});
        rows.push_back({"bias/" + name, methods[mi], config.n, 0, rep_i, pooled.qbar - truth});
        rows.push_back({"mse/" + name, methods[mi], config.n, 0, rep_i,
                        (pooled.qbar - truth) * (pooled.qbar - truth)});
        rows.push_back({"width/" + name, methods[mi], config.n, 0, rep_i, pooled.ci_hi - pooled.ci_lo});
      }
      rows.push_back({"seconds", methods[mi], config.n, 0, static_cast<int>(rep), post.seconds});
    }
  });
  for (auto& rows : results)
    for (auto& r : rows) report.rows.push_back(std::move(r));
  return report;
}

}  // namespace auxcop
