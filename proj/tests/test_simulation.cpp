#include <doctest.h>

#include <boost/math/distributions/non_central_t.hpp>
#include <cmath>
#include <cstdlib>

#include "auxcop/error.hpp"
#include "auxcop/simulation.hpp"
#include "oracles.hpp"

using namespace auxcop;

namespace {

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), m.col(j).data() + m.rows()};
}

}  // namespace

TEST_CASE("generated correlations") {
  Rng rng(1);
  double off = 0.0;
  int count = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    const auto c = gen_correlation(rng, 4);
    REQUIRE(c.isApprox(c.transpose(), 0.0));
    for (int j = 0; j < 4; ++j) CHECK(c(j, j) == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(Eigen::LLT<Eigen::MatrixXd>(c).info() == Eigen::Success);
    for (int j = 0; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) {
        off += c(j, k);
        ++count;
      }
  }
  CHECK(std::fabs(off / count) < 0.02);
}

TEST_CASE("margins of generated data") {
  Rng rng(2);
  const int p = 3, n = 20000;
  const Eigen::MatrixXd c0 = gen_correlation(rng, 2 * p);
  const Eigen::VectorXd ar = Eigen::VectorXd::Constant(p, oracle::phi_quantile(0.25));
  const auto sim = gen_copula_data(rng, c0, cycle_marginals(p), ar, n);
  CHECK(sim.c0 == c0);
  CHECK(sim.complete.allFinite());

  const double crit = oracle::ks_critical(n, 0.01 / 3);
  const boost::math::non_central_t nct(5, 2);
  CHECK(oracle::ks_statistic(column(sim.complete, 0), [](double x) { return x <= 0 ? 0.0 : 1 - std::exp(-x); }) < crit);
  CHECK(oracle::ks_statistic(column(sim.complete, 1), [&](double x) { return boost::math::cdf(nct, x); }) < crit);
  CHECK(oracle::ks_statistic(column(sim.complete, 2), [](double x) {
          return x <= 0 ? 0.0 : x >= 1 ? 1.0 : 1 - (1 - x) * (1 - x);
        }) < crit);
  const double se = std::sqrt(0.25 * 0.75 / n);
  for (Eigen::Index j = 0; j < p; ++j) {
    CHECK(std::fabs(sim.data.missing_rate(j) - 0.25) < 4 * se);
    CHECK(sim.complete(0, j) >= sim.bounds[static_cast<std::size_t>(j)].first);
    CHECK(sim.complete(0, j) <= sim.bounds[static_cast<std::size_t>(j)].second);
    for (Eigen::Index i = 0; i < n; ++i)
      if (!sim.data.is_missing(i, j)) REQUIRE(sim.data.value(i, j) == sim.complete(i, j));
  }
}

TEST_CASE("MCAR masking leaves the observed margin intact") {
  Rng rng(3);
  const int n = 20000;
  const auto sim = gen_copula_data(rng, Eigen::MatrixXd::Identity(2, 2), {make_gamma(1, 1)},
                                   Eigen::VectorXd::Constant(1, 0.0), n);
  const auto obs = sim.data.observed(0);
  CHECK(std::fabs(static_cast<double>(obs.size()) / n - 0.5) < 0.015);
  CHECK(oracle::ks_statistic(obs, [](double x) { return x <= 0 ? 0.0 : 1 - std::exp(-x); }) <
        oracle::ks_critical(obs.size()));
}

TEST_CASE("AN missingness") {
  Rng rng(4);
  const int n = 40000;
  std::vector<double> v(n);
  for (auto& x : v) x = 10.0 + 3.0 * rng.normal();
  const auto r = apply_an_missingness(rng, v);
  double rate = 0.0, low = 0.0, high = 0.0;
  int nl = 0, nh = 0;
  for (int i = 0; i < n; ++i) {
    rate += r[i];
    if (v[i] < 10.0) {
      low += r[i];
      ++nl;
    } else {
      high += r[i];
      ++nh;
    }
  }
  // E Phi(a + b Z) = Phi(a / sqrt(1 + b^2)).
  CHECK(rate / n == doctest::Approx(oracle::phi_cdf(-0.5 / std::sqrt(1 + 1.3 * 1.3))).epsilon(0.03));
  CHECK(low / nl > high / nh);
}

TEST_CASE("support bounds and true quantiles") {
  const auto g = make_gamma(1, 1);
  const auto b = support_bounds(*g);
  CHECK(b.first == doctest::Approx(1e-12).epsilon(1e-6));
  CHECK(b.second == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
  const auto aux = true_aux(*g, {0.0, 0.5, 1.0}, b);
  REQUIRE(aux.size() == 3);
  CHECK(aux.points[1].value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(aux.lower() == b.first);
  CHECK(aux.upper() == b.second);
  const auto d = decile_taus();
  CHECK(d.size() == 11);
  CHECK(d.front() == 0.0);
  CHECK(d.back() == 1.0);
}

TEST_CASE("fit setups") {
  Rng rng(5);
  const auto sim = gen_copula_data(rng, gen_correlation(rng, 4), cycle_marginals(2),
                                   Eigen::VectorXd::Zero(2), 200);
  const auto full = fit_setup(sim, AuxGranularity::full);
  CHECK(full.mode == LikelihoodMode::full_marginal);
  CHECK(full.models[0].marginal);
  const auto eql = fit_setup(sim, AuxGranularity::eql_median);
  CHECK(eql.mode == LikelihoodMode::eql);
  CHECK(eql.models[1].aux->size() == 3);
  const auto mar = fit_setup(sim, AuxGranularity::mar_baseline);
  CHECK(mar.data.schema(0).missingness == MissingnessMode::mcar);
  CHECK(mar.data.schema(1).missingness == MissingnessMode::mcar);
  CHECK(mar.models[0].aux->size() == 11);
  CHECK(build_layout(mar.data.schemas()).size() == 2);
  CHECK(build_layout(eql.data.schemas()).size() == 4);
  for (auto g : {AuxGranularity::full, AuxGranularity::eql_median, AuxGranularity::eql_deciles,
                 AuxGranularity::eql_quarter, AuxGranularity::ehql_median, AuxGranularity::mar_baseline})
    CHECK(aux_granularity_from_string(to_string(g)) == g);
}

TEST_CASE("correlation summary against a known posterior") {
  PosteriorOutput post;
  Eigen::MatrixXd truth(3, 3);
  truth << 1, 0.2, -0.1, 0.2, 1, 0.4, -0.1, 0.4, 1;
  for (int k = 0; k < 10; ++k) {
    PosteriorDraw d;
    d.corr = truth;
    d.corr(0, 1) = d.corr(1, 0) = 0.2 + 0.01 * (k - 4.5);
    post.draws.push_back(d);
  }
  const auto s = summarize_correlation(post, truth, 3);
  CHECK(s.entries == 3);
  CHECK(s.coverage == doctest::Approx(1.0));
  CHECK(s.median_abs_error < 1e-12);
  const auto two = summarize_correlation(post, truth, 2);
  CHECK(two.entries == 1);
}

TEST_CASE("reports") {
  ExperimentReport r;
  CHECK(r.empty());
  r.add("coverage", "a", 100, 2, 0, 1.0);
  r.add("coverage", "a", 100, 2, 1, 0.5);
  r.add("coverage", "a", 200, 2, 0, 0.0);
  CHECK(r.mean("coverage", "a", 100) == 0.75);
  CHECK(r.mean("coverage", "a") == doctest::Approx(0.5));
  CHECK(r.to_csv().rfind("metric,method,n,p,rep,value\n", 0) == 0);

  SimConfig sc;
  sc.replications = 0;
  CHECK(run_consistency_study(sc).empty());
  CoverageConfig cc;
  cc.replications = 0;
  CHECK(run_coverage_study(cc).empty());
}

TEST_CASE("coverage population") {
  Rng rng(6);
  const auto pop = make_population(rng, 5000, 0.5);
  CHECK_FALSE(pop.data.values().hasNaN());
  CHECK(pop.target.size() == static_cast<Eigen::Index>(pop.coef_names.size()));
  CHECK(pop.data.column_index(pop.response) >= 0);
  CHECK(pop.data.column_index(pop.mnar_column) >= 0);
  CHECK(pop.mnar_sd > 0.0);
}

TEST_CASE("thread count") {
  setenv("COPULA_THREADS", "3", 1);
  CHECK(configured_threads() == 3);
  setenv("COPULA_THREADS", "0", 1);
  CHECK(configured_threads() >= 1);
  unsetenv("COPULA_THREADS");
  CHECK(configured_threads() >= 1);
}
