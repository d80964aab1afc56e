#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "auxcop/error.hpp"
#include "auxcop/imputation.hpp"
#include "oracles.hpp"

using namespace auxcop;

namespace {

Dataset count_data(Rng& rng, int n) {
  std::vector<ColumnSchema> s{{"k", ColumnKind::count, {}, MissingnessMode::modeled},
                              {"y", ColumnKind::continuous, {}, MissingnessMode::mcar}};
  Eigen::MatrixXd v(n, 2);
  for (int i = 0; i < n; ++i) {
    const double u = rng.normal();
    v(i, 0) = std::clamp(std::round(6 + 2.5 * u), 0.0, 14.0);
    v(i, 1) = std::clamp(u + rng.normal(), -6.0, 6.0);
    if (rng.bernoulli(1.0 / (1.0 + std::exp(2 * u)))) v(i, 0) = kMissing;
    if (rng.bernoulli(0.1)) v(i, 1) = kMissing;
  }
  return Dataset(s, v);
}

std::vector<ColumnModel> count_models(const Dataset& d) {
  std::vector<ColumnModel> m(2);
  m[0].aux = validate_aux(d.schema(0), {{0, 0}, {.5, 6}, {1, 14}});
  m[1].aux = validate_aux(d.schema(1), {{0, -6}, {.5, 0}, {1, 6}});
  return m;
}

}  // namespace

TEST_CASE("imputation indices") {
  const auto idx = imputation_indices(2500, 20, 125);
  REQUIRE(idx.size() == 20);
  for (std::size_t k = 0; k < 20; ++k) CHECK(idx[k] == 125 * (k + 1) - 1);
  CHECK(imputation_indices(2500, 1, 125) == std::vector<std::size_t>{2499});
  try {
    imputation_indices(2500, 3, 1000);
    FAIL("expected InsufficientDraws");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::insufficient_draws);
    CHECK(std::string(e.what()).find("spacing") != std::string::npos);
  }
}

TEST_CASE("rubin combining rules") {
  const std::vector<double> q1{1.0, 1.0}, u1{0.5, 0.5};
  auto r = rubin_combine(q1, u1);
  CHECK(r.qbar == 1.0);
  CHECK(r.b == 0.0);
  CHECK(r.t == 0.5);
  CHECK(std::isinf(r.df));
  CHECK(r.ci_hi - r.qbar == doctest::Approx(oracle::phi_quantile(0.975) * std::sqrt(0.5)).epsilon(1e-12));

  const std::vector<double> q2{1, 2}, u2{1, 1};
  r = rubin_combine(q2, u2);
  CHECK(r.qbar == 1.5);
  CHECK(r.b == 0.5);
  CHECK(r.ubar == 1.0);
  CHECK(r.t == 1.75);
  CHECK(r.m == 2);
  const double df = 1.0 * std::pow(1.0 + 1.0 / (1.5 * 0.5), 2);
  CHECK(r.df == doctest::Approx(df).epsilon(1e-14));
  const double tq = boost::math::quantile(boost::math::students_t(df), 0.975);
  CHECK(r.ci_lo == doctest::Approx(1.5 - tq * std::sqrt(1.75)).epsilon(1e-12));

  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> q, u;
    for (int k = 0; k < 7; ++k) {
      q.push_back(rng.normal());
      u.push_back(rng.exponential(1.0));
    }
    const auto got = rubin_combine(q, u);
    const auto want = oracle::rubin(q, u);
    CHECK(got.qbar == doctest::Approx(want.qbar).epsilon(1e-14));
    CHECK(got.b == doctest::Approx(want.b).epsilon(1e-13));
    CHECK(got.t == doctest::Approx(want.t).epsilon(1e-13));
    // Affine equivariance.
    const double c = 3.7;
    std::vector<double> qc, uc;
    for (std::size_t k = 0; k < q.size(); ++k) {
      qc.push_back(c * q[k]);
      uc.push_back(c * c * u[k]);
    }
    const auto sc = rubin_combine(qc, uc);
    CHECK(sc.qbar == doctest::Approx(c * got.qbar).epsilon(1e-13));
    CHECK(std::sqrt(sc.t) == doctest::Approx(c * std::sqrt(got.t)).epsilon(1e-13));
    // Equal estimates: B = 0 and T = Ubar.
    const std::vector<double> same(7, q[0]);
    const auto eq = rubin_combine(same, u);
    CHECK(eq.b == 0.0);
    CHECK(eq.t == eq.ubar);
  }
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(rubin_combine(one, one), Error);
}

TEST_CASE("known-marginal imputation inverts the CDF") {
  std::vector<ColumnSchema> s{{"y", ColumnKind::continuous, {}, MissingnessMode::modeled}};
  Eigen::MatrixXd v(2, 1);
  v << 0.3, kMissing;
  const Dataset data(s, v);
  PosteriorOutput post;
  post.mode = LikelihoodMode::full_marginal;
  post.schemas = s;
  post.models.resize(1);
  post.models[0].marginal = make_gamma(1, 1);
  post.missing_cells = {{1, 0}};
  PosteriorDraw d;
  d.missing_values = {norm_cdf(0.0)};
  const auto out = impute_from_draw(data, post, d);
  CHECK(out.values(1, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(out.values(0, 0) == 0.3);
}

TEST_CASE("no missing cells: unchanged") {
  Rng rng(4);
  Dataset d = count_data(rng, 60);
  Eigen::MatrixXd v = d.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      if (std::isnan(v(i, j))) v(i, j) = 1.0;
  const Dataset full(d.schemas(), v);
  ChainConfig c;
  c.iters = 20;
  c.burnin = 10;
  c.seed = 1;
  const auto post = run_chain(full, count_models(full), c);
  const auto imps = make_imputations(full, post, 2, 5);
  for (const auto& imp : imps) CHECK(imp.values == v);
}

TEST_CASE("imputed counts are integers in the support") {
  Rng rng(5);
  const Dataset d = count_data(rng, 300);
  ChainConfig c;
  c.iters = 400;
  c.burnin = 200;
  c.seed = 9;
  const auto post = run_chain(d, count_models(d), c);
  const auto imps = make_imputations(d, post, 5, 40);
  REQUIRE(imps.size() == 5);
  CHECK(imps.back().sweep == 400);
  CHECK(imps.front().sweep == 240);
  for (const auto& imp : imps) {
    CHECK(imp.values.allFinite());
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      const double k = imp.values(i, 0);
      CHECK(k == std::floor(k));
      CHECK(k >= 0);
      CHECK(k <= 14);
      if (!d.is_missing(i, 0)) CHECK(k == d.value(i, 0));
      if (!d.is_missing(i, 1)) CHECK(imp.values(i, 1) == d.value(i, 1));
      CHECK(imp.values(i, 1) >= -6);
      CHECK(imp.values(i, 1) <= 6);
    }
  }
  // Same posterior, same imputations.
  const auto again = make_imputations(d, post, 5, 40);
  for (std::size_t k = 0; k < 5; ++k) CHECK(again[k].values == imps[k].values);
}
