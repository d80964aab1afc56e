#include <doctest.h>

#include <cmath>

#include "auxcop/error.hpp"
#include "auxcop/sampler.hpp"
#include "auxcop/simulation.hpp"
#include "oracles.hpp"

using namespace auxcop;

namespace {

std::vector<ColumnSchema> mixed_schemas() {
  return {{"y", ColumnKind::continuous, {}, MissingnessMode::modeled},
          {"b", ColumnKind::binary, {}, MissingnessMode::mcar},
          {"c", ColumnKind::categorical, {"p", "q", "r"}, MissingnessMode::mcar},
          {"k", ColumnKind::count, {}, MissingnessMode::modeled}};
}

// Small mixed-type dataset with missing cells in every column.
Dataset mixed_data(Rng& rng, int n) {
  Eigen::MatrixXd v(n, 4);
  for (int i = 0; i < n; ++i) {
    const double u = rng.normal();
    v(i, 0) = std::clamp(u + 0.5 * rng.normal(), -4.9, 4.9);
    v(i, 1) = u + rng.normal() > 0 ? 1 : 0;
    v(i, 2) = static_cast<double>(rng.index(3));
    v(i, 3) = std::clamp(std::round(5 + 2 * u + rng.normal()), 0.0, 12.0);
    for (int j = 0; j < 4; ++j)
      if (rng.bernoulli(j == 0 ? 0.3 : 0.1)) v(i, j) = kMissing;
  }
  return Dataset(mixed_schemas(), v);
}

std::vector<ColumnModel> mixed_models() {
  std::vector<ColumnModel> m(4);
  m[0].aux = validate_aux(mixed_schemas()[0], {{0, -5}, {.25, -0.8}, {.5, 0}, {.75, 0.8}, {1, 5}});
  m[3].aux = validate_aux(mixed_schemas()[3], {{0, 0}, {.5, 5}, {1, 12}});
  return m;
}

ChainConfig chain(LikelihoodMode mode, int iters, int burnin, std::uint64_t seed) {
  ChainConfig c;
  c.mode = mode;
  c.iters = iters;
  c.burnin = burnin;
  c.seed = seed;
  return c;
}

void check_constraints(const CopulaSampler& s, const Dataset& data, bool ordered) {
  const Eigen::MatrixXd& z = s.latent();
  const auto& layout = s.layout();
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const auto& lc = layout[l];
    const auto L = static_cast<Eigen::Index>(l);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const bool miss = data.is_missing(i, lc.source);
      switch (lc.role) {
        case LatentRole::indicator:
          REQUIRE((miss ? z(i, L) > 0 : z(i, L) < 0));
          break;
        case LatentRole::binary:
          if (!miss) REQUIRE((data.value(i, lc.source) == 1 ? z(i, L) > 0 : z(i, L) < 0));
          break;
        case LatentRole::level:
          if (!miss) REQUIRE((data.value(i, lc.source) == lc.level ? z(i, L) > 0 : z(i, L) < 0));
          break;
        case LatentRole::numeric: break;
      }
    }
    if (lc.role != LatentRole::numeric) continue;
    const BinnedColumn* bins = s.bins(lc.source);
    REQUIRE(bins != nullptr);
    const auto& rows = s.observed_rows(lc.source);
    // Interval compliance against the known levels.
    for (std::size_t e = 0; e < rows.size(); ++e) {
      const auto& b = bins->bins[static_cast<std::size_t>(bins->bin_of[e])];
      const auto iv = b.latent();
      REQUIRE(z(rows[e], L) > iv.lo);
      REQUIRE(z(rows[e], L) <= iv.hi);
    }
    if (!ordered) continue;
    // Bin order implies latent order.
    std::vector<double> lo(bins->bin_count(), kInf), hi(bins->bin_count(), -kInf);
    for (std::size_t e = 0; e < rows.size(); ++e) {
      const auto q = static_cast<std::size_t>(bins->bin_of[e]);
      lo[q] = std::min(lo[q], z(rows[e], L));
      hi[q] = std::max(hi[q], z(rows[e], L));
    }
    double running = -kInf;
    for (std::size_t q = 0; q < lo.size(); ++q) {
      if (hi[q] == -kInf) continue;
      REQUIRE(lo[q] > running);
      running = hi[q];
    }
  }
}

}  // namespace

TEST_CASE("likelihood mode names") {
  CHECK(likelihood_mode_from_string("ehql") == LikelihoodMode::ehql);
  CHECK(likelihood_mode_from_string("EQL") == LikelihoodMode::eql);
  CHECK(likelihood_mode_from_string("full") == LikelihoodMode::full_marginal);
  CHECK(likelihood_mode_from_string("full_marginal") == LikelihoodMode::full_marginal);
  CHECK_THROWS_AS(likelihood_mode_from_string("rank"), Error);
}

TEST_CASE("chain config checks") {
  ChainConfig c;
  CHECK(c.iters == 5000);
  CHECK(c.burnin == 2500);
  CHECK(c.thin == 1);
  CHECK_NOTHROW(c.validate());
  c.burnin = 5000;
  CHECK_THROWS_AS(c.validate(), Error);
  c.burnin = 10;
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("latent layout") {
  const auto layout = build_layout(mixed_schemas());
  REQUIRE(layout.size() == 8);
  CHECK(layout[0].role == LatentRole::numeric);
  CHECK(layout[1].role == LatentRole::binary);
  for (int c = 0; c < 3; ++c) {
    CHECK(layout[static_cast<std::size_t>(2 + c)].role == LatentRole::level);
    CHECK(layout[static_cast<std::size_t>(2 + c)].level == c);
  }
  CHECK(layout[5].role == LatentRole::numeric);
  CHECK(layout[5].source == 3);
  CHECK(layout[6].role == LatentRole::indicator);
  CHECK(layout[6].source == 0);
  CHECK(layout[7].role == LatentRole::indicator);
  CHECK(layout[7].source == 3);
}

TEST_CASE("ordering interval") {
  const TruncationInterval known{norm_quantile(0.25), norm_quantile(0.5)};
  auto iv = ordering_interval(known, -kInf, kInf);
  CHECK(iv.lo == known.lo);
  CHECK(iv.hi == known.hi);
  iv = ordering_interval({norm_quantile(0.25), kInf}, 0.3, kInf);
  CHECK(iv.lo == 0.3);
  iv = ordering_interval(known, -2.0, -0.1);
  CHECK(iv.lo == known.lo);
  CHECK(iv.hi == -0.1);
  CHECK_THROWS_AS(ordering_interval(known, -0.3, -0.4), Error);
}

TEST_CASE("categorical level probabilities") {
  const std::vector<double> mu{0.4, 0.4, 0.4, 0.4}, sd{1.3, 1.3, 1.3, 1.3};
  for (double p : level_probabilities(mu, sd)) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));

  // Two levels: the closed-form orthant product.
  const std::vector<double> m2{0.7, -0.2}, s2{1.0, 0.5};
  const double a = oracle::phi_cdf(0.7) * oracle::phi_cdf(0.4);
  const double b = oracle::phi_cdf(-0.4) * oracle::phi_cdf(-0.7);
  const auto p2 = level_probabilities(m2, s2);
  CHECK(p2[0] == doctest::Approx(a / (a + b)).epsilon(1e-12));
  CHECK(p2[1] == doctest::Approx(b / (a + b)).epsilon(1e-12));

  // Far tails stay finite and normalized.
  const std::vector<double> m3{-30, -25, 5}, s3{1, 1, 1};
  const auto p3 = level_probabilities(m3, s3);
  CHECK(p3[2] == doctest::Approx(1.0));
  CHECK(p3[0] + p3[1] + p3[2] == doctest::Approx(1.0));
  CHECK(p3[1] > p3[0]);
  CHECK(p3[0] > 0.0);
}

TEST_CASE("two-level categorical imputation frequencies") {
  // A categorical column with two levels behaves like a probit; with no
  // other columns the chain's predictive frequency for a missing cell must
  // track the closed-form probability at the current latent means.
  Rng rng(3);
  std::vector<ColumnSchema> s{{"c", ColumnKind::categorical, {"a", "b"}, MissingnessMode::mcar}};
  Eigen::MatrixXd v(400, 1);
  for (int i = 0; i < 400; ++i) v(i, 0) = rng.bernoulli(0.7) ? 0 : 1;
  v(0, 0) = kMissing;
  const Dataset data(s, v);
  CopulaSampler sampler(data, {}, chain(LikelihoodMode::eql, 1, 0, 5));
  int level0 = 0;
  double expect = 0.0;
  const int sweeps = 10000;
  for (int t = 0; t < sweeps; ++t) {
    // Expected probability uses the moments the upcoming latent step will see.
    sampler.sweep();
    const auto d = sampler.snapshot(t);
    level0 += d.missing_values[0] == 0.0 ? 1 : 0;
    const auto& f = sampler.factors();
    const Eigen::VectorXd m = f.alpha + f.lambda * f.eta.row(0).transpose();
    const std::vector<double> mu{m(0), m(1)};
    const std::vector<double> sd{std::sqrt(f.sigma2(0)), std::sqrt(f.sigma2(1))};
    expect += level_probabilities(mu, sd)[0];
  }
  CHECK(static_cast<double>(level0) / sweeps == doctest::Approx(expect / sweeps).epsilon(0.03));
  CHECK(static_cast<double>(level0) / sweeps == doctest::Approx(0.7).epsilon(0.1));
}

TEST_CASE("constraints hold after every sweep") {
  for (auto mode : {LikelihoodMode::eql, LikelihoodMode::ehql}) {
    Rng rng(7);
    const Dataset data = mixed_data(rng, 250);
    CopulaSampler s(data, mixed_models(), chain(mode, 1, 0, 11));
    check_constraints(s, data, mode == LikelihoodMode::ehql);
    for (int t = 0; t < 150; ++t) {
      s.sweep();
      check_constraints(s, data, mode == LikelihoodMode::ehql);
    }
  }
}

TEST_CASE("full marginal mode fixes the observed latents") {
  Rng rng(1);
  const auto f = make_gamma(1, 1);
  std::vector<ColumnSchema> sc{{"y", ColumnKind::continuous, {}, MissingnessMode::modeled}};
  Eigen::MatrixXd v(50, 1);
  for (int i = 0; i < 50; ++i) v(i, 0) = rng.bernoulli(0.3) ? kMissing : f->quantile(rng.uniform());
  const Dataset data(sc, v);
  std::vector<ColumnModel> m(1);
  m[0].marginal = f;
  CopulaSampler s(data, m, chain(LikelihoodMode::full_marginal, 1, 0, 2));
  for (int t = 0; t < 20; ++t) s.sweep();
  for (Eigen::Index i = 0; i < 50; ++i)
    if (!data.is_missing(i, 0))
      CHECK(s.latent()(i, 0) == known_marginal_transform(*f, data.value(i, 0)));
}

TEST_CASE("median-only EQL latents are half normals") {
  // Latent-level Gibbs update with C = I and alpha = 0: entries above the
  // median land in (0, inf), the others in (-inf, 0].
  Rng rng(4);
  const int n = 5000;
  std::vector<std::vector<TruncationInterval>> iv(n);
  std::vector<int> upper(n);
  for (int i = 0; i < n; ++i) {
    upper[static_cast<std::size_t>(i)] = rng.bernoulli(0.5);
    iv[static_cast<std::size_t>(i)] = {upper[static_cast<std::size_t>(i)] ? TruncationInterval{0.0, kInf}
                                                                          : TruncationInterval{-kInf, 0.0}};
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, 1);
  dense_single_site_sweep(rng, Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), z, iv);
  std::vector<double> pos, neg;
  for (int i = 0; i < n; ++i) (upper[static_cast<std::size_t>(i)] ? pos : neg).push_back(z(i, 0));
  const auto half = [](double x) { return x <= 0 ? 0.0 : 2.0 * oracle::phi_cdf(x) - 1.0; };
  CHECK(oracle::ks_statistic(pos, half) < oracle::ks_critical(pos.size()));
  for (double& x : neg) x = -x;
  CHECK(oracle::ks_statistic(neg, half) < oracle::ks_critical(neg.size()));
}

TEST_CASE("missing latent tracks a correlated observed latent") {
  Rng rng(6);
  Eigen::MatrixXd c(2, 2);
  c << 1, .9, .9, 1;
  const Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
  const int n = 20000;
  Eigen::MatrixXd z(n, 2);
  z.col(1).setConstant(2.0);
  std::vector<std::vector<TruncationInterval>> iv(
      n, std::vector<TruncationInterval>{{-kInf, kInf}, {1.999999, 2.000001}});
  dense_single_site_sweep(rng, c, alpha, z, iv);
  Eigen::VectorXd at(2);
  at << 0.0, 2.0;
  const auto [mu, var] = oracle::conditional_by_precision(c, alpha, at, 0);
  const double mean = z.col(0).mean();
  const double v = (z.col(0).array() - mean).square().mean();
  CHECK(mean == doctest::Approx(mu).epsilon(0.01));
  CHECK(v == doctest::Approx(var).epsilon(0.04));
}

TEST_CASE("run_chain bookkeeping") {
  Rng rng(8);
  const Dataset data = mixed_data(rng, 120);
  auto out = run_chain(data, mixed_models(), chain(LikelihoodMode::ehql, 0, 0, 1));
  CHECK(out.draws.empty());
  CHECK(out.initial.sweep == 0);
  CHECK(out.initial.corr.rows() == 8);

  ChainConfig c = chain(LikelihoodMode::ehql, 30, 10, 1);
  c.thin = 4;
  out = run_chain(data, mixed_models(), c);
  REQUIRE(out.draws.size() == 5);
  CHECK(out.draws.front().sweep == 14);
  CHECK(out.draws.back().sweep == 30);
  CHECK(out.study_dim == 6);
  CHECK(out.latent_of(3) == 5);
  CHECK(out.indicator_of(0) == 6);
  CHECK(out.indicator_of(1) == -1);
  CHECK(out.missing_cells.size() == data.missing_count());
  for (const auto& d : out.draws) {
    CHECK(d.missing_values.size() == data.missing_count());
    CHECK(d.corr.diagonal().isOnes(1e-15));
    CHECK(!d.marginal_knots[0].empty());
    for (std::size_t k = 0; k < out.missing_cells.size(); ++k) {
      const auto& cell = out.missing_cells[k];
      const double v = d.missing_values[k];
      if (cell.col == 0 || cell.col == 3) CHECK((v > 0.0 && v < 1.0));
      if (cell.col == 1) CHECK((v == 0.0 || v == 1.0));
      if (cell.col == 2) CHECK((v == 0.0 || v == 1.0 || v == 2.0));
    }
  }
  // Continuous columns have pinned intercepts; the others are free.
  CHECK(out.draws.back().alpha(0) == 0.0);
  CHECK(out.draws.back().alpha(5) == 0.0);
}

TEST_CASE("same seed, same draws") {
  Rng rng(9);
  const Dataset data = mixed_data(rng, 100);
  const auto a = run_chain(data, mixed_models(), chain(LikelihoodMode::ehql, 40, 20, 77));
  const auto b = run_chain(data, mixed_models(), chain(LikelihoodMode::ehql, 40, 20, 77));
  const auto c = run_chain(data, mixed_models(), chain(LikelihoodMode::ehql, 40, 20, 78));
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t t = 0; t < a.draws.size(); ++t) {
    CHECK(a.draws[t].corr == b.draws[t].corr);
    CHECK(a.draws[t].missing_values == b.draws[t].missing_values);
  }
  CHECK(a.draws.back().corr != c.draws.back().corr);
}

TEST_CASE("missing configuration is reported") {
  Rng rng(10);
  const Dataset data = mixed_data(rng, 50);
  CHECK_THROWS_AS(run_chain(data, {}, chain(LikelihoodMode::eql, 2, 0, 1)), Error);
  CHECK_THROWS_AS(run_chain(data, mixed_models(), chain(LikelihoodMode::full_marginal, 2, 0, 1)), Error);
}
