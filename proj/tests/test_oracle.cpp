#include <doctest.h>

#include <cmath>
#include <limits>

#include "auxcop/error.hpp"
#include "auxcop/oracle.hpp"
#include "auxcop/rng.hpp"
#include "oracles.hpp"

using namespace auxcop;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CellTable sample_table(Rng& rng, double rho, int n, std::vector<double> ca, std::vector<double> cb) {
  std::vector<int> a(n), b(n);
  auto bin = [](const std::vector<double>& cuts, double v) {
    int k = 0;
    while (v > cuts[static_cast<std::size_t>(k + 1)]) ++k;
    return k;
  };
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    const double y = rho * x + std::sqrt(1 - rho * rho) * rng.normal();
    a[i] = bin(ca, x);
    b[i] = bin(cb, y);
  }
  return empirical_cells(a, b, ca, cb);
}

}  // namespace

TEST_CASE("empirical cells skip incomplete pairs") {
  const std::vector<int> a{0, 1, 1, -1, 1}, b{0, 0, 1, 1, -1};
  const auto t = empirical_cells(a, b, {-kInf, 0, kInf}, {-kInf, 0, kInf});
  CHECK(t.counts(0, 0) == 1);
  CHECK(t.counts(0, 1) == 0);
  CHECK(t.counts(1, 0) == 1);
  CHECK(t.counts(1, 1) == 1);
  CHECK(t.total() == 3);
  CHECK(t.proportions().sum() == doctest::Approx(1.0));

  const std::vector<int> none;
  const auto e = empirical_cells(none, none, {-kInf, 0, kInf}, {-kInf, 0, kInf});
  CHECK_FALSE(e.defined());
  CHECK_THROWS_AS(polychoric_mle(e), Error);
}

TEST_CASE("same-side cells at rho = 1/2") {
  Rng rng(1);
  const auto t = sample_table(rng, 0.5, 200000, {-kInf, 0, kInf}, {-kInf, 0, kInf});
  const auto p = t.proportions();
  CHECK(p(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  CHECK(p(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  CHECK(oracle::orthant(0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("polychoric likelihood matches quadrature") {
  CellTable t;
  t.counts.resize(3, 2);
  t.counts << 10, 3, 7, 8, 2, 12;
  t.cuts_a = {-kInf, -0.4, 0.7, kInf};
  t.cuts_b = {-kInf, 0.2, kInf};
  for (double rho : {-0.7, 0.0, 0.35, 0.9}) {
    double want = 0.0;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c)
        want += t.counts(r, c) *
                std::log(oracle::bvn_rect_quadrature(rho, t.cuts_a[r], t.cuts_a[r + 1], t.cuts_b[c], t.cuts_b[c + 1]));
    CHECK(polychoric_log_likelihood(t, rho) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("polychoric estimates") {
  Rng rng(2);
  for (double rho : {-0.6, 0.0, 0.6}) {
    const auto t = sample_table(rng, rho, 100000, {-kInf, -0.5, 0.3, 1.1, kInf}, {-kInf, 0.1, kInf});
    // About four standard errors at this size.
    CHECK(std::fabs(polychoric_mle(t) - rho) < 0.02);
  }

  // Exactly independent table: cell counts are products of margins.
  CellTable ind;
  ind.cuts_a = {-kInf, -0.3, kInf};
  ind.cuts_b = {-kInf, 0.5, kInf};
  const double pa = oracle::phi_cdf(-0.3), pb = oracle::phi_cdf(0.5);
  ind.counts.resize(2, 2);
  ind.counts << pa * pb, pa * (1 - pb), (1 - pa) * pb, (1 - pa) * (1 - pb);
  ind.counts *= 1000.0;
  CHECK(std::fabs(polychoric_mle(ind)) < 1e-6);

  CellTable conc;
  conc.cuts_a = conc.cuts_b = {-kInf, 0.0, kInf};
  conc.counts.resize(2, 2);
  conc.counts << 10, 0, 0, 10;
  try {
    polychoric_mle(conc);
    FAIL("expected BoundaryEstimate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::boundary_estimate);
  }
}

TEST_CASE("2x2 likelihood is unimodal") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    CellTable t;
    t.cuts_a = {-kInf, rng.normal(), kInf};
    t.cuts_b = {-kInf, rng.normal(), kInf};
    t.counts.resize(2, 2);
    for (int k = 0; k < 4; ++k) t.counts(k / 2, k % 2) = 1.0 + std::floor(30.0 * rng.uniform());
    int turns = 0;
    double prev = polychoric_log_likelihood(t, -0.99);
    bool rising = true;
    for (double rho = -0.98; rho < 0.99; rho += 0.01) {
      const double cur = polychoric_log_likelihood(t, rho);
      if (rising && cur < prev - 1e-12) {
        rising = false;
        ++turns;
      } else if (!rising && cur > prev + 1e-12) {
        ++turns;
      }
      prev = cur;
    }
    CHECK(turns <= 1);
  }
}

TEST_CASE("indicator pair table completes the unobserved row") {
  std::vector<int> obs;
  for (int i = 0; i < 30; ++i) obs.push_back(0);
  for (int i = 0; i < 20; ++i) obs.push_back(1);
  for (int i = 0; i < 50; ++i) obs.push_back(-1);
  const auto t = indicator_pair_table(obs, {0.0, 0.5, 1.0});
  CHECK(t.counts(0, 0) == 30);
  CHECK(t.counts(1, 0) == 20);
  CHECK(t.counts(0, 1) == doctest::Approx(20));
  CHECK(t.counts(1, 1) == doctest::Approx(30));
  CHECK(t.cuts_b[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(t.cuts_a[1] == doctest::Approx(0.0).epsilon(1e-14));
  // Upper-bin values go missing more often.
  CHECK(polychoric_mle(t) > 0.0);

  // More observed than the bin mass allows: floored at zero.
  std::vector<int> heavy(80, 0);
  heavy.resize(100, -1);
  CHECK(indicator_pair_table(heavy, {0.0, 0.5, 1.0}).counts(0, 1) == 0.0);
}
