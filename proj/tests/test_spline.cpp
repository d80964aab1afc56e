#include <doctest.h>

#include <cmath>

#include "auxcop/error.hpp"
#include "auxcop/marginal_spline.hpp"
#include "auxcop/rng.hpp"

using namespace auxcop;

namespace {

std::vector<Knot> random_knots(Rng& rng, int n) {
  std::vector<Knot> k{{0.0, 0.0}};
  double x = 0.0, y = 0.0;
  for (int i = 1; i < n - 1; ++i) {
    x += 0.01 + rng.exponential(1.0);
    // Flat stretches and jumps both occur.
    y += rng.bernoulli(0.2) ? 0.0 : rng.uniform();
    k.push_back({x, y});
  }
  k.push_back({x + 1.0, y + rng.uniform()});
  for (auto& p : k) p.level /= k.back().level;
  return k;
}

}  // namespace

TEST_CASE("two knots give the straight line") {
  const auto f = fit_monotone({{0, 0}, {1, 1}});
  CHECK(f(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f(0.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(f(-1) == 0.0);
  CHECK(f(2) == 1.0);
}

TEST_CASE("exponential CDF on a nine-point grid") {
  std::vector<Knot> k;
  for (int i = 0; i <= 8; ++i) {
    const double x = 0.5 * i;
    k.push_back({x, 1.0 - std::exp(-x)});
  }
  const auto f = fit_monotone(k);
  double worst = 0.0;
  for (double x = 0.1; x <= 4.0; x += 0.001) worst = std::max(worst, std::fabs(f(x) - (1.0 - std::exp(-x))));
  CHECK(worst < 0.01);
}

TEST_CASE("random knot sets: interpolation and monotonicity") {
  Rng rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    const auto knots = random_knots(rng, 3 + static_cast<int>(rng.index(15)));
    const auto f = fit_monotone(knots);
    for (const auto& k : knots) CHECK(std::fabs(f(k.value) - k.level) < 1e-12);
    double prev = -1.0;
    for (int g = 0; g <= 10000; ++g) {
      const double x = f.lower() + (f.upper() - f.lower()) * g / 10000.0;
      const double y = f(x);
      REQUIRE(y >= prev - 1e-15);
      REQUIRE(f.derivative(x) >= -1e-12);
      prev = y;
    }
  }
}

TEST_CASE("knot cleanup and errors") {
  // Equal values collapse to the largest level; order of input is irrelevant.
  const auto f = fit_monotone({{1, 0.4}, {0, 0}, {1, 0.6}, {2, 1}});
  const auto k = f.knots();
  REQUIRE(k.size() == 3);
  CHECK(k[1].level == 0.6);
  try {
    fit_monotone({{0, 0}, {1, 0.7}, {2, 0.5}, {3, 1}});
    FAIL("expected NonMonotoneKnots");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_monotone_knots);
  }
  CHECK_THROWS_AS(fit_monotone({{0, 0}}), Error);
}

TEST_CASE("inverse evaluation") {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const auto f = fit_monotone(random_knots(rng, 8));
    CHECK(inverse_eval(f, 0.0, ColumnKind::continuous) == f.lower());
    CHECK(inverse_eval(f, 1.0, ColumnKind::continuous) == f.upper());
    for (int g = 1; g < 200; ++g) {
      const double x = f.lower() + (f.upper() - f.lower()) * g / 200.0;
      if (f.derivative(x) < 1e-6) continue;  // round trip only where strictly increasing
      CHECK(std::fabs(inverse_eval(f, f(x), ColumnKind::continuous) - x) < 1e-8);
    }
    for (int g = 1; g < 100; ++g) {
      const double p = g / 100.0;
      const double x = inverse_eval(f, p, ColumnKind::continuous);
      CHECK(std::fabs(f(x) - p) < 1e-10);
    }
  }
}

TEST_CASE("count inverse returns the bracketing integer") {
  const auto f = fit_monotone({{0, 0.0}, {2, 0.3}, {5, 0.55}, {9, 0.9}, {12, 1.0}});
  for (int g = 1; g < 1000; ++g) {
    const double p = g / 1000.0;
    const double k = inverse_eval(f, p, ColumnKind::count);
    REQUIRE(k == std::floor(k));
    REQUIRE(k >= 0);
    REQUIRE(k <= 12);
    CHECK(f(k) >= p - 1e-12);
    if (k > 0) CHECK(f(k - 1) < p);
  }
}

TEST_CASE("levels come from the largest latent of each occupied bin") {
  const ColumnSchema s{"y", ColumnKind::continuous, {}, MissingnessMode::modeled};
  AuxiliaryQuantileSet aux = validate_aux(s, {{0, -5}, {.5, 0}, {1, 5}});
  aux.points.insert(aux.points.begin() + 2, AuxPoint{2.0, std::nullopt});
  aux.points.insert(aux.points.begin() + 3, AuxPoint{3.0, std::nullopt});
  const std::vector<double> obs{1.0, 1.5, 4.0, -1.0};
  const auto bins = build_bins(aux, obs);
  REQUIRE(bins.bin_count() == 4);
  const std::vector<double> z{-0.5, 0.1, 1.2, -0.3};
  const auto est = estimate_levels(bins, z);
  // Only the occupied bin (0, 2] has an intermediate upper edge; (2, 3] is
  // empty and (3, 5] ends at a known level.
  REQUIRE(est.size() == 1);
  CHECK(est[0].value == 2.0);
  CHECK(est[0].level == doctest::Approx(0.5398278372770290).epsilon(1e-14));

  const auto knots = marginal_knots(aux, est);
  REQUIRE(knots.size() == 4);
  CHECK(knots.front().level == 0.0);
  CHECK(knots[1].level == 0.5);
  CHECK(knots.back().level == 1.0);

  // Levels are clamped into the enclosing known levels.
  const std::vector<double> low{-2.0, -1.5, 1.2, -0.3};
  CHECK(estimate_levels(bins, low)[0].level == 0.5);
}
