#include <doctest.h>

#include <cmath>
#include <vector>

#include "klsens/errors.hpp"
#include "klsens/influence.hpp"
#include "klsens/nested_mc.hpp"
#include "klsens/rng.hpp"

#include "test_support.hpp"

using namespace klsens;

TEST_CASE("variance decomposition on a hand-computed matrix") {
  std::vector<std::vector<double>> H = {{1.0, 2.0}, {3.0, 5.0}};
  AnovaEstimate e = anova_sigma_m2(H);
  // row means 1.5, 4; grand 2.75; between 3.125; within (0.5 + 2) / 2
  CHECK(e.sigma_eps2 == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(e.sigma_m2 == doctest::Approx(3.125 - 0.625).epsilon(1e-14));
}

TEST_CASE("variance decomposition rejects malformed matrices") {
  CHECK_THROWS_AS(anova_sigma_m2({{1.0, 2.0}}), Error);             // one row
  CHECK_THROWS_AS(anova_sigma_m2({{1.0}, {2.0}}), Error);           // one column
  CHECK_THROWS_AS(anova_sigma_m2({{1.0, 2.0}, {3.0}}), Error);      // ragged
}

TEST_CASE("variance decomposition is unbiased on the additive toy model") {
  // H = X + eps, X and eps standard normal: Var(E[H|X]) = 1
  const std::size_t R = 2000, K = 20, n = 5;
  StreamRng base(404, 0);
  std::vector<double> estimates(R);
  for (std::size_t r = 0; r < R; ++r) {
    StreamRng rng = base.child(r);
    std::vector<std::vector<double>> H(K, std::vector<double>(n));
    for (std::size_t k = 0; k < K; ++k) {
      double x = rng.normal();
      for (std::size_t j = 0; j < n; ++j) H[k][j] = x + rng.normal();
    }
    estimates[r] = anova_sigma_m2(H).sigma_m2;
  }
  double mean = 0.0;
  for (double v : estimates) mean += v;
  mean /= static_cast<double>(R);
  double var = 0.0;
  for (double v : estimates) var += (v - mean) * (v - mean);
  var /= static_cast<double>(R - 1);
  double se = std::sqrt(var / static_cast<double>(R));
  CHECK(std::abs(mean - 1.0) <= 4.0 * se);
}

TEST_CASE("sectioned estimate with a noiseless inner sampler") {
  // E[H|X] = X exactly: sigma_m2 reduces to a sample variance of X
  StochasticModel m = StochasticModel::normal(0.0, 1.0);
  ConditionalSampler identity = [](double x, StreamRng&) { return x; };
  NestedDesign d{100, 2, 20, 0.95};
  SectionedEstimate e = sectioned_zeta1(m, identity, d, 2024);
  CHECK_FALSE(e.clamped);
  CHECK(e.raw_sections.size() == 20);
  CHECK(std::abs(e.point - std::sqrt(2.0)) < 0.2);
  CHECK(e.ci_low < e.point);
  CHECK(e.point < e.ci_high);
  CHECK(e.ci_low < std::sqrt(2.0));
  CHECK(std::sqrt(2.0) < e.ci_high);
}

TEST_CASE("constant samplers clamp the estimate at zero") {
  StochasticModel m = StochasticModel::normal(0.0, 1.0);
  ConditionalSampler constant = [](double, StreamRng&) { return 5.0; };
  NestedDesign d{10, 3, 5, 0.95};
  SectionedEstimate e = sectioned_zeta1(m, constant, d, 1);
  CHECK(e.clamped);
  CHECK(e.point == 0.0);
}

TEST_CASE("swap-sum sampler draws have the influence function as mean") {
  StochasticModel m = testsupport::fixture_model();
  CostSpec c = testsupport::fixture_cost();
  ConditionalSampler s = swap_sum_sampler(m, c);
  StreamRng rng(5150, 0);
  const std::size_t R = 40000;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    double v = s(0.3, rng);
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / static_cast<double>(R);
  double var = sumsq / static_cast<double>(R) - mean * mean;
  double se = std::sqrt(var / static_cast<double>(R));
  CHECK(std::abs(mean - testsupport::kFixtureG[1]) <= 4.0 * se);
}

TEST_CASE("sectioned runs are deterministic in seed and stream") {
  StochasticModel m = testsupport::fixture_model();
  CostSpec c = testsupport::fixture_cost();
  NestedDesign d{10, 4, 6, 0.95};
  SectionedEstimate a = sectioned_zeta1(m, c, d, 11, 3);
  SectionedEstimate b = sectioned_zeta1(m, c, d, 11, 3);
  CHECK(a.point == b.point);
  CHECK(a.raw_sections == b.raw_sections);
  SectionedEstimate other = sectioned_zeta1(m, c, d, 11, 4);
  CHECK(a.raw_sections != other.raw_sections);
}

TEST_CASE("sectioned estimate recovers the fixture coefficient") {
  StochasticModel m = testsupport::fixture_model();
  CostSpec c = testsupport::fixture_cost();
  NestedDesign d{200, 10, 20, 0.95};
  SectionedEstimate e = sectioned_zeta1(m, c, d, 909);
  CHECK_FALSE(e.clamped);
  CHECK(e.ci_low < testsupport::kFixtureZeta1);
  CHECK(testsupport::kFixtureZeta1 < e.ci_high);
  CHECK(std::abs(e.point - testsupport::kFixtureZeta1) < 0.4);
}

TEST_CASE("design validation") {
  StochasticModel m = StochasticModel::normal(0.0, 1.0);
  ConditionalSampler s = [](double x, StreamRng&) { return x; };
  CHECK_THROWS_AS(sectioned_zeta1(m, s, NestedDesign{1, 5, 5, 0.95}, 0), Error);
  CHECK_THROWS_AS(sectioned_zeta1(m, s, NestedDesign{5, 1, 5, 0.95}, 0), Error);
  CHECK_THROWS_AS(sectioned_zeta1(m, s, NestedDesign{5, 5, 1, 0.95}, 0), Error);
  CHECK_THROWS_AS(sectioned_zeta1(m, s, NestedDesign{5, 5, 5, 1.5}, 0), Error);
}

TEST_CASE("pilot sweep reports one row per inner setting") {
  StochasticModel m = StochasticModel::normal(0.0, 1.0);
  ConditionalSampler s = [](double x, StreamRng& rng) { return x + rng.normal(); };
  NestedDesign d{30, 10, 8, 0.95};
  std::vector<std::size_t> grid = {2, 5, 10};
  auto rows = pilot_inner_sweep(m, s, d, grid, 7777);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].inner == grid[i]);
    CHECK(rows[i].std_error >= 0.0);
    CHECK(rows[i].zeta1_point ==
          doctest::Approx(std::sqrt(2.0 * std::max(rows[i].sigma_m2, 0.0))));
  }
  auto again = pilot_inner_sweep(m, s, d, grid, 7777);
  CHECK(rows[1].sigma_m2 == again[1].sigma_m2);
  CHECK_THROWS_AS(pilot_inner_sweep(m, s, d, {}, 0), Error);
}
