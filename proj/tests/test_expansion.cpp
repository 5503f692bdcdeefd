#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "klsens/errors.hpp"
#include "klsens/expansion.hpp"
#include "klsens/influence.hpp"

#include "test_support.hpp"

using namespace klsens;

TEST_CASE("derive assembles the coefficients") {
  DerivativeReport r = derive(2.0, 3.0, 1.0, 0.5, Sense::max);
  CHECK(r.zeta1 == doctest::Approx(2.0).epsilon(1e-15));  // sqrt(2 * 2)
  CHECK(r.zeta2 == doctest::Approx(1.0).epsilon(1e-15));  // (3/3 + 1) / 2
  CHECK(r.benchmark_mean == 0.5);
  CHECK(r.relative_impact == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(r.relative_impact_defined);
  CHECK(r.signed_zeta1() == r.zeta1);
}

TEST_CASE("derive on the enumeration fixture") {
  InfluenceExact inf = influence_exact(testsupport::fixture_model(),
                                       testsupport::fixture_cost());
  InteractionExact pi = interaction_exact(testsupport::fixture_model(),
                                          testsupport::fixture_cost());
  auto c = cumulants(testsupport::fixture_dist(), inf.values);
  DerivativeReport r = derive(c.variance, c.kappa3, pi.nu, inf.mean_h, Sense::max);
  CHECK(r.zeta1 == doctest::Approx(testsupport::kFixtureZeta1).epsilon(1e-12));
  CHECK(r.zeta2 == doctest::Approx(testsupport::kFixtureZeta2).epsilon(1e-12));
  CHECK(r.var_g == doctest::Approx(testsupport::kFixtureVarG).epsilon(1e-12));
  CHECK(r.kappa3_g == doctest::Approx(testsupport::kFixtureKappa3G).epsilon(1e-12));
  CHECK(r.nu == doctest::Approx(testsupport::kFixtureNu).epsilon(1e-12));
}

TEST_CASE("minimization flips the square-root term only") {
  DerivativeReport mx = derive(2.0, 3.0, 1.0, 0.5, Sense::max);
  DerivativeReport mn = derive(2.0, 3.0, 1.0, 0.5, Sense::min);
  CHECK(mn.zeta1 == mx.zeta1);
  CHECK(mn.zeta2 == mx.zeta2);
  CHECK(mn.signed_zeta1() == -mx.signed_zeta1());
}

TEST_CASE("degenerate variance is rejected") {
  CHECK_THROWS_AS(derive(0.0, 0.0, 0.0, 1.0, Sense::max), Error);
  try {
    derive(0.0, 0.0, 0.0, 1.0, Sense::max);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degeneracy);
  }
}

TEST_CASE("zero benchmark leaves the relative impact undefined") {
  DerivativeReport r = derive(2.0, 0.0, 0.0, 0.0, Sense::max);
  CHECK_FALSE(r.relative_impact_defined);
  auto j = r.to_json();
  CHECK(j["relative_impact"].is_null());
  CHECK(j["schema"] == "klsens-report/1");
}

TEST_CASE("report json carries the schema tag and coefficients") {
  DerivativeReport r = derive(2.0, 3.0, 1.0, 0.5, Sense::max);
  auto j = r.to_json();
  CHECK(j["schema"] == "klsens-report/1");
  CHECK(j["zeta1"].get<double>() == doctest::Approx(2.0));
  CHECK(j["zeta2"].get<double>() == doctest::Approx(1.0));
  CHECK(j["benchmark_mean"].get<double>() == doctest::Approx(0.5));
  CHECK(j["sense"] == "max");
}

TEST_CASE("sweep edges at both orders") {
  DerivativeReport r = derive(2.0, 3.0, 1.0, 0.5, Sense::max);
  std::vector<double> grid = {0.0, 0.01, 0.04};

  SweepLine s1 = sweep(r, grid, 1);
  REQUIRE(s1.eta.size() == 3);
  CHECK(s1.upper[0] == doctest::Approx(0.5));
  CHECK(s1.lower[0] == doctest::Approx(0.5));
  CHECK(s1.upper[1] == doctest::Approx(0.5 + 2.0 * 0.1));
  CHECK(s1.lower[1] == doctest::Approx(0.5 - 2.0 * 0.1));
  CHECK(s1.upper[2] == doctest::Approx(0.5 + 2.0 * 0.2));

  SweepLine s2 = sweep(r, grid, 2);
  CHECK(s2.upper[1] == doctest::Approx(0.5 + 2.0 * 0.1 + 1.0 * 0.01));
  CHECK(s2.lower[1] == doctest::Approx(0.5 - 2.0 * 0.1 + 1.0 * 0.01));
}

TEST_CASE("sweep validates its inputs") {
  DerivativeReport r = derive(2.0, 3.0, 1.0, 0.5, Sense::max);
  std::vector<double> neg = {-0.1};
  CHECK_THROWS_AS(sweep(r, neg, 1), Error);
  std::vector<double> ok = {0.1};
  CHECK_THROWS_AS(sweep(r, ok, 3), Error);
  CHECK_THROWS_AS(sweep(r, ok, 0), Error);
}

TEST_CASE("sweep csv format") {
  DerivativeReport r = derive(2.0, 0.0, 0.0, 1.0, Sense::max);
  std::vector<double> grid = {0.25};
  SweepLine s = sweep(r, grid, 1);
  std::string csv = s.to_csv();
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "eta,lower,upper,benchmark");
  std::getline(in, row);
  // '.' decimal separator regardless of locale
  CHECK(row == "0.25,0,2,1");
}

TEST_CASE("parametric dominance check") {
  DominanceReport d = dominance_check(1.0, 2.0, 1.0);
  CHECK(d.rescaled == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.dominated);
  CHECK(d.margin == doctest::Approx(0.5).epsilon(1e-15));

  DominanceReport worse = dominance_check(3.0, 1.0, 1.0);
  CHECK_FALSE(worse.dominated);
  CHECK(worse.margin < 0.0);

  CHECK_THROWS_AS(dominance_check(1.0, 0.0, 1.0), Error);
}
