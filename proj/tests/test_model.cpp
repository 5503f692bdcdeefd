#include <doctest.h>

#include <cmath>
#include <vector>

#include "klsens/distribution.hpp"
#include "klsens/errors.hpp"
#include "klsens/model.hpp"
#include "klsens/rng.hpp"

#include "test_support.hpp"

using namespace klsens;

TEST_CASE("finite distribution validates its inputs") {
  CHECK_THROWS_AS(FiniteDistribution({}, {}), Error);
  CHECK_THROWS_AS(FiniteDistribution({1.0, 2.0}, {0.5}), Error);
  CHECK_THROWS_AS(FiniteDistribution({1.0, 2.0}, {-0.1, 1.1}), Error);
  CHECK_THROWS_AS(FiniteDistribution({1.0, 2.0}, {0.6, 0.6}), Error);

  // a sum within 1e-12 of 1 is renormalized, not rejected
  FiniteDistribution d({0.0, 1.0}, {0.5 + 2e-13, 0.5});
  CHECK(d.prob(0) + d.prob(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mean_of and index_from_uniform") {
  FiniteDistribution d({-1.0, 0.0, 2.0}, {0.3, 0.5, 0.2});
  std::vector<double> v = {10.0, 20.0, 30.0};
  CHECK(d.mean_of(v) == doctest::Approx(3.0 + 10.0 + 6.0));

  CHECK(d.index_from_uniform(0.0) == 0);
  CHECK(d.index_from_uniform(0.2999) == 0);
  CHECK(d.index_from_uniform(0.3001) == 1);
  CHECK(d.index_from_uniform(0.7999) == 1);
  CHECK(d.index_from_uniform(0.8001) == 2);
  CHECK(d.index_from_uniform(0.999999) == 2);
}

TEST_CASE("json round trip preserves atoms and probabilities") {
  FiniteDistribution d({-1.0, 0.3, 1.7}, {0.5, 0.3, 0.2});
  FiniteDistribution back = FiniteDistribution::from_json(d.to_json());
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.atom(i) == d.atom(i));
    CHECK(back.prob(i) == d.prob(i));
  }
}

TEST_CASE("cumulants match direct summation") {
  FiniteDistribution d({-1.0, 0.0, 2.0}, {0.3, 0.5, 0.2});
  std::vector<double> h = {-1.0, 0.0, 2.0};
  CumulantTriple c = cumulants(d, h);
  CHECK(c.mean == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(c.variance == doctest::Approx(1.09).epsilon(1e-14));
  CHECK(c.kappa3 == doctest::Approx(0.972).epsilon(1e-13));

  auto ref = testsupport::ref_cumulants(d, h);
  CHECK(c.variance == doctest::Approx(ref.variance).epsilon(1e-14));
  CHECK(c.kappa3 == doctest::Approx(ref.kappa3).epsilon(1e-13));
}

TEST_CASE("kl divergence basics") {
  FiniteDistribution p({0.0, 1.0}, {0.5, 0.5});
  FiniteDistribution q({0.0, 1.0}, {0.9, 0.1});
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));

  double expect = 0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5);
  CHECK(kl_divergence(q, p) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(kl_divergence(q, p) > 0.0);

  // mass where the benchmark has none is rejected
  FiniteDistribution p0({0.0, 1.0}, {1.0, 0.0});
  CHECK_THROWS_AS(kl_divergence(q, p0), Error);
}

TEST_CASE("normal discretization hits the first two moments") {
  FiniteDistribution d = discretize_normal(1.5, 2.0, 2001);
  double sum = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    sum += d.prob(i);
    m1 += d.prob(i) * d.atom(i);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m1 == doctest::Approx(1.5).epsilon(1e-6));

  std::vector<double> a = d.atoms();
  auto c = cumulants(d, a);
  CHECK(c.variance == doctest::Approx(4.0).epsilon(5e-4));
  CHECK(std::abs(c.kappa3) < 1e-6);  // symmetric
}

TEST_CASE("stream rng draws depend only on seed, stream and index") {
  StreamRng a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  StreamRng c(42, 8);
  bool all_equal = true;
  StreamRng a2(42, 7);
  for (int i = 0; i < 16; ++i) all_equal = all_equal && (a2.uniform() == c.uniform());
  CHECK_FALSE(all_equal);
}

TEST_CASE("child streams are reproducible and insensitive to parent state") {
  StreamRng parent(5, 0);
  StreamRng c1 = parent.child(3);
  parent.uniform();
  parent.uniform();
  StreamRng c2 = parent.child(3);
  for (int i = 0; i < 32; ++i) CHECK(c1.uniform() == c2.uniform());
}

TEST_CASE("model factories sample from the right families") {
  // frozen-seed statistical smoke checks, tolerances ~5 sigma
  const std::size_t n = 200000;
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  auto e = sample_stream(StochasticModel::exponential(2.0), 99, 0, n);
  CHECK(mean_of(e) == doctest::Approx(0.5).epsilon(0.02));
  for (double x : e) REQUIRE(x >= 0.0);

  auto g = sample_stream(StochasticModel::gamma(2.0, 2.0), 99, 1, n);
  CHECK(mean_of(g) == doctest::Approx(1.0).epsilon(0.02));

  auto u = sample_stream(StochasticModel::uniform(1.0, 3.0), 99, 2, n);
  CHECK(mean_of(u) == doctest::Approx(2.0).epsilon(0.01));
  for (double x : u) REQUIRE((x >= 1.0 && x <= 3.0));

  auto z = sample_stream(StochasticModel::normal(-1.0, 0.5), 99, 3, n);
  CHECK(mean_of(z) == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("finite model draws the exact support with the right frequencies") {
  StochasticModel m = testsupport::fixture_model();
  REQUIRE(m.has_exact());
  auto v = sample_stream(m, 7, 0, 100000);
  std::size_t low = 0;
  for (double x : v) {
    REQUIRE((x == -1.0 || x == 0.3 || x == 1.7));
    if (x == -1.0) ++low;
  }
  CHECK(static_cast<double>(low) / 100000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sample_stream is deterministic") {
  StochasticModel m = StochasticModel::gamma(2.0, 2.0);
  auto a = sample_stream(m, 123, 4, 50);
  auto b = sample_stream(m, 123, 4, 50);
  CHECK(a == b);
  auto c = sample_stream(m, 123, 5, 50);
  CHECK(a != c);
}

TEST_CASE("exact() on a sampler-only model is a validation error") {
  StochasticModel m = StochasticModel::exponential(1.0);
  CHECK_FALSE(m.has_exact());
  CHECK_THROWS_AS(m.exact(), Error);
}
