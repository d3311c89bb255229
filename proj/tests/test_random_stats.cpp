#include <doctest.h>

#include <cmath>
#include <vector>

#include "mortality/random.hpp"
#include "mortality/stats.hpp"
#include "oracles.hpp"

using namespace mortality;

namespace {

double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Truncated-normal CDF written with erfc; for intervals in the upper tail the
// complementary form keeps precision.
double truncated_cdf(double x, double mean, double sd, double lo, double hi) {
  const double a = (lo - mean) / sd, b = (hi - mean) / sd, z = (x - mean) / sd;
  if (a > 0) {
    auto Q = [](double u) { return 0.5 * std::erfc(u / std::sqrt(2.0)); };
    return (Q(a) - Q(z)) / (Q(a) - Q(b));
  }
  return (phi_cdf(z) - phi_cdf(a)) / (phi_cdf(b) - phi_cdf(a));
}

}  // namespace

TEST_CASE("streams are reproducible and keyed streams differ") {
  Rng a(42), b(42), c({42, 1}), d({42, 1}), e({42, 2});
  for (int k = 0; k < 10; ++k) CHECK(a.normal() == b.normal());
  std::vector<double> xc, xd, xe;
  for (int k = 0; k < 10; ++k) {
    xc.push_back(c.normal());
    xd.push_back(d.normal());
    xe.push_back(e.normal());
  }
  CHECK(xc == xd);
  CHECK(xc != xe);
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("truncated normal matches its analytic CDF") {
  struct Case {
    double mean, var, lo, hi;
  };
  const std::vector<Case> cases{
      {0.0, 1.0, -1.0, 1.0},      // centred
      {0.99, 1e-4, -1.0, 1.0},    // mass piled against the upper bound
      {1.3, 0.01, -1.0, 1.0},     // mean outside, near
      {-5.0, 0.01, -1.0, 1.0},    // deep tail below: rejection path
      {8.0, 0.04, -1.0, 1.0},     // deep tail above
      {0.0, 1.0, 2.0, 3.0},       // interval wholly above the mean
      {0.5, 0.25, -INFINITY, 0.2},
  };
  Rng rng(2024);
  for (const auto& c : cases) {
    const double sd = std::sqrt(c.var);
    std::vector<double> xs(10000);
    for (double& x : xs) {
      x = sample_truncated_normal(c.mean, c.var, c.lo, c.hi, rng);
      REQUIRE(x >= c.lo);
      REQUIRE(x <= c.hi);
    }
    const double ks = oracle::ks_distance(xs, [&](double x) {
      return truncated_cdf(x, c.mean, sd, c.lo, c.hi);
    });
    INFO("mean " << c.mean << " var " << c.var);
    CHECK(ks < 0.02);
  }
  CHECK_THROWS_AS(sample_truncated_normal(0, 1, 1, 1, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_truncated_normal(0, 0, -1, 1, rng), std::invalid_argument);
}

TEST_CASE("inverse gamma matches a grid-integrated density") {
  Rng rng(8);
  for (auto [a, b] : {std::pair{52.01, 0.01}, std::pair{4.01, 1.01}, std::pair{2.5, 3.0}}) {
    std::vector<double> xs(10000);
    for (double& x : xs) x = sample_inverse_gamma(a, b, rng);
    const double mode = b / (a + 1);
    const oracle::GridCdf cdf(
        [&](double x) { return x > 0 ? -(a + 1) * std::log(x) - b / x : -INFINITY; },
        mode * 1e-3, mode * 400, 400001);
    CHECK(oracle::ks_distance(xs, [&](double x) { return cdf(x); }) < 0.02);
  }
  std::vector<double> big(100000);
  for (double& x : big) x = sample_inverse_gamma(52.01, 0.01, rng);
  const auto s = summarize_95(big);
  const double mean = 0.01 / 51.01;
  const double sd = mean / std::sqrt(50.01);
  CHECK(std::abs(s.mean - mean) < 4 * sd / std::sqrt(1e5));
  CHECK(mean == doctest::Approx(1.9604e-4).epsilon(1e-4));
}

TEST_CASE("type-7 quantiles and pairwise sums") {
  CHECK(quantile_type7({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile_type7({4, 3, 2, 1}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_type7({7}, 0.975) == 7);
  CHECK(quantile_type7({1, 2, 3, 4, 5}, 0.0) == 1);
  CHECK(quantile_type7({1, 2, 3, 4, 5}, 1.0) == 5);
  CHECK_THROWS_AS(quantile_type7({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(quantile_type7({1.0}, 1.5), std::invalid_argument);

  std::vector<double> v(1000);
  for (int k = 0; k < 1000; ++k) v[k] = 0.1 * k;
  CHECK(pairwise_sum(v) == doctest::Approx(49950.0));
  std::vector<double> x(101);
  for (int k = 0; k <= 100; ++k) x[k] = k;
  const auto s = summarize_95(x);
  CHECK(s.mean == 50.0);
  CHECK(s.lower == doctest::Approx(2.5));
  CHECK(s.upper == doctest::Approx(97.5));
  CHECK(s.lower <= s.upper);
}
