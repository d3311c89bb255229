#include <doctest.h>

#include "mortality/forecast.hpp"
#include "support.hpp"

using namespace mortality;
using support::toy_params;
using support::toy_spec;

namespace {

PosteriorChain repeated_chain(const ModelSpec& spec, const StaticParams& s,
                              const StatePath& path, int copies,
                              std::uint64_t seed = 1) {
  PosteriorChain chain{spec, support::quick_config(2, 1, seed), {}};
  chain.draws.assign(copies, Draw{s, path});
  return chain;
}

}  // namespace

TEST_CASE("noise-free Lee-Carter forecast is drift extrapolation") {
  const auto spec = toy_spec(ModelKind::LeeCarter, 4, 6);
  auto s = toy_params(spec);
  s.sigma2Eps = 0;
  s.sigma2Kappa = 0;
  const auto truth = simulate_panel(spec, s, Eigen::VectorXd::Constant(1, 0.7), 1);
  const auto result = forecast(repeated_chain(spec, s, truth.path, 1), 10);
  const double kn = truth.path.states(0, 6);
  REQUIRE(result.logRates.size() == 1);
  for (int j = 1; j <= 10; ++j) {
    for (int i = 0; i < 4; ++i) {
      CHECK(result.logRates[0](i, j - 1) ==
            doctest::Approx(s.alpha(i) + s.beta(i) * (kn + j * s.theta)).epsilon(1e-13));
    }
  }
  const auto proj = project_factors(result);
  CHECK(proj.cohorts.empty());
  CHECK(proj.years.front() == 2006);
  for (int j = 1; j < 10; ++j) {
    CHECK(proj.kappa[j].mean - proj.kappa[j - 1].mean == doctest::Approx(s.theta));
  }
}

TEST_CASE("one-step period factor mean is kappa_n + theta") {
  const auto spec = toy_spec(ModelKind::LeeCarter, 3, 5);
  auto s = toy_params(spec);
  const auto truth = support::toy_truth(spec, s, 2);
  const int N = 100000;
  const auto result = forecast(repeated_chain(spec, s, truth.path, N), 1);
  double sum = 0, sq = 0;
  for (const auto& f : result.factors) {
    sum += f(0, 0);
    sq += f(0, 0) * f(0, 0);
  }
  const double mean = sum / N, var = sq / N - mean * mean;
  CHECK(std::abs(mean - (truth.path.states(0, 5) + s.theta)) < 4 * std::sqrt(s.sigma2Kappa / N));
  CHECK(std::abs(var - s.sigma2Kappa) < 4 * s.sigma2Kappa * std::sqrt(2.0 / N));
}

TEST_CASE("one transition of the cohort state from phi_n") {
  const auto spec = toy_spec(ModelKind::FullCohort, 3, 5);
  auto s = toy_params(spec);
  const auto truth = support::toy_truth(spec, s, 5);
  const int N = 50000;
  const auto result = forecast(repeated_chain(spec, s, truth.path, N), 1);
  const auto sys = build_system(spec, s);
  const Eigen::VectorXd expected =
      sys.transMatrix * truth.path.states.col(5) + sys.transIntercept;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4), sq = Eigen::VectorXd::Zero(4);
  for (const auto& f : result.factors) {
    sum += f.col(0);
    sq += f.col(0).cwiseProduct(f.col(0));
    // Shifted cohort coordinates are exact copies.
    CHECK(f(2, 0) == truth.path.states(1, 5));
    CHECK(f(3, 0) == truth.path.states(2, 5));
  }
  const Eigen::VectorXd mean = sum / N;
  const Eigen::VectorXd var = sq / N - mean.cwiseProduct(mean);
  const Eigen::Vector2d noise(s.sigma2Kappa, s.sigma2Gamma);
  for (int r = 0; r < 2; ++r) {
    CHECK(std::abs(mean(r) - expected(r)) < 4 * std::sqrt(noise(r) / N));
    CHECK(std::abs(var(r) - noise(r)) < 4 * noise(r) * std::sqrt(2.0 / N));
  }
}

TEST_CASE("cohort AR projection decays geometrically") {
  const auto spec = toy_spec(ModelKind::SimplifiedCohort, 3, 5);
  auto s = toy_params(spec);
  s.eta = 0;
  s.lambda = 0.7;
  s.sigma2Gamma = 0;
  s.sigma2Kappa = 0;
  s.sigma2Eps = 0;
  auto truth = support::toy_truth(spec, s, 5);
  truth.path.states(1, 5) = 2.0;
  const auto proj = project_factors(repeated_chain(spec, s, truth.path, 1), 12);
  REQUIRE(proj.gamma.size() == 12);
  for (int j = 0; j < 12; ++j) {
    CHECK(proj.gamma[j].mean == doctest::Approx(2.0 * std::pow(0.7, j + 1)).epsilon(1e-12));
    CHECK(proj.cohorts[j] == 2004 + j + 1 - 60);
  }
}

TEST_CASE("Lee-Carter forecasts equal cohort forecasts with the cohort switched off") {
  const auto lc = toy_spec(ModelKind::LeeCarter, 4, 6);
  const auto sc = toy_spec(ModelKind::SimplifiedCohort, 4, 6);
  const auto s = toy_params(lc);
  const auto truth = support::toy_truth(lc, s, 8);
  StaticParams sc_params = toy_params(sc);
  sc_params.alpha = s.alpha;
  sc_params.beta = s.beta;
  sc_params.theta = s.theta;
  sc_params.sigma2Eps = s.sigma2Eps;
  sc_params.sigma2Kappa = s.sigma2Kappa;
  sc_params.eta = 0;
  sc_params.lambda = 0.5;
  sc_params.sigma2Gamma = 0;
  StatePath cohortPath;
  cohortPath.states = Eigen::MatrixXd::Zero(5, 7);
  cohortPath.states.row(0) = truth.path.states.row(0);
  const auto a = forecast(repeated_chain(lc, s, truth.path, 50, 3), 8);
  const auto b = forecast(repeated_chain(sc, sc_params, cohortPath, 50, 3), 8);
  for (std::size_t l = 0; l < 50; ++l) {
    CHECK(a.factors[l].row(0) == b.factors[l].row(0));
    CHECK((a.logRates[l] - b.logRates[l]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("Lee-Carter predictive spread widens with the horizon") {
  const auto spec = toy_spec(ModelKind::LeeCarter, 3, 5);
  const auto s = toy_params(spec);
  const auto truth = support::toy_truth(spec, s, 2);
  const int N = 20000;
  const auto result = forecast(repeated_chain(spec, s, truth.path, N), 6);
  std::vector<double> var(6);
  for (int j = 0; j < 6; ++j) {
    double s1 = 0, s2 = 0;
    for (const auto& y : result.logRates) {
      s1 += y(1, j);
      s2 += y(1, j) * y(1, j);
    }
    var[j] = s2 / N - (s1 / N) * (s1 / N);
    const double exact = s.beta(1) * s.beta(1) * (j + 1) * s.sigma2Kappa + s.sigma2Eps;
    CHECK(std::abs(var[j] - exact) < 4 * exact * std::sqrt(2.0 / N));
    if (j > 0) CHECK(var[j] >= var[j - 1]);
  }
}

TEST_CASE("forecast summaries are ordered and reproducible") {
  const auto spec = toy_spec(ModelKind::FullCohort, 5, 10);
  const auto truth = support::toy_truth(spec, toy_params(spec), 3);
  const auto chain = run_chain(spec, truth.panel, support::quick_config(300, 100));
  const auto a = forecast(chain, 7);
  const auto b = forecast(chain, 7);
  CHECK(a.logRateSummary.mean.rows() == 5);
  CHECK(a.logRateSummary.mean.cols() == 7);
  CHECK((a.logRateSummary.lower.array() <= a.logRateSummary.upper.array()).all());
  CHECK((a.rateSummary.lower.array() <= a.rateSummary.upper.array()).all());
  CHECK((a.rateSummary.lower.array() > 0).all());
  for (std::size_t l = 0; l < a.logRates.size(); ++l) {
    CHECK(a.logRates[l] == b.logRates[l]);
  }
  CHECK(a.forecastYear(0) == 2010);
  CHECK_THROWS_AS(forecast(chain, 0), std::invalid_argument);
}
