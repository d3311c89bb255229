#include "mortality/forecast.hpp"

#include <cmath>
#include <stdexcept>

namespace mortality {

ForecastResult forecast(const PosteriorChain& chain, int horizon) {
  if (horizon < 1) throw std::invalid_argument("forecast horizon must be >= 1");
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  const auto& spec = chain.spec;
  const int p = spec.window.numAges();
  const int d = spec.stateDim();

  ForecastResult out;
  out.horizon = horizon;
  out.window = spec.window;
  out.logRates.reserve(chain.draws.size());
  out.factors.reserve(chain.draws.size());

  for (std::size_t l = 0; l < chain.draws.size(); ++l) {
    const auto& draw = chain.draws[l];
    const SystemMatrices sys = build_system(spec, draw.params);
    Rng rng({chain.config.seed, static_cast<std::uint64_t>(l),
             static_cast<std::uint64_t>(horizon)});
    const Eigen::VectorXd stateSd = sys.transNoiseCov.diagonal().cwiseSqrt();
    const double obsSd = std::sqrt(sys.obsNoiseVar);

    Eigen::MatrixXd y(p, horizon);
    Eigen::MatrixXd phi(d, horizon);
    Eigen::VectorXd state = draw.path.states.col(draw.path.numTimes());
    for (int j = 0; j < horizon; ++j) {
      Eigen::VectorXd next = sys.transMatrix * state + sys.transIntercept;
      for (int r = 0; r < d; ++r) {
        if (stateSd(r) > 0.0) next(r) += stateSd(r) * rng.normal();
      }
      state = std::move(next);
      phi.col(j) = state;
      y.col(j) = sys.obsIntercept + sys.obsMatrix * state;
      for (int i = 0; i < p; ++i) y(i, j) += obsSd * rng.normal();
    }
    out.logRates.push_back(std::move(y));
    out.factors.push_back(std::move(phi));
  }
  out.logRateSummary = summarize_grids(out.logRates);
  std::vector<Eigen::MatrixXd> rates;
  rates.reserve(out.logRates.size());
  for (const auto& y : out.logRates) rates.push_back(y.array().exp().matrix());
  out.rateSummary = summarize_grids(rates);
  return out;
}

QuantileGrid summarize_grids(const std::vector<Eigen::MatrixXd>& draws) {
  if (draws.empty()) throw std::invalid_argument("no draws to summarise");
  const auto rows = draws.front().rows();
  const auto cols = draws.front().cols();
  QuantileGrid g{Eigen::MatrixXd(rows, cols), Eigen::MatrixXd(rows, cols),
                 Eigen::MatrixXd(rows, cols)};
  std::vector<double> cell(draws.size());
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (std::size_t l = 0; l < draws.size(); ++l) cell[l] = draws[l](r, c);
      const auto s = summarize_95(cell);
      g.mean(r, c) = s.mean;
      g.lower(r, c) = s.lower;
      g.upper(r, c) = s.upper;
    }
  }
  return g;
}

FactorProjection project_factors(const ForecastResult& result) {
  FactorProjection out;
  const auto& window = result.window;
  std::vector<double> values(result.factors.size());
  const bool cohort = !result.factors.empty() && result.factors.front().rows() > 1;
  for (int j = 0; j < result.horizon; ++j) {
    for (std::size_t l = 0; l < values.size(); ++l) {
      values[l] = result.factors[l](0, j);
    }
    out.years.push_back(result.forecastYear(j));
    out.kappa.push_back(summarize_95(values));
    if (cohort) {
      for (std::size_t l = 0; l < values.size(); ++l) {
        values[l] = result.factors[l](1, j);
      }
      out.cohorts.push_back(
          projected_cohort_index(window, window.firstAge(), result.forecastYear(j)));
      out.gamma.push_back(summarize_95(values));
    }
  }
  return out;
}

FactorProjection project_factors(const PosteriorChain& chain, int horizon) {
  return project_factors(forecast(chain, horizon));
}

}  // namespace mortality
