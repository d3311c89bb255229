#pragma once

#include <vector>

#include "mortality/gibbs.hpp"

namespace mortality {

/// Per-cell summary over forecast draws: mean and type-7 quantiles at
/// 2.5% / 97.5%.
struct QuantileGrid {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
};

struct ForecastResult {
  int horizon = 0;
  AgeYearWindow window;               // estimation window
  std::vector<Eigen::MatrixXd> logRates;  // per draw, p x k (y_{n+1..n+k})
  std::vector<Eigen::MatrixXd> factors;   // per draw, d x k (phi_{n+1..n+k})
  QuantileGrid logRateSummary;        // p x k
  QuantileGrid rateSummary;           // exp(y), p x k

  int forecastYear(int j) const { return window.lastYear() + 1 + j; }
};

/// Posterior predictive simulation of the next k years. Each stored draw is
/// propagated through its own state transition and observation equation with
/// a random stream keyed on (chain seed, draw index, horizon).
ForecastResult forecast(const PosteriorChain& chain, int horizon);

/// Summary grids for p x k matrices collected across draws.
QuantileGrid summarize_grids(const std::vector<Eigen::MatrixXd>& draws);

/// Projected period factor for years t_n+1..t_n+k and projected cohort values
/// for the new birth years t_n - x_1 + 1 .. t_n - x_1 + k.
struct FactorProjection {
  std::vector<int> years;
  std::vector<IntervalSummary> kappa;
  std::vector<int> cohorts;  // empty for Lee-Carter
  std::vector<IntervalSummary> gamma;
};

FactorProjection project_factors(const ForecastResult& result);
FactorProjection project_factors(const PosteriorChain& chain, int horizon);

}  // namespace mortality
