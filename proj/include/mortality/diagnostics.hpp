#pragma once

#include <string>
#include <vector>

#include "mortality/gibbs.hpp"

namespace mortality {

struct ResidualGrid {
  AgeYearWindow window;
  Eigen::MatrixXd residuals;  // p x n, e_{x,t} = y_{x,t} - f_{x,t}
};

/// One-step-ahead residuals from a Kalman pass at the posterior-mean static
/// parameters.
ResidualGrid compute_residuals(const DataPanel& panel,
                               const PosteriorChain& chain);

/// ln p(y | psi, phi_{0:n}) with independent N(0, sigma^2_eps) errors.
double conditional_loglik(const DataPanel& panel, const StaticParams& psi,
                          const StatePath& path, const ModelSpec& spec);

struct DicReport {
  double meanDeviance = 0.0;      // D-bar
  double devianceAtMean = 0.0;    // D(Psi-bar)
  double pD = 0.0;
  double dic = 0.0;
};

DicReport make_dic_report(double meanDeviance, double devianceAtMean);

/// Conditional DIC with latent states treated as parameters. Psi-bar averages
/// static parameters and constrained states coordinate-wise over the chain.
DicReport compute_dic(const DataPanel& panel, const PosteriorChain& chain);

/// Posterior mean and 95% band of kappa_t (t = 1..n) and of each in-window
/// cohort value.
struct FactorSummary {
  std::vector<int> periods;
  std::vector<IntervalSummary> kappa;
  std::vector<int> cohorts;
  std::vector<IntervalSummary> gamma;
};

FactorSummary summarize_factors(const PosteriorChain& chain);

}  // namespace mortality
