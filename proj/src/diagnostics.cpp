#include "mortality/diagnostics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mortality/errors.hpp"

namespace mortality {

ResidualGrid compute_residuals(const DataPanel& panel,
                               const PosteriorChain& chain) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  const StaticParams psiBar = posterior_mean_params(chain);
  const SystemMatrices sys = build_system(chain.spec, psiBar);
  const auto filtered = kalman_filter(
      panel.logRates, sys, chain.config.priors.initialState(chain.spec.stateDim()));
  ResidualGrid grid{panel.window,
                    Eigen::MatrixXd(panel.numAges(), panel.numYears())};
  for (int t = 0; t < panel.numYears(); ++t) {
    grid.residuals.col(t) = panel.logRates.col(t) - filtered.perTime[t].f;
  }
  return grid;
}

double conditional_loglik(const DataPanel& panel, const StaticParams& psi,
                          const StatePath& path, const ModelSpec& spec) {
  if (!(psi.sigma2Eps > 0)) {
    throw NumericError("conditional log-likelihood needs sigma2Eps > 0");
  }
  const Eigen::MatrixXd resid =
      panel.logRates - fitted_means(spec, psi, path);
  const double cells = static_cast<double>(resid.size());
  return -0.5 * (cells * std::log(2.0 * std::numbers::pi * psi.sigma2Eps) +
                 resid.squaredNorm() / psi.sigma2Eps);
}

DicReport make_dic_report(double meanDeviance, double devianceAtMean) {
  DicReport r;
  r.meanDeviance = meanDeviance;
  r.devianceAtMean = devianceAtMean;
  r.pD = meanDeviance - devianceAtMean;
  r.dic = meanDeviance + r.pD;
  return r;
}

DicReport compute_dic(const DataPanel& panel, const PosteriorChain& chain) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  std::vector<double> deviances;
  deviances.reserve(chain.draws.size());
  for (const auto& d : chain.draws) {
    deviances.push_back(-2.0 *
                        conditional_loglik(panel, d.params, d.path, chain.spec));
  }
  const double meanDeviance =
      pairwise_sum(deviances) / static_cast<double>(deviances.size());
  const double atMean =
      -2.0 * conditional_loglik(panel, posterior_mean_params(chain),
                                posterior_mean_path(chain), chain.spec);
  return make_dic_report(meanDeviance, atMean);
}

FactorSummary summarize_factors(const PosteriorChain& chain) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  const auto& window = chain.spec.window;
  FactorSummary out;
  std::vector<double> values(chain.draws.size());
  for (int t = 1; t <= window.numYears(); ++t) {
    for (std::size_t l = 0; l < chain.draws.size(); ++l) {
      values[l] = chain.draws[l].path.kappa(t);
    }
    out.periods.push_back(window.year(t - 1));
    out.kappa.push_back(summarize_95(values));
  }
  if (chain.spec.hasCohort()) {
    std::vector<Eigen::VectorXd> series;
    series.reserve(chain.draws.size());
    for (const auto& d : chain.draws) {
      series.push_back(extract_cohort_series(d.path, window).values);
    }
    for (int k = 0; k < window.numCohorts(); ++k) {
      for (std::size_t l = 0; l < series.size(); ++l) values[l] = series[l](k);
      out.cohorts.push_back(window.firstCohort() + k);
      out.gamma.push_back(summarize_95(values));
    }
  }
  return out;
}

}  // namespace mortality
