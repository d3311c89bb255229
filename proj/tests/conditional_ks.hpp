#pragma once

// Kolmogorov-Smirnov comparison of each conjugate conditional sampler against
// a grid-normalised conditional built from the log-joint density in
// oracles.hpp. The library's conditional moments are used only to place the
// integration grid.

#include <functional>
#include <string>
#include <vector>

#include "mortality/gibbs.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace ks_suite {

using namespace mortality;

struct Result {
  std::string family;
  double distance = 0.0;
};

struct FrozenInstance {
  ModelSpec spec;
  DataPanel panel;
  StatePath path;
  StaticParams params;
  Hyperpriors priors;
};

// Small full-cohort panel with a cohort AR close to the unit boundary so the
// lambda truncation is active, and parameters moved away from the truth.
inline FrozenInstance frozen_instance(std::uint64_t seed) {
  const auto spec = support::toy_spec(ModelKind::FullCohort, 4, 8);
  auto truth_params = support::toy_params(spec);
  truth_params.lambda = 0.96;
  truth_params.sigma2Eps = 0.01;
  const auto truth = support::toy_truth(spec, truth_params, seed);
  StaticParams s = truth.params;
  s.alpha.array() += 0.03;
  s.beta(2) *= 1.2;
  s.betaGamma(0) *= 0.8;
  s.theta += 0.05;
  s.eta -= 0.02;
  s.lambda = 0.9;
  s.sigma2Eps *= 1.5;
  s.sigma2Kappa *= 0.7;
  s.sigma2Gamma *= 1.3;
  return {spec, truth.panel, truth.path, s, Hyperpriors{}};
}

inline double normal_ks(const FrozenInstance& f, int draws, Rng& rng,
                        const std::function<NormalConditional(const ConditionalInputs&)>& cond,
                        const std::function<double&(StaticParams&)>& slot,
                        bool truncated = false) {
  const ConditionalInputs in{f.spec, f.panel, f.path, f.params, f.priors};
  const NormalConditional c = cond(in);
  std::vector<double> xs(draws);
  for (double& x : xs) {
    x = truncated ? draw_truncated(c, -1.0, 1.0, rng) : draw(c, rng);
  }
  const double sd = std::sqrt(c.variance);
  double lo = c.mean - 12 * sd, hi = c.mean + 12 * sd;
  if (truncated) {
    lo = std::max(lo, -1.0);
    hi = std::min(hi, 1.0);
  }
  StaticParams work = f.params;
  const oracle::GridCdf cdf(
      [&](double v) {
        slot(work) = v;
        return oracle::log_joint(f.spec, f.panel, f.path, work, f.priors);
      },
      lo, hi);
  return oracle::ks_distance(xs, [&](double x) { return cdf(x); });
}

inline double ig_ks(const FrozenInstance& f, int draws, Rng& rng,
                    const std::function<InverseGammaConditional(const ConditionalInputs&)>& cond,
                    const std::function<double&(StaticParams&)>& slot) {
  const ConditionalInputs in{f.spec, f.panel, f.path, f.params, f.priors};
  const InverseGammaConditional c = cond(in);
  std::vector<double> xs(draws);
  for (double& x : xs) x = draw(c, rng);
  const double mode = c.scale / (c.shape + 1.0);
  StaticParams work = f.params;
  const oracle::GridCdf cdf(
      [&](double v) {
        slot(work) = v;
        return oracle::log_joint(f.spec, f.panel, f.path, work, f.priors);
      },
      mode / 25.0, mode * 25.0);
  return oracle::ks_distance(xs, [&](double x) { return cdf(x); });
}

inline std::vector<Result> run(int draws, std::uint64_t seed) {
  const FrozenInstance f = frozen_instance(seed);
  Rng rng({seed, 0x6b73ULL});
  std::vector<Result> out;
  out.push_back({"alpha", normal_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return alpha_conditional(in, 1); },
      [](StaticParams& s) -> double& { return s.alpha(1); })});
  out.push_back({"beta", normal_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return beta_conditional(in, 2); },
      [](StaticParams& s) -> double& { return s.beta(2); })});
  out.push_back({"betaGamma", normal_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return beta_gamma_conditional(in, 0); },
      [](StaticParams& s) -> double& { return s.betaGamma(0); })});
  out.push_back({"theta", normal_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return theta_conditional(in); },
      [](StaticParams& s) -> double& { return s.theta; })});
  out.push_back({"eta", normal_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return eta_conditional(in); },
      [](StaticParams& s) -> double& { return s.eta; })});
  out.push_back({"lambda (truncated)", normal_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return lambda_conditional(in); },
      [](StaticParams& s) -> double& { return s.lambda; }, true)});
  out.push_back({"sigma2Eps", ig_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return sigma2_eps_conditional(in); },
      [](StaticParams& s) -> double& { return s.sigma2Eps; })});
  out.push_back({"sigma2Kappa", ig_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return sigma2_kappa_conditional(in); },
      [](StaticParams& s) -> double& { return s.sigma2Kappa; })});
  out.push_back({"sigma2Gamma", ig_ks(f, draws, rng,
      [](const ConditionalInputs& in) { return sigma2_gamma_conditional(in); },
      [](StaticParams& s) -> double& { return s.sigma2Gamma; })});
  return out;
}

}  // namespace ks_suite
