#include "mortality/gibbs.hpp"

#include <stdexcept>

#include "mortality/errors.hpp"

namespace mortality {

void SamplerConfig::validate() const {
  if (iterations <= 0) throw std::invalid_argument("iterations must be > 0");
  if (burnIn < 0 || burnIn >= iterations) {
    throw std::invalid_argument("burn-in must satisfy 0 <= burnIn < iterations");
  }
  if (thin <= 0) throw std::invalid_argument("thin must be > 0");
  if (storedDraws() < 1) {
    throw std::invalid_argument("configuration stores no draws");
  }
  priors.validate();
}

StaticParams default_init(const ModelSpec& spec, const DataPanel& panel) {
  const int p = spec.window.numAges();
  StaticParams init;
  init.alpha = panel.logRates.rowwise().mean();
  init.beta = Eigen::VectorXd::Constant(p, 1.0 / p);
  switch (spec.kind) {
    case ModelKind::LeeCarter:
      break;
    case ModelKind::SimplifiedCohort:
      init.betaGamma = Eigen::VectorXd::Ones(p);
      break;
    case ModelKind::FullCohort:
      init.betaGamma = Eigen::VectorXd::Constant(p, 1.0 / p);
      break;
  }
  init.theta = -0.1;
  init.eta = spec.hasCohort() ? -0.1 : 0.0;
  init.lambda = spec.hasCohort() ? 0.5 : 0.0;
  init.sigma2Eps = 0.01;
  init.sigma2Kappa = 0.01;
  init.sigma2Gamma = 0.01;
  return init;
}

namespace {

double cohortLoading(const ConditionalInputs& in, int age) {
  switch (in.spec.kind) {
    case ModelKind::LeeCarter:
      return 0.0;
    case ModelKind::SimplifiedCohort:
      return 1.0;
    case ModelKind::FullCohort:
      return in.params.betaGamma(age);
  }
  return 0.0;
}

// Posterior of a coefficient c in r_t = c z_t + N(0, noiseVar) with a
// N(prior.mean, prior.variance) prior.
NormalConditional regressionConditional(const GaussianPrior& prior,
                                        double noiseVar, double sumRZ,
                                        double sumZZ) {
  const double denom = prior.variance * sumZZ + noiseVar;
  NormalConditional c;
  c.mean = (prior.variance * sumRZ + prior.mean * noiseVar) / denom;
  c.variance = prior.variance * noiseVar / denom;
  if (!(c.variance > 0) || !std::isfinite(c.mean)) {
    throw NumericError("non-positive conditional posterior variance");
  }
  return c;
}

void requireCohort(const ConditionalInputs& in, const char* what) {
  if (!in.spec.hasCohort()) {
    throw std::invalid_argument(std::string(what) +
                                " is not a Lee-Carter parameter");
  }
}

}  // namespace

NormalConditional alpha_conditional(const ConditionalInputs& in, int age) {
  const auto n = in.panel.numYears();
  const double b = in.params.beta(age);
  const double bg = cohortLoading(in, age);
  double sumR = 0.0;
  for (int t = 1; t <= n; ++t) {
    sumR += in.panel.logRates(age, t - 1) - b * in.path.kappa(t) -
            bg * in.path.gamma(age, t);
  }
  return regressionConditional(in.priors.alpha, in.params.sigma2Eps, sumR, n);
}

NormalConditional beta_conditional(const ConditionalInputs& in, int age) {
  const auto n = in.panel.numYears();
  const double a = in.params.alpha(age);
  const double bg = cohortLoading(in, age);
  double sumRZ = 0.0, sumZZ = 0.0;
  for (int t = 1; t <= n; ++t) {
    const double k = in.path.kappa(t);
    sumRZ += (in.panel.logRates(age, t - 1) - a - bg * in.path.gamma(age, t)) * k;
    sumZZ += k * k;
  }
  return regressionConditional(in.priors.beta, in.params.sigma2Eps, sumRZ,
                               sumZZ);
}

NormalConditional beta_gamma_conditional(const ConditionalInputs& in, int age) {
  requireCohort(in, "betaGamma");
  const auto n = in.panel.numYears();
  const double a = in.params.alpha(age);
  const double b = in.params.beta(age);
  double sumRZ = 0.0, sumZZ = 0.0;
  for (int t = 1; t <= n; ++t) {
    const double g = in.path.gamma(age, t);
    sumRZ += (in.panel.logRates(age, t - 1) - a - b * in.path.kappa(t)) * g;
    sumZZ += g * g;
  }
  return regressionConditional(in.priors.betaGamma, in.params.sigma2Eps, sumRZ,
                               sumZZ);
}

NormalConditional theta_conditional(const ConditionalInputs& in) {
  const auto n = in.path.numTimes();
  double sumR = 0.0;
  for (Eigen::Index t = 1; t <= n; ++t) {
    sumR += in.path.kappa(t) - in.path.kappa(t - 1);
  }
  return regressionConditional(in.priors.theta, in.params.sigma2Kappa, sumR,
                               static_cast<double>(n));
}

NormalConditional eta_conditional(const ConditionalInputs& in) {
  requireCohort(in, "eta");
  const auto n = in.path.numTimes();
  double sumR = 0.0;
  for (Eigen::Index t = 1; t <= n; ++t) {
    sumR += in.path.gamma(0, t) - in.params.lambda * in.path.gamma(0, t - 1);
  }
  return regressionConditional(in.priors.eta, in.params.sigma2Gamma, sumR,
                               static_cast<double>(n));
}

NormalConditional lambda_conditional(const ConditionalInputs& in) {
  requireCohort(in, "lambda");
  const auto n = in.path.numTimes();
  double sumRZ = 0.0, sumZZ = 0.0;
  for (Eigen::Index t = 1; t <= n; ++t) {
    const double prev = in.path.gamma(0, t - 1);
    sumRZ += (in.path.gamma(0, t) - in.params.eta) * prev;
    sumZZ += prev * prev;
  }
  return regressionConditional(in.priors.lambda, in.params.sigma2Gamma, sumRZ,
                               sumZZ);
}

InverseGammaConditional sigma2_eps_conditional(const ConditionalInputs& in) {
  const Eigen::MatrixXd resid =
      in.panel.logRates - fitted_means(in.spec, in.params, in.path);
  const double np = static_cast<double>(resid.size());
  return {in.priors.sigma2Eps.shape + 0.5 * np,
          in.priors.sigma2Eps.scale + 0.5 * resid.squaredNorm()};
}

InverseGammaConditional sigma2_kappa_conditional(const ConditionalInputs& in) {
  const auto n = in.path.numTimes();
  double ss = 0.0;
  for (Eigen::Index t = 1; t <= n; ++t) {
    const double e = in.path.kappa(t) - in.path.kappa(t - 1) - in.params.theta;
    ss += e * e;
  }
  return {in.priors.sigma2Kappa.shape + 0.5 * static_cast<double>(n),
          in.priors.sigma2Kappa.scale + 0.5 * ss};
}

InverseGammaConditional sigma2_gamma_conditional(const ConditionalInputs& in,
                                                 bool withIntercept) {
  requireCohort(in, "sigma2Gamma");
  const auto n = in.path.numTimes();
  const double eta = withIntercept ? in.params.eta : 0.0;
  double ss = 0.0;
  for (Eigen::Index t = 1; t <= n; ++t) {
    const double e = in.path.gamma(0, t) -
                     in.params.lambda * in.path.gamma(0, t - 1) - eta;
    ss += e * e;
  }
  return {in.priors.sigma2Gamma.shape + 0.5 * static_cast<double>(n),
          in.priors.sigma2Gamma.scale + 0.5 * ss};
}

double draw(const NormalConditional& c, Rng& rng) {
  return rng.normal(c.mean, c.variance);
}

double draw_truncated(const NormalConditional& c, double lower, double upper,
                      Rng& rng) {
  return sample_truncated_normal(c.mean, c.variance, lower, upper, rng);
}

double draw(const InverseGammaConditional& c, Rng& rng) {
  return sample_inverse_gamma(c.shape, c.scale, rng);
}

StaticParams sample_gaussian_posteriors(const ModelSpec& spec,
                                        const DataPanel& panel,
                                        const StatePath& path,
                                        StaticParams params,
                                        const Hyperpriors& priors, Rng& rng) {
  const int p = spec.window.numAges();
  const ConditionalInputs in{spec, panel, path, params, priors};

  for (int x = 0; x < p; ++x) params.beta(x) = draw(beta_conditional(in, x), rng);
  normalize_loadings(params.beta, "beta");

  if (spec.kind == ModelKind::FullCohort) {
    for (int x = 0; x < p; ++x) {
      params.betaGamma(x) = draw(beta_gamma_conditional(in, x), rng);
    }
    normalize_loadings(params.betaGamma, "betaGamma");
  }

  for (int x = 0; x < p; ++x) {
    params.alpha(x) = draw(alpha_conditional(in, x), rng);
  }
  params.theta = draw(theta_conditional(in), rng);
  if (spec.hasCohort()) {
    params.eta = draw(eta_conditional(in), rng);
    params.lambda = draw_truncated(lambda_conditional(in), -1.0, 1.0, rng);
  }
  return params;
}

StaticParams sample_variance_posteriors(const ModelSpec& spec,
                                        const DataPanel& panel,
                                        const StatePath& path,
                                        StaticParams params,
                                        const Hyperpriors& priors, Rng& rng,
                                        bool cohortVarianceUsesIntercept) {
  const ConditionalInputs in{spec, panel, path, params, priors};
  params.sigma2Eps = draw(sigma2_eps_conditional(in), rng);
  params.sigma2Kappa = draw(sigma2_kappa_conditional(in), rng);
  if (spec.hasCohort()) {
    params.sigma2Gamma =
        draw(sigma2_gamma_conditional(in, cohortVarianceUsesIntercept), rng);
  }
  return params;
}

PosteriorChain run_chain(const ModelSpec& spec, const DataPanel& panel,
                         const SamplerConfig& config,
                         const ProgressCallback& progress) {
  config.validate();
  if (panel.window != spec.window) {
    throw std::invalid_argument("panel window does not match the model spec");
  }
  PosteriorChain chain{spec, config, {}};
  chain.draws.reserve(config.storedDraws());

  StaticParams params = config.init ? *config.init : default_init(spec, panel);
  check_consistent(spec, params);
  const auto init = config.priors.initialState(spec.stateDim());
  Rng rng(config.seed);
  StatePath path;

  for (int iter = 1; iter <= config.iterations; ++iter) {
    try {
      const SystemMatrices sys = build_system(spec, params);
      const auto filtered = kalman_filter(panel.logRates, sys, init);
      path.states = ffbs_sample(filtered, sys, rng.engine());
      center_states(path, spec);
      params = sample_gaussian_posteriors(spec, panel, path, std::move(params),
                                          config.priors, rng);
      params = sample_variance_posteriors(spec, panel, path, std::move(params),
                                          config.priors, rng,
                                          config.cohortVarianceUsesIntercept);
    } catch (const DegenerateDraw& e) {
      throw DegenerateDraw("iteration " + std::to_string(iter) + ": " +
                           e.what());
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(iter) + ": " + e.what());
    }
    const int kept = iter - config.burnIn;
    if (kept > 0 && kept % config.thin == 0) {
      chain.draws.push_back({params, path});
    }
    if (progress) progress(iter);
  }
  return chain;
}

StaticParams posterior_mean_params(const PosteriorChain& chain) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  StaticParams mean = chain.draws.front().params;
  const double L = static_cast<double>(chain.draws.size());
  auto average = [&](auto&& get) {
    std::vector<double> v;
    v.reserve(chain.draws.size());
    for (const auto& d : chain.draws) v.push_back(get(d.params));
    return pairwise_sum(v) / L;
  };
  for (Eigen::Index i = 0; i < mean.alpha.size(); ++i) {
    mean.alpha(i) = average([i](const StaticParams& p) { return p.alpha(i); });
    mean.beta(i) = average([i](const StaticParams& p) { return p.beta(i); });
  }
  for (Eigen::Index i = 0; i < mean.betaGamma.size(); ++i) {
    mean.betaGamma(i) =
        average([i](const StaticParams& p) { return p.betaGamma(i); });
  }
  mean.theta = average([](const StaticParams& p) { return p.theta; });
  mean.eta = average([](const StaticParams& p) { return p.eta; });
  mean.lambda = average([](const StaticParams& p) { return p.lambda; });
  mean.sigma2Eps = average([](const StaticParams& p) { return p.sigma2Eps; });
  mean.sigma2Kappa = average([](const StaticParams& p) { return p.sigma2Kappa; });
  mean.sigma2Gamma = average([](const StaticParams& p) { return p.sigma2Gamma; });
  return mean;
}

StatePath posterior_mean_path(const PosteriorChain& chain) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  const auto& first = chain.draws.front().path.states;
  StatePath mean;
  mean.states.resize(first.rows(), first.cols());
  std::vector<double> v(chain.draws.size());
  for (Eigen::Index c = 0; c < first.cols(); ++c) {
    for (Eigen::Index r = 0; r < first.rows(); ++r) {
      for (std::size_t l = 0; l < chain.draws.size(); ++l) {
        v[l] = chain.draws[l].path.states(r, c);
      }
      mean.states(r, c) = pairwise_sum(v) / static_cast<double>(v.size());
    }
  }
  return mean;
}

std::vector<std::string> scalar_parameter_names(ModelKind kind) {
  if (kind == ModelKind::LeeCarter) {
    return {"theta", "sigma2Eps", "sigma2Kappa"};
  }
  return {"theta", "eta", "lambda", "sigma2Eps", "sigma2Kappa", "sigma2Gamma"};
}

double scalar_parameter(const StaticParams& params, const std::string& name) {
  if (name == "theta") return params.theta;
  if (name == "eta") return params.eta;
  if (name == "lambda") return params.lambda;
  if (name == "sigma2Eps") return params.sigma2Eps;
  if (name == "sigma2Kappa") return params.sigma2Kappa;
  if (name == "sigma2Gamma") return params.sigma2Gamma;
  throw std::invalid_argument("unknown scalar parameter '" + name + "'");
}

std::vector<ParameterSummary> summarize_parameters(const PosteriorChain& chain) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  std::vector<ParameterSummary> out;
  std::vector<double> values(chain.draws.size());
  auto collect = [&](const std::string& name, auto&& get) {
    for (std::size_t l = 0; l < chain.draws.size(); ++l) {
      values[l] = get(chain.draws[l].params);
    }
    out.push_back({name, summarize_95(values)});
  };
  for (const auto& name : scalar_parameter_names(chain.spec.kind)) {
    collect(name, [&](const StaticParams& p) { return scalar_parameter(p, name); });
  }
  const auto& window = chain.spec.window;
  for (int i = 0; i < window.numAges(); ++i) {
    const auto age = std::to_string(window.age(i));
    collect("alpha[" + age + "]", [i](const StaticParams& p) { return p.alpha(i); });
  }
  for (int i = 0; i < window.numAges(); ++i) {
    const auto age = std::to_string(window.age(i));
    collect("beta[" + age + "]", [i](const StaticParams& p) { return p.beta(i); });
  }
  if (chain.spec.kind == ModelKind::FullCohort) {
    for (int i = 0; i < window.numAges(); ++i) {
      const auto age = std::to_string(window.age(i));
      collect("betaGamma[" + age + "]",
              [i](const StaticParams& p) { return p.betaGamma(i); });
    }
  }
  return out;
}

}  // namespace mortality
