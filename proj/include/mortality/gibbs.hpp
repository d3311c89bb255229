#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mortality/model.hpp"
#include "mortality/random.hpp"
#include "mortality/stats.hpp"

namespace mortality {

struct SamplerConfig {
  int iterations = 30000;
  int burnIn = 15000;
  std::uint64_t seed = 1;
  int thin = 1;
  Hyperpriors priors;
  std::optional<StaticParams> init;  // default_init() when empty
  // Include the AR intercept eta in the sigma^2_gamma residuals. Setting this
  // to false drops it from the residual.
  bool cohortVarianceUsesIntercept = true;

  void validate() const;
  int storedDraws() const { return (iterations - burnIn) / thin; }
};

struct Draw {
  StaticParams params;
  StatePath path;
};

struct PosteriorChain {
  ModelSpec spec;
  SamplerConfig config;
  std::vector<Draw> draws;
};

/// Starting values: alpha at the row means of the panel, loadings at 1/p,
/// theta = eta = -0.1, lambda = 0.5 and all variances at 0.01.
StaticParams default_init(const ModelSpec& spec, const DataPanel& panel);

struct NormalConditional {
  double mean = 0.0;
  double variance = 1.0;
};

struct InverseGammaConditional {
  double shape = 1.0;
  double scale = 1.0;
};

/// Everything a single full conditional depends on.
struct ConditionalInputs {
  const ModelSpec& spec;
  const DataPanel& panel;
  const StatePath& path;
  const StaticParams& params;
  const Hyperpriors& priors;
};

// Conjugate full conditionals. `age` is a 0-based row index.
NormalConditional alpha_conditional(const ConditionalInputs& in, int age);
NormalConditional beta_conditional(const ConditionalInputs& in, int age);
NormalConditional beta_gamma_conditional(const ConditionalInputs& in, int age);
NormalConditional theta_conditional(const ConditionalInputs& in);
NormalConditional eta_conditional(const ConditionalInputs& in);
// Moments of the untruncated Gaussian; lambda is drawn restricted to [-1, 1].
NormalConditional lambda_conditional(const ConditionalInputs& in);
InverseGammaConditional sigma2_eps_conditional(const ConditionalInputs& in);
InverseGammaConditional sigma2_kappa_conditional(const ConditionalInputs& in);
InverseGammaConditional sigma2_gamma_conditional(const ConditionalInputs& in,
                                                 bool withIntercept = true);

double draw(const NormalConditional& c, Rng& rng);
double draw_truncated(const NormalConditional& c, double lower, double upper,
                      Rng& rng);
double draw(const InverseGammaConditional& c, Rng& rng);

/// Loadings, their normalisation, then alpha (by age), theta, eta and lambda.
StaticParams sample_gaussian_posteriors(const ModelSpec& spec,
                                        const DataPanel& panel,
                                        const StatePath& path,
                                        StaticParams params,
                                        const Hyperpriors& priors, Rng& rng);

/// sigma^2_eps, sigma^2_kappa and (cohort models) sigma^2_gamma.
StaticParams sample_variance_posteriors(const ModelSpec& spec,
                                        const DataPanel& panel,
                                        const StatePath& path,
                                        StaticParams params,
                                        const Hyperpriors& priors, Rng& rng,
                                        bool cohortVarianceUsesIntercept = true);

using ProgressCallback = std::function<void(int iteration)>;

/// Full Gibbs sampler: FFBS state block, centring, loading blocks with
/// normalisation, remaining static parameters. Deterministic given the seed.
PosteriorChain run_chain(const ModelSpec& spec, const DataPanel& panel,
                         const SamplerConfig& config,
                         const ProgressCallback& progress = {});

// Coordinate-wise posterior means over stored draws.
StaticParams posterior_mean_params(const PosteriorChain& chain);
StatePath posterior_mean_path(const PosteriorChain& chain);

struct ParameterSummary {
  std::string name;
  IntervalSummary stats;
};

/// Mean and 95% credible interval for every scalar static parameter and every
/// age-indexed loading.
std::vector<ParameterSummary> summarize_parameters(const PosteriorChain& chain);

// Scalar parameter names present for the model kind, in storage order.
std::vector<std::string> scalar_parameter_names(ModelKind kind);
double scalar_parameter(const StaticParams& params, const std::string& name);

}  // namespace mortality
