#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mortality/data_io.hpp"
#include "mortality/gibbs.hpp"
#include "mortality/random.hpp"

namespace support {

using namespace mortality;

inline ModelSpec toy_spec(ModelKind kind, int p, int n, int firstAge = 60,
                          int firstYear = 2000) {
  return {kind, AgeYearWindow(firstAge, firstAge + p - 1, firstYear,
                              firstYear + n - 1)};
}

// Positive loadings summing to one, a rising log-rate schedule, a downward
// period drift and a persistent cohort AR(1).
inline StaticParams toy_params(const ModelSpec& spec) {
  const int p = spec.window.numAges();
  StaticParams s;
  s.alpha.resize(p);
  s.beta.resize(p);
  for (int i = 0; i < p; ++i) {
    s.alpha(i) = -4.5 + 0.1 * i;
    s.beta(i) = 1.0 + 0.6 * std::sin(1.0 + 2.0 * i / p);
  }
  s.beta /= s.beta.sum();
  s.theta = -0.2;
  s.sigma2Eps = 3e-4;
  s.sigma2Kappa = 0.5;
  if (spec.hasCohort()) {
    s.eta = -0.1;
    s.lambda = 0.8;
    s.sigma2Gamma = 0.3;
    s.betaGamma = Eigen::VectorXd::Ones(p);
    if (spec.kind == ModelKind::FullCohort) {
      for (int i = 0; i < p; ++i) s.betaGamma(i) = 1.4 - 0.8 * i / p;
      s.betaGamma /= s.betaGamma.sum();
    }
  }
  return s;
}

// phi_0 with kappa_0 = 0 and the p starting cohort values taken from a
// stretch of the cohort AR(1) run from its stationary mean.
inline Eigen::VectorXd stationary_initial_state(const ModelSpec& spec,
                                                const StaticParams& s,
                                                std::uint64_t seed) {
  Eigen::VectorXd phi0 = Eigen::VectorXd::Zero(spec.stateDim());
  if (!spec.hasCohort()) return phi0;
  const int p = spec.window.numAges();
  Rng rng({seed, 0xc0402ULL});
  double g = s.eta / (1.0 - s.lambda);
  std::vector<double> run;
  for (int k = 0; k < 50 + p; ++k) {
    g = s.lambda * g + s.eta + std::sqrt(s.sigma2Gamma) * rng.normal();
    run.push_back(g);
  }
  // Row 1 holds the newest cohort, row p the oldest.
  for (int i = 0; i < p; ++i) phi0(i + 1) = run[run.size() - 1 - i];
  return phi0;
}

inline SyntheticTruth toy_truth(const ModelSpec& spec, const StaticParams& s,
                                std::uint64_t seed) {
  return simulate_panel(spec, s, stationary_initial_state(spec, s, seed), seed);
}

inline SamplerConfig quick_config(int iterations, int burnIn,
                                  std::uint64_t seed = 1) {
  SamplerConfig c;
  c.iterations = iterations;
  c.burnIn = burnIn;
  c.seed = seed;
  return c;
}

inline std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mortality-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace support
