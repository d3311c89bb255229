#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>

#include "mortality/lgssm.hpp"
#include "mortality/window.hpp"

namespace mortality {

/// p x n grid of log crude death rates; entry (i, j) is ln m(x_i, t_j).
struct DataPanel {
  AgeYearWindow window;
  Eigen::MatrixXd logRates;

  DataPanel() = default;
  DataPanel(AgeYearWindow w, Eigen::MatrixXd rates);

  int numAges() const { return window.numAges(); }
  int numYears() const { return window.numYears(); }
};

enum class ModelKind { LeeCarter, SimplifiedCohort, FullCohort };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::FullCohort;
  AgeYearWindow window;

  bool hasCohort() const { return kind != ModelKind::LeeCarter; }
  // Period factor plus one cohort coordinate per age for the cohort models.
  int stateDim() const { return hasCohort() ? window.numAges() + 1 : 1; }
};

/// Static parameters psi. For Lee-Carter `betaGamma` is empty and the cohort
/// scalars (eta, lambda, sigma2Gamma) are unused; for the simplified cohort
/// model `betaGamma` is fixed at one.
struct StaticParams {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd betaGamma;
  double theta = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
  double sigma2Eps = 1.0;
  double sigma2Kappa = 1.0;
  double sigma2Gamma = 1.0;
};

// Throws std::invalid_argument if the parameter shapes do not fit the spec.
void check_consistent(const ModelSpec& spec, const StaticParams& params);

/// Latent trajectory phi_{0:n}; column t holds phi_t, row 0 is the period
/// factor kappa and row i+1 is the cohort coordinate gamma^{x_{i+1}}.
struct StatePath {
  Eigen::MatrixXd states;

  Eigen::Index numTimes() const { return states.cols() - 1; }  // n
  double kappa(Eigen::Index t) const { return states(0, t); }
  // Cohort value for age index i at time t; zero for Lee-Carter paths.
  double gamma(Eigen::Index i, Eigen::Index t) const {
    return states.rows() > 1 ? states(i + 1, t) : 0.0;
  }
};

using SystemMatrices = LinearGaussianSystem<double>;

struct GaussianPrior {
  double mean = 0.0;
  double variance = 10.0;
};

struct InverseGammaPrior {
  double shape = 2.01;
  double scale = 0.01;
};

/// Independent conjugate priors and the Kalman initial distribution
/// phi_0 ~ N(initMean * 1, initVariance * I). Defaults: N(0, 10) for the
/// Gaussian priors, IG(2.01, 0.01) for the variances.
struct Hyperpriors {
  GaussianPrior alpha, beta, betaGamma, theta, eta, lambda;
  InverseGammaPrior sigma2Eps, sigma2Kappa, sigma2Gamma;
  double initMean = 0.0;
  double initVariance = 10.0;

  void validate() const;
  GaussianMoments<double> initialState(int stateDim) const;
};

SystemMatrices build_system(const ModelSpec& spec, const StaticParams& params);

/// Year-of-birth indexed cohort values gamma_c for c = firstCohort ... .
struct CohortSeries {
  int firstCohort = 0;
  Eigen::VectorXd values;

  int lastCohort() const {
    return firstCohort + static_cast<int>(values.size()) - 1;
  }
  double at(int cohort) const;
};

/// Reads one value per in-window cohort (t_1 - x_p .. t_n - x_1) from the
/// latest cell on its diagonal. Throws NumericError if the cohort-shift
/// identity is violated by more than 1e-9 anywhere in the path.
CohortSeries extract_cohort_series(const StatePath& path,
                                   const AgeYearWindow& window);

/// The cohort t_1 - 1 - x_p that only appears in phi_0 (oldest age at t=0).
double pre_window_cohort_value(const StatePath& path);

/// Rebuilds phi_{0:n} from kappa_{0:n} and the n+p cohort values running from
/// the pre-window cohort to t_n - x_1.
StatePath path_from_factors(const ModelSpec& spec,
                            const Eigen::VectorXd& kappa,
                            const Eigen::VectorXd& cohortsWithPreWindow);

/// Identification constraints: centre kappa over t=1..n, centre the n+p-1
/// in-window cohorts, normalise beta (and betaGamma for the full model) to sum
/// to one. The centring shifts are applied to every column of the path,
/// including phi_0, so the cohort-shift identity survives exactly.
void center_states(StatePath& path, const ModelSpec& spec);
void normalize_loadings(Eigen::VectorXd& loadings, const char* name);
void apply_constraints(StatePath& path, StaticParams& params,
                       const ModelSpec& spec);

/// Maps an arbitrary (params, path) pair onto the identified parametrisation
/// without changing the model it describes: loadings are rescaled to sum to
/// one (scaling the factors, drifts and innovation variances to match), and
/// the factor means are moved into alpha (and into eta for the cohort AR).
void to_identified_form(StatePath& path, StaticParams& params,
                        const ModelSpec& spec);

/// alpha_x + beta_x kappa_t + betaGamma_x gamma_{t-x} for t = 1..n (p x n).
Eigen::MatrixXd fitted_means(const ModelSpec& spec, const StaticParams& params,
                             const StatePath& path);

/// Largest violation of the cohort-shift identity over t = 1..n.
double cohort_shift_violation(const StatePath& path);

}  // namespace mortality
