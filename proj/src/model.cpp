#include "mortality/model.hpp"

#include <cmath>
#include <stdexcept>

#include "mortality/errors.hpp"

namespace mortality {

DataPanel::DataPanel(AgeYearWindow w, Eigen::MatrixXd rates)
    : window(w), logRates(std::move(rates)) {
  if (logRates.rows() != window.numAges() ||
      logRates.cols() != window.numYears()) {
    throw DataError("panel is " + std::to_string(logRates.rows()) + "x" +
                    std::to_string(logRates.cols()) + " but the window is " +
                    std::to_string(window.numAges()) + "x" +
                    std::to_string(window.numYears()));
  }
  if (!logRates.allFinite()) {
    throw DataError("panel contains non-finite log rates");
  }
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LeeCarter:
      return "lc";
    case ModelKind::SimplifiedCohort:
      return "simplified-cohort";
    case ModelKind::FullCohort:
      return "full-cohort";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lc" || name == "lee-carter") return ModelKind::LeeCarter;
  if (name == "simplified-cohort" || name == "simplified")
    return ModelKind::SimplifiedCohort;
  if (name == "full-cohort" || name == "full") return ModelKind::FullCohort;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected lc, simplified-cohort, full-cohort)");
}

void check_consistent(const ModelSpec& spec, const StaticParams& params) {
  const auto p = spec.window.numAges();
  if (params.alpha.size() != p || params.beta.size() != p) {
    throw std::invalid_argument("alpha/beta must have one entry per age (" +
                                std::to_string(p) + ")");
  }
  switch (spec.kind) {
    case ModelKind::LeeCarter:
      if (params.betaGamma.size() != 0) {
        throw std::invalid_argument("Lee-Carter parameters carry no betaGamma");
      }
      break;
    case ModelKind::SimplifiedCohort:
      if (params.betaGamma.size() != p ||
          (params.betaGamma.array() != 1.0).any()) {
        throw std::invalid_argument(
            "simplified cohort model requires betaGamma fixed at one");
      }
      break;
    case ModelKind::FullCohort:
      if (params.betaGamma.size() != p) {
        throw std::invalid_argument("betaGamma must have one entry per age");
      }
      break;
  }
  if (!(params.sigma2Eps >= 0) || !(params.sigma2Kappa >= 0) ||
      (spec.hasCohort() && !(params.sigma2Gamma >= 0))) {
    throw std::invalid_argument("variances must be non-negative");
  }
}

void Hyperpriors::validate() const {
  for (const auto* g : {&alpha, &beta, &betaGamma, &theta, &eta, &lambda}) {
    if (!(g->variance > 0)) {
      throw std::invalid_argument("Gaussian prior variances must be positive");
    }
  }
  for (const auto* ig : {&sigma2Eps, &sigma2Kappa, &sigma2Gamma}) {
    if (!(ig->shape > 0) || !(ig->scale > 0)) {
      throw std::invalid_argument(
          "inverse-gamma prior shape and scale must be positive");
    }
  }
  if (!(initVariance > 0)) {
    throw std::invalid_argument("initial state variance must be positive");
  }
}

GaussianMoments<double> Hyperpriors::initialState(int stateDim) const {
  GaussianMoments<double> init;
  init.mean = Eigen::VectorXd::Constant(stateDim, initMean);
  init.cov = Eigen::MatrixXd::Identity(stateDim, stateDim) * initVariance;
  return init;
}

namespace {
Eigen::VectorXd cohortLoadings(const ModelSpec& spec,
                               const StaticParams& params) {
  const auto p = spec.window.numAges();
  switch (spec.kind) {
    case ModelKind::LeeCarter:
      return Eigen::VectorXd::Zero(p);
    case ModelKind::SimplifiedCohort:
      return Eigen::VectorXd::Ones(p);
    case ModelKind::FullCohort:
      return params.betaGamma;
  }
  return {};
}
}  // namespace

SystemMatrices build_system(const ModelSpec& spec, const StaticParams& params) {
  check_consistent(spec, params);
  const int p = spec.window.numAges();
  const int d = spec.stateDim();
  SystemMatrices sys;
  sys.obsIntercept = params.alpha;
  sys.obsNoiseVar = params.sigma2Eps;
  sys.obsMatrix = Eigen::MatrixXd::Zero(p, d);
  sys.obsMatrix.col(0) = params.beta;
  sys.transMatrix = Eigen::MatrixXd::Zero(d, d);
  sys.transMatrix(0, 0) = 1.0;
  sys.transIntercept = Eigen::VectorXd::Zero(d);
  sys.transIntercept(0) = params.theta;
  sys.transNoiseCov = Eigen::MatrixXd::Zero(d, d);
  sys.transNoiseCov(0, 0) = params.sigma2Kappa;
  if (spec.hasCohort()) {
    const Eigen::VectorXd loadings = cohortLoadings(spec, params);
    for (int i = 0; i < p; ++i) sys.obsMatrix(i, i + 1) = loadings(i);
    sys.transMatrix(1, 1) = params.lambda;
    for (int r = 2; r <= p; ++r) sys.transMatrix(r, r - 1) = 1.0;
    sys.transIntercept(1) = params.eta;
    sys.transNoiseCov(1, 1) = params.sigma2Gamma;
  }
  return sys;
}

double CohortSeries::at(int cohort) const {
  if (cohort < firstCohort || cohort > lastCohort()) {
    throw std::out_of_range("cohort " + std::to_string(cohort) +
                            " not in series");
  }
  return values(cohort - firstCohort);
}

double cohort_shift_violation(const StatePath& path) {
  const auto rows = path.states.rows();
  double worst = 0.0;
  for (Eigen::Index t = 1; t < path.states.cols(); ++t) {
    for (Eigen::Index r = 2; r < rows; ++r) {
      worst = std::max(worst,
                       std::abs(path.states(r, t) - path.states(r - 1, t - 1)));
    }
  }
  return worst;
}

CohortSeries extract_cohort_series(const StatePath& path,
                                   const AgeYearWindow& window) {
  const int p = window.numAges();
  const int n = window.numYears();
  if (path.states.rows() != p + 1 || path.states.cols() != n + 1) {
    throw std::invalid_argument("path does not match a cohort model window");
  }
  const double violation = cohort_shift_violation(path);
  if (!(violation <= 1e-9)) {
    throw NumericError("state path violates the cohort-shift identity by " +
                       std::to_string(violation));
  }
  CohortSeries series;
  series.firstCohort = window.firstCohort();
  series.values.resize(window.numCohorts());
  // Series index k sits on the diagonal t - i = k - p + 2 (t = 1..n).
  for (int k = 0; k < window.numCohorts(); ++k) {
    const int t = std::min(n, k + 1);
    const int i = t - (k - p + 2);
    series.values(k) = path.states(i + 1, t);
  }
  return series;
}

double pre_window_cohort_value(const StatePath& path) {
  if (path.states.rows() < 2) {
    throw std::invalid_argument("Lee-Carter paths carry no cohort factor");
  }
  return path.states(path.states.rows() - 1, 0);
}

StatePath path_from_factors(const ModelSpec& spec, const Eigen::VectorXd& kappa,
                            const Eigen::VectorXd& cohortsWithPreWindow) {
  const int p = spec.window.numAges();
  const int n = spec.window.numYears();
  if (kappa.size() != n + 1) {
    throw std::invalid_argument("kappa path must have n+1 entries");
  }
  StatePath path;
  path.states.resize(spec.stateDim(), n + 1);
  path.states.row(0) = kappa.transpose();
  if (spec.hasCohort()) {
    if (cohortsWithPreWindow.size() != n + p) {
      throw std::invalid_argument("cohort vector must have n+p entries");
    }
    for (int t = 0; t <= n; ++t) {
      for (int i = 0; i < p; ++i) {
        path.states(i + 1, t) = cohortsWithPreWindow(t + p - 1 - i);
      }
    }
  }
  return path;
}

void center_states(StatePath& path, const ModelSpec& spec) {
  const auto n = path.numTimes();
  const double kappaMean = path.states.row(0).tail(n).mean();
  path.states.row(0).array() -= kappaMean;
  if (spec.hasCohort()) {
    const double gammaMean =
        extract_cohort_series(path, spec.window).values.mean();
    path.states.bottomRows(path.states.rows() - 1).array() -= gammaMean;
  }
}

void normalize_loadings(Eigen::VectorXd& loadings, const char* name) {
  const double total = loadings.sum();
  if (total == 0.0 || !std::isfinite(total)) {
    throw DegenerateDraw(std::string("cannot normalise ") + name +
                         ": sum is " + std::to_string(total));
  }
  loadings /= total;
}

void apply_constraints(StatePath& path, StaticParams& params,
                       const ModelSpec& spec) {
  center_states(path, spec);
  normalize_loadings(params.beta, "beta");
  if (spec.kind == ModelKind::FullCohort) {
    normalize_loadings(params.betaGamma, "betaGamma");
  }
}

void to_identified_form(StatePath& path, StaticParams& params,
                        const ModelSpec& spec) {
  const double scale = params.beta.sum();
  if (scale == 0.0) throw DegenerateDraw("beta sums to zero");
  params.beta /= scale;
  path.states.row(0) *= scale;
  params.theta *= scale;
  params.sigma2Kappa *= scale * scale;
  const auto n = path.numTimes();
  const double kappaMean = path.states.row(0).tail(n).mean();
  path.states.row(0).array() -= kappaMean;
  params.alpha += params.beta * kappaMean;
  if (!spec.hasCohort()) return;

  const auto p = spec.window.numAges();
  auto gammaRows = path.states.bottomRows(p);
  if (spec.kind == ModelKind::FullCohort) {
    const double gScale = params.betaGamma.sum();
    if (gScale == 0.0) throw DegenerateDraw("betaGamma sums to zero");
    params.betaGamma /= gScale;
    gammaRows *= gScale;
    params.eta *= gScale;
    params.sigma2Gamma *= gScale * gScale;
  }
  const double gammaMean =
      extract_cohort_series(path, spec.window).values.mean();
  gammaRows.array() -= gammaMean;
  const Eigen::VectorXd loadings = cohortLoadings(spec, params);
  params.alpha += loadings * gammaMean;
  params.eta -= (1.0 - params.lambda) * gammaMean;
}

Eigen::MatrixXd fitted_means(const ModelSpec& spec, const StaticParams& params,
                             const StatePath& path) {
  const auto p = spec.window.numAges();
  const auto n = spec.window.numYears();
  Eigen::MatrixXd fit = params.alpha.replicate(1, n) +
                        params.beta * path.states.row(0).tail(n);
  if (spec.hasCohort()) {
    const Eigen::VectorXd loadings = cohortLoadings(spec, params);
    fit += loadings.asDiagonal() *
           path.states.block(1, 1, p, n);
  }
  return fit;
}

}  // namespace mortality
