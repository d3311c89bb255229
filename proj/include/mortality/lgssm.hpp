#pragma once

// Linear-Gaussian state-space engine: Kalman forward filter, one-step
// predictive log-likelihood, and forward-filtering-backward-sampling.
//
//   y_t   = alpha + B phi_t + eps_t,            eps_t   ~ N(0, s2 I)
//   phi_t = Lambda phi_{t-1} + Theta + omega_t, omega_t ~ N(0, Upsilon)
//
// Upsilon may be rank deficient. Rows of Lambda that deterministically copy
// one coordinate of the previous state (unit row, zero intercept, zero noise)
// are reproduced exactly in sampled paths.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mortality/errors.hpp"

namespace mortality {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct LinearGaussianSystem {
  VectorX<Scalar> obsIntercept;    // alpha, length p
  MatrixX<Scalar> obsMatrix;       // B, p x d
  Scalar obsNoiseVar = Scalar(1);  // sigma^2_eps
  MatrixX<Scalar> transMatrix;     // Lambda, d x d
  VectorX<Scalar> transIntercept;  // Theta, length d
  MatrixX<Scalar> transNoiseCov;   // Upsilon, d x d

  Eigen::Index stateDim() const { return transMatrix.rows(); }
  Eigen::Index obsDim() const { return obsMatrix.rows(); }
};

template <typename Scalar>
struct GaussianMoments {
  VectorX<Scalar> mean;
  MatrixX<Scalar> cov;
};

/// Moments produced by one Kalman recursion at time t.
template <typename Scalar>
struct FilterState {
  VectorX<Scalar> a;  // E[phi_t | y_{1:t-1}]
  MatrixX<Scalar> R;  // Var[phi_t | y_{1:t-1}]
  VectorX<Scalar> f;  // E[y_t | y_{1:t-1}]
  MatrixX<Scalar> Q;  // Var[y_t | y_{1:t-1}]
  VectorX<Scalar> m;  // E[phi_t | y_{1:t}]
  MatrixX<Scalar> C;  // Var[phi_t | y_{1:t}]
  Scalar logDensity = Scalar(0);  // ln N(y_t; f, Q)
};

template <typename Scalar>
struct FilterOutput {
  GaussianMoments<Scalar> initial;  // (m_0, C_0)
  std::vector<FilterState<Scalar>> perTime;  // t = 1..n
  Scalar logLikelihood = Scalar(0);
};

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& A) {
  A = (0.5 * (A + A.transpose())).eval();
}

namespace detail {

template <typename Scalar>
void checkSystem(const LinearGaussianSystem<Scalar>& sys) {
  const auto d = sys.stateDim();
  const auto p = sys.obsDim();
  if (sys.transMatrix.cols() != d || sys.transIntercept.size() != d ||
      sys.transNoiseCov.rows() != d || sys.transNoiseCov.cols() != d ||
      sys.obsMatrix.cols() != d || sys.obsIntercept.size() != p) {
    throw std::invalid_argument("state-space system has inconsistent sizes");
  }
  if (!(sys.obsNoiseVar > Scalar(0))) {
    throw std::invalid_argument("observation noise variance must be positive");
  }
}

// Index of the source coordinate for each deterministic copy row, or -1.
template <typename Scalar>
std::vector<Eigen::Index> copyRows(const LinearGaussianSystem<Scalar>& sys) {
  const auto d = sys.stateDim();
  std::vector<Eigen::Index> source(d, -1);
  for (Eigen::Index r = 0; r < d; ++r) {
    if (sys.transIntercept(r) != Scalar(0)) continue;
    if ((sys.transNoiseCov.row(r).array() != Scalar(0)).any()) continue;
    Eigen::Index hit = -1;
    bool unitRow = true;
    for (Eigen::Index c = 0; c < d && unitRow; ++c) {
      const Scalar v = sys.transMatrix(r, c);
      if (v == Scalar(0)) continue;
      if (v == Scalar(1) && hit < 0) {
        hit = c;
      } else {
        unitRow = false;
      }
    }
    if (unitRow && hit >= 0) source[r] = hit;
  }
  return source;
}

}  // namespace detail

/// Draws from N(mean, cov) for a symmetric positive semidefinite cov, using a
/// pivoted LDL^T factorisation with negative rounding pivots clamped to zero.
template <typename Scalar, typename URBG>
VectorX<Scalar> sample_gaussian(const VectorX<Scalar>& mean,
                                const MatrixX<Scalar>& cov, URBG& rng) {
  const auto d = mean.size();
  std::normal_distribution<Scalar> normal;
  VectorX<Scalar> z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
  Eigen::LDLT<MatrixX<Scalar>> ldlt(cov);
  VectorX<Scalar> w =
      ldlt.vectorD().cwiseMax(Scalar(0)).cwiseSqrt().cwiseProduct(z);
  VectorX<Scalar> lw = ldlt.matrixL() * w;
  return mean + (ldlt.transpositionsP().transpose() * lw);
}

/// One Kalman recursion from filtered moments at t-1 to filtered moments at t.
template <typename Scalar, typename DerivedY>
FilterState<Scalar> kalman_step(const GaussianMoments<Scalar>& prev,
                                 const LinearGaussianSystem<Scalar>& sys,
                                 const Eigen::MatrixBase<DerivedY>& y) {
  const auto p = sys.obsDim();
  if (y.size() != p || prev.mean.size() != sys.stateDim()) {
    throw std::invalid_argument("kalman_step: dimension mismatch");
  }
  FilterState<Scalar> s;
  s.a = sys.transMatrix * prev.mean + sys.transIntercept;
  s.R = sys.transMatrix * prev.cov * sys.transMatrix.transpose() +
        sys.transNoiseCov;
  symmetrize(s.R);

  s.f = sys.obsIntercept + sys.obsMatrix * s.a;
  const MatrixX<Scalar> BR = sys.obsMatrix * s.R;
  s.Q = BR * sys.obsMatrix.transpose();
  s.Q.diagonal().array() += sys.obsNoiseVar;
  symmetrize(s.Q);

  Eigen::LLT<MatrixX<Scalar>> llt(s.Q);
  if (llt.info() != Eigen::Success ||
      !(llt.matrixLLT().diagonal().minCoeff() > Scalar(0))) {
    throw NumericError("one-step predictive covariance Q_t is not positive "
                       "definite");
  }
  const VectorX<Scalar> v = y - s.f;
  const MatrixX<Scalar> QinvBR = llt.solve(BR);  // Q^{-1} B R
  s.m = s.a + QinvBR.transpose() * v;
  s.C = s.R - BR.transpose() * QinvBR;
  symmetrize(s.C);

  const VectorX<Scalar> white = llt.matrixL().solve(v);
  const Scalar logDet =
      Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
  s.logDensity =
      Scalar(-0.5) * (Scalar(p) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) +
                      logDet + white.squaredNorm());
  if (!std::isfinite(s.logDensity)) {
    throw NumericError("non-finite predictive log-density");
  }
  return s;
}

/// Runs the filter over the columns of `observations` (column j is y_{j+1}).
template <typename Scalar, typename DerivedY>
FilterOutput<Scalar> kalman_filter(const Eigen::MatrixBase<DerivedY>& observations,
                                   const LinearGaussianSystem<Scalar>& sys,
                                   const GaussianMoments<Scalar>& init) {
  detail::checkSystem(sys);
  if (observations.rows() != sys.obsDim()) {
    throw std::invalid_argument("observation rows do not match the system");
  }
  FilterOutput<Scalar> out;
  out.initial = init;
  out.perTime.reserve(observations.cols());
  const GaussianMoments<Scalar>* prev = &out.initial;
  GaussianMoments<Scalar> carry;
  for (Eigen::Index t = 0; t < observations.cols(); ++t) {
    try {
      out.perTime.push_back(kalman_step(*prev, sys, observations.col(t)));
    } catch (const NumericError& e) {
      throw NumericError("Kalman filter at t=" + std::to_string(t + 1) + ": " +
                         e.what());
    }
    const auto& s = out.perTime.back();
    out.logLikelihood += s.logDensity;
    carry.mean = s.m;
    carry.cov = s.C;
    prev = &carry;
  }
  return out;
}

/// Added to zero-variance diagonal entries of R_{t+1} before the backward
/// gain solve.
inline constexpr double kBackwardRegularization = 1e-12;

/// Draws phi_{0:n} from the joint smoothing distribution. Column t of the
/// result is phi_t.
template <typename Scalar, typename URBG>
MatrixX<Scalar> ffbs_sample(const FilterOutput<Scalar>& filter,
                            const LinearGaussianSystem<Scalar>& sys,
                            URBG& rng) {
  const auto d = sys.stateDim();
  const auto n = static_cast<Eigen::Index>(filter.perTime.size());
  if (n == 0) throw std::invalid_argument("ffbs_sample: empty filter output");
  const auto copies = detail::copyRows(sys);

  MatrixX<Scalar> path(d, n + 1);
  const auto& last = filter.perTime.back();
  path.col(n) = sample_gaussian<Scalar>(last.m, last.C, rng);

  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const VectorX<Scalar>& m =
        t == 0 ? filter.initial.mean : filter.perTime[t - 1].m;
    const MatrixX<Scalar>& C =
        t == 0 ? filter.initial.cov : filter.perTime[t - 1].C;
    const auto& next = filter.perTime[t];

    MatrixX<Scalar> R = next.R;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (R(i, i) <= Scalar(0)) R(i, i) += Scalar(kBackwardRegularization);
    }
    Eigen::LDLT<MatrixX<Scalar>> ldlt(R);
    const MatrixX<Scalar> LC = sys.transMatrix * C;
    const MatrixX<Scalar> gainT = ldlt.solve(LC);  // R^{-1} Lambda C
    if (!gainT.allFinite()) {
      throw NumericError("backward gain is not finite at t=" +
                         std::to_string(t));
    }
    const VectorX<Scalar> h =
        m + gainT.transpose() * (path.col(t + 1) - next.a);
    MatrixX<Scalar> H = C - gainT.transpose() * LC;
    symmetrize(H);
    path.col(t) = sample_gaussian<Scalar>(h, H, rng);
    for (Eigen::Index r = 0; r < d; ++r) {
      if (copies[r] >= 0) path(copies[r], t) = path(r, t + 1);
    }
  }
  return path;
}

}  // namespace mortality
