#pragma once

// State-space form of one block pair and exact linear-Gaussian inference:
//   x_t = G x_{t-1} + delta,   delta ~ N(0, diag(q_m, q_s, 0, ..., 0))
//   w_t = H x_t + eps,         eps   ~ N(0, R_t),  R_t = n E_t (1 - E_t) + n^2 r
// with x_t = (bias, s_t, s_{t-1}, ..., s_{t-d+2}) and H = (n, n, 0, ..., 0).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdsbm/error.hpp"

namespace sdsbm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Density estimates are kept in [kDensityFloor, 1 - kDensityFloor] when forming R_t.
inline constexpr double kDensityFloor = 1e-6;

/// Transition matrix: keeps the bias, writes the negated sum of the stored
/// offsets into slot 1 and shifts the older offsets down one slot.
inline Matrix build_G(int d) {
  detail::require(d >= 2, "period must be >= 2");
  Matrix G = Matrix::Zero(d, d);
  G(0, 0) = 1.0;
  for (int j = 1; j < d; ++j) G(1, j) = -1.0;
  for (int i = 2; i < d; ++i) G(i, i - 1) = 1.0;
  return G;
}

/// Observation row mapping the state to an expected edge count: n * (bias + s_t).
inline RowVector build_H(long n, int d) {
  detail::require(n >= 1, "n must be >= 1");
  detail::require(d >= 2, "period must be >= 2");
  RowVector H = RowVector::Zero(d);
  H(0) = static_cast<double>(n);
  H(1) = static_cast<double>(n);
  return H;
}

/// Binomial count variance plus the density measurement noise scaled to counts.
inline double obs_variance(long n, double E, double r) {
  const double nd = static_cast<double>(n);
  return nd * E * (1.0 - E) + nd * nd * r;
}

struct SsmParams {
  int d = 2;
  long n = 1;
  Matrix G;
  RowVector H;
  double q_m = 0.0;
  double q_s = 0.0;
  double r = 0.0;

  static SsmParams make(long n, int d, double q_m, double q_s, double r) {
    return {d, n, build_G(d), build_H(n, d), q_m, q_s, r};
  }

  Matrix Q() const {
    Matrix q = Matrix::Zero(d, d);
    q(0, 0) = q_m;
    q(1, 1) = q_s;
    return q;
  }
};

struct GaussianBelief {
  Vector mean;
  Matrix cov;
};

inline void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

/// Prior over x_0. By default the bias starts at the mean observed density of
/// the first period (offsets at 0, cov = I). `literal` gives mean = 1, cov = I.
inline GaussianBelief default_initial_belief(std::span<const long> counts, long n, int d, bool literal = false) {
  GaussianBelief b{Vector::Zero(d), Matrix::Identity(d, d)};
  if (literal) {
    b.mean.setOnes();
    return b;
  }
  const std::size_t m = std::min<std::size_t>(counts.size(), static_cast<std::size_t>(d));
  if (m > 0) {
    double sum = 0.0;
    for (std::size_t t = 0; t < m; ++t) sum += static_cast<double>(counts[t]);
    b.mean(0) = sum / (static_cast<double>(m) * static_cast<double>(n));
  }
  return b;
}

inline GaussianBelief predict(const GaussianBelief& belief, const SsmParams& p) {
  GaussianBelief out;
  out.mean = p.G * belief.mean;
  out.cov = p.G * belief.cov * p.G.transpose();
  out.cov(0, 0) += p.q_m;
  out.cov(1, 1) += p.q_s;
  symmetrize(out.cov);
  return out;
}

struct UpdateResult {
  GaussianBelief belief;
  double loglik_term = 0.0;
  double innovation = 0.0;
  double innovation_var = 0.0;
};

/// Condition the predicted belief on one count with observation variance R_t.
inline UpdateResult update(const GaussianBelief& pred, long w, const SsmParams& p, double R_t) {
  UpdateResult res;
  const Vector PHt = pred.cov * p.H.transpose();
  res.innovation = static_cast<double>(w) - p.H.dot(pred.mean);
  res.innovation_var = p.H.dot(PHt) + R_t;
  if (!(res.innovation_var > 0.0) || !std::isfinite(res.innovation_var))
    throw NumericalError("innovation variance is not positive (S = " + std::to_string(res.innovation_var) + ")");

  const Vector K = PHt / res.innovation_var;
  res.belief.mean = pred.mean + K * res.innovation;
  res.belief.cov = pred.cov - K * PHt.transpose();  // (I - K H) P
  symmetrize(res.belief.cov);
  res.loglik_term = -0.5 * (std::log(2.0 * std::numbers::pi * res.innovation_var) +
                            res.innovation * res.innovation / res.innovation_var);
  return res;
}

struct FilterStep {
  GaussianBelief predicted;  // t | t-1
  GaussianBelief filtered;   // t | t
  double innovation = 0.0;
  double innovation_var = 0.0;
  double density_estimate = 0.0;
  double obs_var = 0.0;
  double loglik_term = 0.0;
};

struct FilterOutput {
  GaussianBelief initial;  // x_0 prior
  std::vector<FilterStep> steps;
  double loglik = 0.0;
};

/// Forward pass. R_t comes from the one-step-ahead density estimate
/// clamp(H mean_{t|t-1} / n, eps, 1 - eps).
inline FilterOutput filter(std::span<const long> counts, const SsmParams& p, const GaussianBelief& init) {
  detail::require(!counts.empty(), "filter needs at least one observation");
  detail::require(init.mean.size() == p.d && init.cov.rows() == p.d && init.cov.cols() == p.d,
                  "initial belief dimension differs from d");
  FilterOutput out;
  out.initial = init;
  out.steps.reserve(counts.size());
  const double nd = static_cast<double>(p.n);

  const GaussianBelief* prev = &out.initial;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    FilterStep step;
    step.predicted = predict(*prev, p);
    step.density_estimate = std::clamp(p.H.dot(step.predicted.mean) / nd, kDensityFloor, 1.0 - kDensityFloor);
    step.obs_var = obs_variance(p.n, step.density_estimate, p.r);
    UpdateResult u;
    try {
      u = update(step.predicted, counts[t], p, step.obs_var);
    } catch (const NumericalError& e) {
      throw NumericalError("filter step t = " + std::to_string(t + 1) + ": " + e.what());
    }
    step.filtered = std::move(u.belief);
    step.innovation = u.innovation;
    step.innovation_var = u.innovation_var;
    step.loglik_term = u.loglik_term;
    out.loglik += u.loglik_term;
    out.steps.push_back(std::move(step));
    prev = &out.steps.back().filtered;
  }
  return out;
}

struct SmootherOutput {
  GaussianBelief initial;                // x_0 | 1..T
  std::vector<GaussianBelief> smoothed;  // x_t | 1..T, t = 1..T
  /// lag_one[i] = Cov(x_{i+1}, x_i | 1..T); i = 0 pairs x_1 with x_0.
  std::vector<Matrix> lag_one;
};

namespace kalman_detail {

/// Solve P X = B for symmetric PSD P, retrying once with diagonal jitter.
inline Matrix psd_solve(const Matrix& P, const Matrix& B, std::size_t t) {
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() == Eigen::Success) return llt.solve(B);
  const double jitter = 1e-10 * P.trace() / static_cast<double>(P.rows());
  Matrix Pj = P;
  Pj.diagonal().array() += std::max(jitter, 1e-300);
  llt.compute(Pj);
  if (llt.info() != Eigen::Success)
    throw NumericalError("smoother: one-step covariance at t = " + std::to_string(t) + " is singular");
  return llt.solve(B);
}

}  // namespace kalman_detail

/// Rauch-Tung-Striebel backward pass with lag-one cross covariances.
inline SmootherOutput smooth(const FilterOutput& fo, const SsmParams& p) {
  const std::size_t T = fo.steps.size();
  detail::require(T >= 1, "smoother needs a non-empty filter output");
  SmootherOutput out;
  out.smoothed.resize(T);
  out.lag_one.resize(T);
  out.smoothed[T - 1] = fo.steps[T - 1].filtered;

  // Gain J_i for the transition x_i -> x_{i+1}, i = 0..T-1 (i = 0 is the prior).
  auto gain = [&](std::size_t i) -> Matrix {
    const GaussianBelief& f = i == 0 ? fo.initial : fo.steps[i - 1].filtered;
    // J = C G' P^-1  <=>  J' = P^-1 G C
    return kalman_detail::psd_solve(fo.steps[i].predicted.cov, p.G * f.cov, i + 1).transpose();
  };

  std::vector<Matrix> J(T);
  for (std::size_t i = 0; i < T; ++i) J[i] = gain(i);

  for (std::size_t s = T - 1; s-- > 0;) {
    // x_{s+1} given all data, from x_{s+2}.
    const FilterStep& here = fo.steps[s];
    const FilterStep& next = fo.steps[s + 1];
    const Matrix& Js = J[s + 1];
    GaussianBelief& sm = out.smoothed[s];
    sm.mean = here.filtered.mean + Js * (out.smoothed[s + 1].mean - next.predicted.mean);
    sm.cov = here.filtered.cov + Js * (out.smoothed[s + 1].cov - next.predicted.cov) * Js.transpose();
    symmetrize(sm.cov);
  }
  {
    const Matrix& J0 = J[0];
    out.initial.mean = fo.initial.mean + J0 * (out.smoothed[0].mean - fo.steps[0].predicted.mean);
    out.initial.cov = fo.initial.cov + J0 * (out.smoothed[0].cov - fo.steps[0].predicted.cov) * J0.transpose();
    symmetrize(out.initial.cov);
  }
  for (std::size_t i = 0; i < T; ++i) out.lag_one[i] = out.smoothed[i].cov * J[i].transpose();
  return out;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace sdsbm
