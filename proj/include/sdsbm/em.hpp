#pragma once

// EM learning of the noise parameters of one block pair.
//
// E-step: Kalman filter + RTS smoother under the current (q_m, q_s, r).
// M-step: q_m, q_s in closed form from smoothed second moments; r by a
// one-dimensional search over ln r of the expected complete-data
// log-likelihood, with R_t built from the filter's density estimates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdsbm/error.hpp"
#include "sdsbm/golden_section.hpp"
#include "sdsbm/kalman.hpp"
#include "sdsbm/network.hpp"
#include "sdsbm/parallel.hpp"

namespace sdsbm {

inline constexpr double kVarianceFloor = 1e-12;

/// Smoothed second moments E[x_t x_t'] and E[x_t x_{t-1}'], t = 1..T.
/// cross[0] pairs x_1 with x_0.
struct SecondMoments {
  std::vector<Matrix> outer;
  std::vector<Matrix> cross;
  Matrix initial_outer;  // E[x_0 x_0']
};

inline SecondMoments expected_sufficient_stats(const SmootherOutput& sm) {
  const std::size_t T = sm.smoothed.size();
  SecondMoments st;
  st.outer.resize(T);
  st.cross.resize(T);
  st.initial_outer = sm.initial.cov + sm.initial.mean * sm.initial.mean.transpose();
  for (std::size_t i = 0; i < T; ++i) {
    const Vector& m = sm.smoothed[i].mean;
    const Vector& m_prev = i == 0 ? sm.initial.mean : sm.smoothed[i - 1].mean;
    st.outer[i] = sm.smoothed[i].cov + m * m.transpose();
    st.cross[i] = sm.lag_one[i] + m * m_prev.transpose();
  }
  return st;
}

/// Expected squared transition residuals averaged over t = 2..T.
/// Only the (0,0) and (1,1) entries are kept since Q is diagonal with two free entries.
inline std::pair<double, double> update_Q(const SecondMoments& st, const Matrix& G) {
  const std::size_t T = st.outer.size();
  detail::require(T >= 2, "Q update needs T >= 2");
  double sum_m = 0.0, sum_s = 0.0;
  for (std::size_t i = 1; i < T; ++i) {
    const Matrix GC = G * st.cross[i].transpose();  // G E[x_{t-1} x_t']
    const Matrix M = st.outer[i] - GC - GC.transpose() + G * st.outer[i - 1] * G.transpose();
    sum_m += M(0, 0);
    sum_s += M(1, 1);
  }
  const double denom = static_cast<double>(T - 1);
  auto floor = [](double v) { return std::isfinite(v) ? std::max(v, kVarianceFloor) : kVarianceFloor; };
  return {floor(sum_m / denom), floor(sum_s / denom)};
}

struct RBracket {
  double lo = 1e-12;
  double hi = 1.0;
};

struct ROptimum {
  double r = 0.0;
  double objective = 0.0;
  bool at_boundary = false;
};

/// sum_t -1/2 ln(2 pi R_t) - u_t / (2 R_t) with R_t = base_t + n^2 r.
inline double r_objective(double r, std::span<const double> base_var, std::span<const double> resid2, long n) {
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  double ll = 0.0;
  for (std::size_t t = 0; t < base_var.size(); ++t) {
    const double R = base_var[t] + n2 * r;
    ll += -0.5 * std::log(2.0 * std::numbers::pi * R) - resid2[t] / (2.0 * R);
  }
  return ll;
}

inline constexpr int kRGridPoints = 17;
inline constexpr double kRLogTolerance = 1e-9;

/// Maximize r_objective over the bracket: 17-point grid in ln r, then
/// golden-section refinement around the best grid point.
inline ROptimum optimize_r(std::span<const double> base_var, std::span<const double> resid2, long n,
                           RBracket bracket = {}) {
  detail::require(bracket.lo > 0.0 && bracket.lo < bracket.hi, "r bracket must satisfy 0 < lo < hi");
  detail::require(base_var.size() == resid2.size() && !base_var.empty(), "r search needs matching non-empty series");

  const double a = std::log(bracket.lo), b = std::log(bracket.hi);
  auto f = [&](double log_r) {
    const double v = r_objective(std::exp(log_r), base_var, resid2, n);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };

  std::vector<double> grid(kRGridPoints);
  int best = -1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kRGridPoints; ++i) {
    grid[i] = a + (b - a) * i / (kRGridPoints - 1);
    const double v = f(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best < 0) throw NumericalError("r objective is not finite anywhere in the bracket");

  const double lo = grid[std::max(best - 1, 0)];
  const double hi = grid[std::min(best + 1, kRGridPoints - 1)];
  auto [x, fx] = golden_section_maximize(f, lo, hi, kRLogTolerance);

  ROptimum out{std::exp(x), fx, false};
  // Pin to the edge when the refined optimum runs into the bracket boundary.
  for (double edge : {a, b}) {
    const double fe = f(edge);
    if (std::abs(x - edge) < 1e-4 && fe >= fx) out = {edge == a ? bracket.lo : bracket.hi, fe, true};
  }
  return out;
}

/// r search fed from a smoother pass: u_t = (w_t - H m_{t|T})^2 + H P_{t|T} H'
/// and base_t = n E_t (1 - E_t) from the filter's density estimates.
inline ROptimum optimize_r(const SmootherOutput& sm, std::span<const long> counts, const SsmParams& p,
                           std::span<const double> density_estimates, RBracket bracket = {}) {
  const std::size_t T = counts.size();
  detail::require(sm.smoothed.size() == T && density_estimates.size() == T, "r search inputs differ in length");
  std::vector<double> base(T), resid2(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double E = density_estimates[t];
    detail::require(E > 0.0 && E < 1.0, "density estimates must lie in (0, 1)");
    base[t] = obs_variance(p.n, E, 0.0);
    const double e = static_cast<double>(counts[t]) - p.H.dot(sm.smoothed[t].mean);
    resid2[t] = e * e + p.H.dot(sm.smoothed[t].cov * p.H.transpose());
  }
  return optimize_r(base, resid2, p.n, bracket);
}

struct FitConfig {
  int d = 8;
  long n = 1000;
  std::optional<GaussianBelief> init;  // empty: default_initial_belief from the data
  bool literal_init = false;
  double q_m = 1e-4;
  double q_s = 1e-4;
  double r = 1e-2;
  int max_iters = 200;
  double loglik_rel_tol = 1e-6;
  RBracket r_bracket;

  void validate() const {
    detail::require(d >= 2, "period must be >= 2");
    detail::require(n >= 1, "n must be >= 1");
    detail::require(max_iters >= 1, "max_iters must be >= 1");
    detail::require(loglik_rel_tol > 0.0, "loglik tolerance must be > 0");
    detail::require(r_bracket.lo > 0.0 && r_bracket.lo < r_bracket.hi, "r bracket must satisfy 0 < lo < hi");
    for (double v : {q_m, q_s, r}) detail::require(std::isfinite(v) && v >= 0.0, "initial variances must be >= 0");
  }
};

struct IterationRecord {
  double q_m = 0.0;
  double q_s = 0.0;
  double r = 0.0;
  double loglik = 0.0;
};

struct FitResult {
  double q_m = 0.0;
  double q_s = 0.0;
  double r = 0.0;
  std::vector<IterationRecord> trace;
  FilterOutput filtered;     // final E-step, under (q_m, q_s, r)
  SmootherOutput smoothed;
  bool converged = false;
  int iterations = 0;
  bool r_at_boundary = false;

  std::vector<double> density_estimates() const {
    std::vector<double> out;
    out.reserve(filtered.steps.size());
    for (const auto& s : filtered.steps) out.push_back(s.density_estimate);
    return out;
  }
  std::vector<Vector> smoothed_means() const {
    std::vector<Vector> out;
    out.reserve(smoothed.smoothed.size());
    for (const auto& b : smoothed.smoothed) out.push_back(b.mean);
    return out;
  }
};

/// EM to convergence of the observed-data log-likelihood. Every trace entry
/// holds the parameters an E-step ran with and the log-likelihood it produced;
/// the returned parameters are those of the last entry.
inline FitResult em_fit(std::span<const long> counts, const FitConfig& cfg) {
  cfg.validate();
  detail::require(counts.size() >= 2, "EM needs at least two observations (T >= 2)");
  for (long w : counts) detail::require(w >= 0 && w <= cfg.n, "count outside [0, n]");
  const GaussianBelief init = cfg.init ? *cfg.init : default_initial_belief(counts, cfg.n, cfg.d, cfg.literal_init);

  SsmParams p = SsmParams::make(cfg.n, cfg.d, cfg.q_m, cfg.q_s, cfg.r);
  FitResult res;
  double prev_ll = 0.0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    try {
      res.filtered = filter(counts, p, init);
      res.smoothed = smooth(res.filtered, p);
    } catch (const NumericalError& e) {
      throw NumericalError("EM iteration " + std::to_string(it) + ": " + e.what());
    }
    const double ll = res.filtered.loglik;
    if (!std::isfinite(ll)) throw NumericalError("EM iteration " + std::to_string(it) + ": log-likelihood not finite");
    res.trace.push_back({p.q_m, p.q_s, p.r, ll});
    res.q_m = p.q_m;
    res.q_s = p.q_s;
    res.r = p.r;
    res.iterations = it;
    if (it > 1 && std::abs(ll - prev_ll) / std::max(1.0, std::abs(ll)) < cfg.loglik_rel_tol) {
      res.converged = true;
      break;
    }
    prev_ll = ll;
    if (it == cfg.max_iters) break;

    try {
      const auto [qm, qs] = update_Q(expected_sufficient_stats(res.smoothed), p.G);
      const auto ropt = optimize_r(res.smoothed, counts, p, res.density_estimates(), cfg.r_bracket);
      p.q_m = qm;
      p.q_s = qs;
      p.r = ropt.r;
      res.r_at_boundary = ropt.at_boundary;
    } catch (const NumericalError& e) {
      throw NumericalError("EM iteration " + std::to_string(it) + ": " + e.what());
    }
  }
  return res;
}

struct BlockFit {
  BlockPair pair;
  long n = 0;
  std::optional<FitResult> result;
  std::string error;          // set when result is empty
  bool numerical_failure = false;
};

/// Independent EM per block. `base.n` is replaced by each block's n; a
/// block's failure is recorded in its entry and does not stop the others.
inline std::vector<BlockFit> fit_network(const DynamicNetwork& net, const FitConfig& base,
                                         unsigned threads = thread_count()) {
  std::vector<BlockFit> fits(net.blocks.size());
  parallel_for(
      net.blocks.size(),
      [&](std::size_t i) {
        const BlockSeries& b = net.blocks[i];
        fits[i].pair = b.pair;
        fits[i].n = b.n;
        FitConfig cfg = base;
        cfg.n = b.n;
        try {
          fits[i].result = em_fit(b.counts, cfg);
        } catch (const NumericalError& e) {
          fits[i].error = e.what();
          fits[i].numerical_failure = true;
        } catch (const std::exception& e) {
          fits[i].error = e.what();
        }
      },
      threads);
  std::sort(fits.begin(), fits.end(), [](const BlockFit& x, const BlockFit& y) { return x.pair < y.pair; });
  return fits;
}

}  // namespace sdsbm
