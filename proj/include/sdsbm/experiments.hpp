#pragma once

// Synthetic experiments: single-network recovery, MSE versus number of
// observed periods, MSE versus density noise r. Fits only ever see counts;
// the truth record is read when scoring.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sdsbm/em.hpp"
#include "sdsbm/network.hpp"
#include "sdsbm/parallel.hpp"

namespace sdsbm {

/// Mean over all t and all components of the squared difference.
inline double mse_states(const std::vector<std::vector<double>>& truth, const std::vector<std::vector<double>>& est) {
  detail::require(truth.size() == est.size(), "MSE inputs differ in length (" + std::to_string(truth.size()) +
                                                  " vs " + std::to_string(est.size()) + ")");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    detail::require(truth[t].size() == est[t].size(), "MSE inputs differ in dimension at t = " + std::to_string(t + 1));
    for (std::size_t j = 0; j < truth[t].size(); ++j) {
      const double e = truth[t][j] - est[t][j];
      sum += e * e;
    }
    count += truth[t].size();
  }
  detail::require(count > 0, "MSE of empty sequences");
  return sum / static_cast<double>(count);
}

inline std::vector<std::vector<double>> to_rows(const std::vector<Vector>& v) {
  std::vector<std::vector<double>> out;
  out.reserve(v.size());
  for (const Vector& x : v) out.emplace_back(x.data(), x.data() + x.size());
  return out;
}

/// Reference configuration: k = 3, n = 1000 per block, d = 8, m0 = 0.5,
/// rounded sine offsets, q_m = q_s = 1e-8, r = 5.5e-3, T = 10 d.
inline NetworkConfig reference_config(std::uint64_t seed = 0) {
  NetworkConfig cfg;
  cfg.k = 3;
  cfg.d = 8;
  cfg.T = 80;
  cfg.seed = seed;
  cfg.gen.m0 = 0.5;
  cfg.gen.period_offsets = rounded_d8_offsets();
  cfg.gen.noise = {1e-8, 1e-8, 5.5e-3};
  cfg.gen.block_n = 1000;
  return cfg;
}

inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Recovery

struct RecoveryRow {
  int t = 1;
  double truth = 0.0;     // n c_t
  double observed = 0.0;  // w_t
  double estimate = 0.0;  // H m_{t|t}
  double lo95 = 0.0;
  double hi95 = 0.0;
};

struct RecoveryResult {
  BlockPair block;
  std::vector<RecoveryRow> rows;
  FitResult fit;

  /// Share of steps after the first period whose truth lies inside the band.
  double coverage_after_first_period(int d) const {
    int inside = 0, total = 0;
    for (const auto& row : rows) {
      if (row.t <= d) continue;
      ++total;
      inside += (row.truth >= row.lo95 && row.truth <= row.hi95) ? 1 : 0;
    }
    return total ? static_cast<double>(inside) / total : 0.0;
  }
};

inline RecoveryResult recovery_from_network(const DynamicNetwork& net, BlockPair block, const FitConfig& base) {
  detail::require(net.truth.has_value(), "recovery experiment needs a network with a truth record");
  auto it = std::find_if(net.blocks.begin(), net.blocks.end(), [&](const BlockSeries& b) { return b.pair == block; });
  detail::require(it != net.blocks.end(), "block " + block.str() + " not present in network");

  FitConfig cfg = base;
  cfg.n = it->n;
  cfg.d = net.meta.d;
  RecoveryResult res{block, {}, em_fit(it->counts, cfg)};

  const BlockTruth& truth = net.truth->at(block);
  const RowVector H = build_H(it->n, net.meta.d);
  for (std::size_t t = 0; t < it->counts.size(); ++t) {
    const GaussianBelief& f = res.fit.filtered.steps[t].filtered;
    const double est = H.dot(f.mean);
    const double sd = std::sqrt(std::max(0.0, H.dot(f.cov * H.transpose())));
    const auto& x = truth.states[t];
    res.rows.push_back({static_cast<int>(t) + 1, static_cast<double>(it->n) * (x[0] + x[1]),
                        static_cast<double>(it->counts[t]), est, est - 1.96 * sd, est + 1.96 * sd});
  }
  return res;
}

inline RecoveryResult run_recovery(const NetworkConfig& net_cfg, BlockPair block, const FitConfig& fit_cfg) {
  return recovery_from_network(generate(net_cfg), block, fit_cfg);
}

inline void write_recovery_csv(const RecoveryResult& res, std::ostream& os) {
  os << "t,truth,observed,estimate,lo95,hi95\n";
  for (const auto& r : res.rows)
    os << r.t << ',' << format_real(r.truth) << ',' << format_real(r.observed) << ',' << format_real(r.estimate) << ','
       << format_real(r.lo95) << ',' << format_real(r.hi95) << '\n';
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepKind { Periods, Noise };

struct ExperimentSpec {
  SweepKind kind = SweepKind::Periods;
  NetworkConfig base = reference_config();
  FitConfig fit;
  std::vector<std::uint64_t> seeds;
  std::vector<double> sweep_values;  // period multiples or r values

  void validate() const {
    detail::require(!seeds.empty(), "experiment needs at least one seed");
    detail::require(!sweep_values.empty(), "experiment needs at least one sweep value");
    for (std::size_t i = 1; i < sweep_values.size(); ++i)
      detail::require(sweep_values[i] > sweep_values[i - 1], "sweep values must be strictly increasing");
    if (kind == SweepKind::Periods) {
      for (double m : sweep_values)
        detail::require(m >= 1 && m == std::floor(m), "period multiples must be positive integers");
    } else {
      for (double r : sweep_values) detail::require(r >= 0.0 && std::isfinite(r), "r values must be >= 0");
    }
  }
};

inline std::vector<double> default_period_multiples() { return {2, 3, 4, 5, 6, 7, 8, 9, 10}; }
inline std::vector<double> default_noise_grid() { return {5e-4, 1e-3, 5e-3, 1e-2, 5e-2}; }

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
  return s;
}

struct MetricRow {
  BlockPair block;
  double sweep_value = 0.0;
  std::optional<std::uint64_t> seed;  // empty: seed-averaged row
  double mse = 0.0;
};

struct SweepResult {
  SweepKind kind = SweepKind::Periods;
  std::vector<double> sweep_values;
  std::vector<MetricRow> rows;  // per block and value: seed rows ascending, then the average row

  /// Seed-averaged MSE per block, aligned with sweep_values.
  std::map<BlockPair, std::vector<double>> averages() const {
    std::map<BlockPair, std::vector<double>> out;
    for (const auto& r : rows)
      if (!r.seed) out[r.block].push_back(r.mse);
    return out;
  }
};

/// Network for one sweep cell. Period sweeps vary T = multiple * d; noise
/// sweeps vary r at the base T.
inline NetworkConfig sweep_cell_config(const ExperimentSpec& spec, double value, std::uint64_t seed) {
  NetworkConfig cfg = spec.base;
  cfg.seed = seed;
  if (spec.kind == SweepKind::Periods) {
    cfg.T = static_cast<int>(value) * cfg.d;
  } else {
    cfg.gen.noise.r = value;
    for (auto& b : cfg.blocks) b.noise.r = value;
  }
  return cfg;
}

/// Per-block MSE between true states and smoothed means for one network.
inline std::vector<std::pair<BlockPair, double>> score_network(const DynamicNetwork& net, const FitConfig& base) {
  detail::require(net.truth.has_value(), "scoring needs a truth record");
  const auto fits = fit_network(net, base, 1);
  std::vector<std::pair<BlockPair, double>> out;
  for (const BlockFit& f : fits) {
    if (!f.result) {
      const std::string msg = "block " + f.pair.str() + ": " + f.error;
      if (f.numerical_failure) throw NumericalError(msg);
      throw ValidationError(msg);
    }
    const double mse = mse_states(net.truth->at(f.pair).states, to_rows(f.result->smoothed_means()));
    if (!std::isfinite(mse) || mse < 0.0) throw NumericalError("block " + f.pair.str() + ": MSE is not finite");
    out.emplace_back(f.pair, mse);
  }
  return out;
}

inline SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t nv = spec.sweep_values.size(), ns = spec.seeds.size();
  std::vector<std::vector<std::pair<BlockPair, double>>> cells(nv * ns);
  parallel_for(cells.size(), [&](std::size_t c) {
    const double value = spec.sweep_values[c / ns];
    const std::uint64_t seed = spec.seeds[c % ns];
    FitConfig fit = spec.fit;
    fit.d = spec.base.d;
    cells[c] = score_network(generate(sweep_cell_config(spec, value, seed)), fit);
  });

  // block -> value index -> (seed, mse)
  std::map<BlockPair, std::vector<std::vector<std::pair<std::uint64_t, double>>>> by_block;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (const auto& [pair, mse] : cells[c]) {
      auto& slot = by_block[pair];
      slot.resize(nv);
      slot[c / ns].emplace_back(spec.seeds[c % ns], mse);
    }
  }

  SweepResult res{spec.kind, spec.sweep_values, {}};
  for (auto& [pair, per_value] : by_block) {
    for (std::size_t v = 0; v < nv; ++v) {
      auto& entries = per_value[v];
      std::sort(entries.begin(), entries.end());
      double sum = 0.0;
      for (const auto& [seed, mse] : entries) {
        res.rows.push_back({pair, spec.sweep_values[v], seed, mse});
        sum += mse;
      }
      res.rows.push_back({pair, spec.sweep_values[v], std::nullopt, sum / static_cast<double>(entries.size())});
    }
  }
  return res;
}

inline SweepResult run_period_sweep(ExperimentSpec spec) {
  spec.kind = SweepKind::Periods;
  return run_sweep(spec);
}

inline SweepResult run_noise_sweep(ExperimentSpec spec) {
  spec.kind = SweepKind::Noise;
  return run_sweep(spec);
}

inline void write_sweep_csv(const SweepResult& res, std::ostream& os) {
  os << "block_a,block_b,sweep_value,seed,mse\n";
  for (const auto& r : res.rows) {
    os << r.block.a << ',' << r.block.b << ',' << format_real(r.sweep_value) << ',';
    if (r.seed)
      os << *r.seed;
    else
      os << "avg";
    os << ',' << format_real(r.mse) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Trend summaries over seed-averaged curves

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "correlation needs two equal-length series of >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Least-squares slope of y on x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "slope needs two equal-length series of >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

struct TrendCheck {
  BlockPair block;
  double statistic = 0.0;  // Pearson r (periods) or ln-ln slope (noise)
  bool monotone = true;    // noise sweeps only
  bool pass = false;
};

/// Periods: Pearson(periods, avg MSE) <= max_corr.
inline std::vector<TrendCheck> check_period_trend(const SweepResult& res, double max_corr = -0.8) {
  std::vector<TrendCheck> out;
  for (const auto& [pair, avg] : res.averages()) {
    TrendCheck c{pair};
    c.statistic = pearson(res.sweep_values, avg);
    c.pass = c.statistic <= max_corr;
    out.push_back(c);
  }
  return out;
}

/// Noise: avg MSE strictly increasing in r and ln-ln slope > min_slope.
inline std::vector<TrendCheck> check_noise_trend(const SweepResult& res, double min_slope = 0.0) {
  std::vector<TrendCheck> out;
  std::vector<double> lx;
  for (double r : res.sweep_values) lx.push_back(std::log(r));
  for (const auto& [pair, avg] : res.averages()) {
    TrendCheck c{pair};
    std::vector<double> ly;
    for (double m : avg) ly.push_back(std::log(m));
    c.monotone = strictly_increasing(avg);
    c.statistic = ls_slope(lx, ly);
    c.pass = c.monotone && c.statistic > min_slope;
    out.push_back(c);
  }
  return out;
}

}  // namespace sdsbm
