#pragma once

// Latent seasonal process for one block pair: a random-walk bias plus
// zero-sum seasonal offsets, and the noisy density drawn from it.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sdsbm/error.hpp"
#include "sdsbm/rng.hpp"

namespace sdsbm {

/// Bias plus the d-1 most recent seasonal offsets, most recent first.
/// The offset d steps back is implied by the zero-sum constraint.
struct SeasonalState {
  double bias = 0.0;
  std::vector<double> offsets;  // size period() - 1

  int period() const { return static_cast<int>(offsets.size()) + 1; }

  /// (bias, offsets...) as one d-vector, the layout the state-space model uses.
  std::vector<double> as_vector() const {
    std::vector<double> v;
    v.reserve(offsets.size() + 1);
    v.push_back(bias);
    v.insert(v.end(), offsets.begin(), offsets.end());
    return v;
  }

  bool operator==(const SeasonalState&) const = default;
};

/// Variances of the bias step, the seasonal step and the density measurement.
struct NoiseParams {
  double q_m = 0.0;
  double q_s = 0.0;
  double r = 0.0;

  void validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    detail::require(ok(q_m), "q_m must be finite and >= 0");
    detail::require(ok(q_s), "q_s must be finite and >= 0");
    detail::require(ok(r), "r must be finite and >= 0");
  }

  bool operator==(const NoiseParams&) const = default;
};

inline constexpr double kZeroSumTolerance = 1e-9;

inline void validate(const SeasonalState& s) {
  detail::require(s.offsets.size() >= 1, "seasonal period must be >= 2");
  detail::require(std::isfinite(s.bias), "state bias is not finite");
  for (double o : s.offsets) detail::require(std::isfinite(o), "state offset is not finite");
}

/// Build a state from a full period of offsets. period_offsets[0] is the
/// offset at time 0; the one d-1 steps earlier is dropped.
inline SeasonalState init_state(double m0, std::span<const double> period_offsets) {
  detail::require(period_offsets.size() >= 2, "period must be >= 2");
  detail::require(std::isfinite(m0), "initial bias is not finite");
  const double sum = std::accumulate(period_offsets.begin(), period_offsets.end(), 0.0);
  if (!(std::abs(sum) <= kZeroSumTolerance)) {
    std::ostringstream os;
    os << "seasonal offsets must sum to zero (residual sum = " << sum << ")";
    throw ValidationError(os.str());
  }
  SeasonalState s;
  s.bias = m0;
  s.offsets.assign(period_offsets.begin(), period_offsets.end() - 1);
  validate(s);
  return s;
}

/// One transition. Draws exactly two normals (bias, seasonal) even when the
/// variances are zero so streams stay aligned across parameter settings.
inline SeasonalState step_state(const SeasonalState& state, const NoiseParams& noise, RngStream& rng) {
  const double bias_noise = rng.normal(0.0, noise.q_m);
  const double season_noise = rng.normal(0.0, noise.q_s);

  SeasonalState next;
  next.bias = state.bias + bias_noise;
  next.offsets.resize(state.offsets.size());
  const double sum = std::accumulate(state.offsets.begin(), state.offsets.end(), 0.0);
  next.offsets[0] = -sum + season_noise;
  std::copy(state.offsets.begin(), state.offsets.end() - 1, next.offsets.begin() + 1);
  return next;
}

inline double process_value(const SeasonalState& state) { return state.bias + state.offsets.front(); }

/// Noisy expected density, clamped to [0, 1]. One normal draw.
inline double sample_density(double c, double r, RngStream& rng) {
  detail::require(r >= 0.0, "density variance r must be >= 0");
  return std::clamp(rng.normal(c, r), 0.0, 1.0);
}

/// amplitude * sin(2 pi i / d), i = 0..d-1, with the mean removed.
inline std::vector<double> sine_offsets(int d, double amplitude) {
  detail::require(d >= 2, "period must be >= 2");
  detail::require(amplitude >= 0.0, "amplitude must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) out[i] = amplitude * std::sin(2.0 * std::numbers::pi * i / d);
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / d;
  for (double& v : out) v -= mean;
  return out;
}

/// The rounded period-8 sine used in the reference experiments.
inline std::vector<double> rounded_d8_offsets() { return {.2, .3, .2, 0., -.2, -.3, -.2, 0.}; }

/// Resolve an offsets preset name: "paper-d8", "sine" (exact sine at the given
/// period/amplitude), "zero", or a comma-separated list of reals.
inline std::vector<double> offsets_from_spec(std::string_view spec, int d, double amplitude) {
  if (spec == "paper-d8") {
    detail::require(d == 8, "offsets preset paper-d8 requires period 8");
    return rounded_d8_offsets();
  }
  if (spec == "sine") return sine_offsets(d, amplitude);
  if (spec == "zero") return std::vector<double>(static_cast<std::size_t>(d), 0.0);

  std::vector<double> out;
  std::string item;
  std::istringstream is{std::string(spec)};
  while (std::getline(is, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      detail::require(used == item.size(), "trailing characters");
    } catch (const std::exception&) {
      throw ValidationError("cannot parse offset value '" + item + "'");
    }
  }
  detail::require(static_cast<int>(out.size()) == d,
                  "offsets list has " + std::to_string(out.size()) + " entries, period is " + std::to_string(d));
  return out;
}

}  // namespace sdsbm
