#pragma once

#include <cmath>
#include <utility>

namespace sdsbm {

/// Golden-section search for the maximum of a unimodal f on [a, b].
/// Stops once the bracket is narrower than `tol`; returns (x, f(x)) at the
/// bracket midpoint.
template <typename F>
std::pair<double, double> golden_section_maximize(F&& f, double a, double b, double tol, int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

}  // namespace sdsbm
