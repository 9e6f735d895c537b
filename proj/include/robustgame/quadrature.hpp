#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace robustgame::quadrature {

/// Single Simpson panel from endpoint and midpoint values.
inline double simpson(double lo_value, double mid_value, double hi_value, double width) {
  return width / 6.0 * (lo_value + 4.0 * mid_value + hi_value);
}

template <typename Fn>
double simpson(Fn&& fn, double lo, double hi) {
  return simpson(fn(lo), fn(0.5 * (lo + hi)), fn(hi), hi - lo);
}

/// Composite Simpson with `panels` panels on [lo, hi].
template <typename Fn>
double composite_simpson(Fn&& fn, double lo, double hi, std::size_t panels) {
  if (panels == 0) throw std::invalid_argument("composite_simpson: panels must be positive");
  const double h = (hi - lo) / static_cast<double>(panels);
  double sum = 0.0;
  double left = fn(lo);
  for (std::size_t i = 0; i < panels; ++i) {
    const double a = lo + static_cast<double>(i) * h;
    const double b = (i + 1 == panels) ? hi : a + h;
    const double right = fn(b);
    sum += simpson(left, fn(0.5 * (a + b)), right, b - a);
    left = right;
  }
  return sum;
}

/// Cubic (4-point Lagrange) estimate of the midpoint of interval [i, i+1] of
/// uniformly sampled nodal values. One-sided stencils at the two ends.
inline double cubic_midpoint(const std::vector<double>& v, std::size_t i) {
  const std::size_t n = v.size();
  if (n < 4 || i + 1 >= n) throw std::invalid_argument("cubic_midpoint: need >= 4 nodes");
  if (i == 0) return 0.3125 * v[0] + 0.9375 * v[1] - 0.3125 * v[2] + 0.0625 * v[3];
  if (i + 2 == n) {
    return 0.0625 * v[n - 4] - 0.3125 * v[n - 3] + 0.9375 * v[n - 2] + 0.3125 * v[n - 1];
  }
  return (-v[i - 1] + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) / 16.0;
}

}  // namespace robustgame::quadrature
