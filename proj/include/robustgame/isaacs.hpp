#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "robustgame/hjbi.hpp"
#include "robustgame/random.hpp"
#include "robustgame/restricted.hpp"

namespace robustgame {

inline constexpr double kIsaacsTolerance = 1e-6;

/// Grids for comparing min over Gamma of max over pi of H with max-min.
struct IsaacsGrid {
  std::size_t t_points = 5;
  std::size_t r_points = 5;
  double r_lo = -0.05;
  double r_hi = 0.15;
  double t_end_margin = 0.01;
  std::size_t gamma_points = 101;  // per axis; n >= 3 draws `random_samples` points instead
  std::size_t pi_points = 101;     // per axis
  std::size_t random_samples = 10000;
  double pi_half_width = 5.0;
  double pi_shift = 0.0;           // moves the pi box away from the candidate
  bool include_candidate = true;   // add (pi*, eta*) to the grids
  DerivativeMode mode = DerivativeMode::finite_difference;
  std::uint64_t seed = 7;

  /// Defaults by dimension: 101 per axis for n = 1, 51^2 Gamma and 21^2 pi for n = 2.
  static IsaacsGrid for_dimension(std::size_t n) {
    IsaacsGrid g;
    if (n == 2) {
      g.gamma_points = 51;
      g.pi_points = 21;
    } else if (n >= 3) {
      g.random_samples = 2000;
      g.pi_points = 2000;
    }
    return g;
  }
};

struct IsaacsReport {
  IsaacsGrid grid;
  double max_gap = 0.0;        // max over (t, r) of |minmax - maxmin|
  double max_abs_value = 0.0;  // max over (t, r) of |minmax|
  std::size_t gamma_grid_size = 0;
  std::size_t pi_grid_size = 0;
  bool passed = false;
};

namespace detail {

inline std::vector<double> axis(double lo, double hi, std::size_t points) {
  if (points <= 1 || lo == hi) return {0.5 * (lo + hi)};
  return uniform_grid(lo, hi, points - 1);
}

inline std::vector<Vector> tensor_grid(const Vector& lo, const Vector& hi, std::size_t points) {
  std::vector<Vector> out{Vector(0)};
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    std::vector<Vector> next;
    for (const auto& prefix : out) {
      for (double v : axis(lo[j], hi[j], points)) {
        Vector p(prefix.size() + 1);
        p.head(prefix.size()) = prefix;
        p[prefix.size()] = v;
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

inline std::vector<Vector> random_box(const Vector& lo, const Vector& hi, std::size_t count,
                                      std::uint64_t seed, std::uint64_t stream) {
  random::NormalStream rng(seed, stream);
  std::vector<Vector> out;
  const auto n = lo.size();
  for (std::size_t i = 0; i < count; ++i) {
    Vector p(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      p[j] = lo[j] + (hi[j] - lo[j]) * rng.uniform(i * static_cast<std::uint64_t>(n) + j);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Upper vs lower Isaacs value of H over finite Gamma and pi grids at each (t, r).
inline IsaacsReport check_isaacs_equality(const MarketModel& m, const ScalarCurve& f,
                                          const ScalarCurve& g_restricted, const GammaSet& set,
                                          const IsaacsGrid& grid) {
  require_valid(m);
  SolutionPair sol;
  sol.f = f;
  sol.g = g_restricted;
  sol.quadrature_nodes = f.size() - 1;
  sol.constraint = set;

  const auto dim = static_cast<Eigen::Index>(m.n);
  const auto [glo, ghi] = set.bounds();
  std::vector<Vector> gamma_grid =
      m.n <= 2 ? detail::tensor_grid(glo, ghi, grid.gamma_points)
               : detail::random_box(glo, ghi, grid.random_samples, grid.seed, 1);
  for (auto& e : gamma_grid) e = set.project(e);

  IsaacsReport rep;
  rep.grid = grid;
  const double t_end = m.horizon * (1.0 - grid.t_end_margin);
  const auto ts = detail::axis(0.0, t_end, grid.t_points);
  const auto rs = detail::axis(grid.r_lo, grid.r_hi, grid.r_points);
  const Candidate candidate = saddle_candidate(m, sol);

  for (double t : ts) {
    const HTerms k = h_terms(m, sol, t, grid.mode);
    const StrategyPoint c = candidate(t);
    const Vector centre = c.pi + Vector::Constant(dim, grid.pi_shift);
    const Vector half = Vector::Constant(dim, grid.pi_half_width);
    std::vector<Vector> pi_grid =
        m.n <= 2 ? detail::tensor_grid(centre - half, centre + half, grid.pi_points)
                 : detail::random_box(centre - half, centre + half, grid.pi_points, grid.seed, 2);
    std::vector<Vector> etas = gamma_grid;
    if (grid.include_candidate) {
      pi_grid.push_back(c.pi);
      etas.push_back(c.eta);
    }
    rep.gamma_grid_size = etas.size();
    rep.pi_grid_size = pi_grid.size();

    for (double r : rs) {
      std::vector<double> row_max(etas.size(), -std::numeric_limits<double>::infinity());
      std::vector<double> col_min(pi_grid.size(), std::numeric_limits<double>::infinity());
      for (std::size_t i = 0; i < etas.size(); ++i) {
        for (std::size_t j = 0; j < pi_grid.size(); ++j) {
          const double h = h_evaluate(k, pi_grid[j], etas[i], r);
          row_max[i] = std::max(row_max[i], h);
          col_min[j] = std::min(col_min[j], h);
        }
      }
      const double upper = *std::min_element(row_max.begin(), row_max.end());
      const double lower = *std::max_element(col_min.begin(), col_min.end());
      rep.max_gap = std::max(rep.max_gap, std::abs(upper - lower));
      rep.max_abs_value = std::max(rep.max_abs_value, std::abs(upper));
    }
  }
  rep.passed = rep.max_gap < kIsaacsTolerance && rep.max_abs_value < kIsaacsTolerance;
  return rep;
}

}  // namespace robustgame
