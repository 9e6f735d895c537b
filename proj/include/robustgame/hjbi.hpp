#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "robustgame/closedform.hpp"
#include "robustgame/model.hpp"
#include "robustgame/restricted.hpp"

namespace robustgame {

/// How f' and g' enter H: from the ODE right-hand sides, or by finite
/// differences of the solved curves.
enum class DerivativeMode { exact, finite_difference };

struct HQuery {
  Vector pi;
  Vector eta;
  double r = 0.0;
  double t = 0.0;
};

struct HValue {
  double value = 0.0;
  bool one_sided = false;  // a boundary node needed a one-sided difference
};

/// Everything H needs at a fixed t.
struct HTerms {
  double t = 0.0;
  double gamma = 0.5;
  double f = 0.0;
  double f_prime = 0.0;
  double g_prime = 0.0;
  double b = 0.0;
  double kappa = 0.0;
  Vector a;
  Vector lambda;
  Matrix sigma;
  bool one_sided = false;
};

namespace detail {

struct GridDerivative {
  double value;
  bool one_sided;
};

// Derivative of a uniformly sampled curve: central differences at interior
// nodes, second-order one-sided at the ends, linear in between nodes.
inline GridDerivative grid_derivative(const ScalarCurve& c, double t) {
  const auto& ts = c.times();
  const auto& vs = c.values();
  const std::size_t n = ts.size() - 1;
  if (n < 2) throw std::invalid_argument("grid_derivative: need at least 3 nodes");
  const double h = ts[1] - ts[0];
  auto at_node = [&](std::size_t i) {
    if (i == 0) return (-3.0 * vs[0] + 4.0 * vs[1] - vs[2]) / (2.0 * h);
    if (i == n) return (3.0 * vs[n] - 4.0 * vs[n - 1] + vs[n - 2]) / (2.0 * h);
    return (vs[i + 1] - vs[i - 1]) / (2.0 * h);
  };
  const double T = ts.back();
  if (!(t >= 0.0) || t > T + horizon_slack(T)) {
    throw DomainError("grid_derivative: t outside the curve's range");
  }
  t = std::min(t, T);
  std::size_t i = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
  if (i == n || ts[i] == t) return {at_node(i), i == 0 || i == n};
  const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
  return {(1.0 - w) * at_node(i) + w * at_node(i + 1), i == 0 || i + 1 == n};
}

}  // namespace detail

inline HTerms h_terms(const MarketModel& m, const SolutionPair& sol, double t,
                      DerivativeMode mode = DerivativeMode::exact) {
  HTerms k;
  k.t = t;
  k.gamma = m.gamma;
  k.f = sol.f(t);
  k.b = m.b(t);
  k.kappa = m.kappa(t);
  k.a = m.a(t);
  k.lambda = m.lambda(t);
  k.sigma = m.sigma(t);
  if (mode == DerivativeMode::exact) {
    k.f_prime = k.kappa * k.f - m.gamma;
    k.g_prime = sol.constraint ? -restricted_g_integrand(m, k.f, t, *sol.constraint)
                               : -g_integrand(m, k.f, t);
  } else {
    const auto fd = detail::grid_derivative(sol.f, t);
    const auto gd = detail::grid_derivative(sol.g, t);
    k.f_prime = fd.value;
    k.g_prime = gd.value;
    k.one_sided = fd.one_sided || gd.one_sided;
  }
  return k;
}

/// H^{(pi,eta)}(r, t): the HJBI operator applied to the ansatz V, divided by V.
inline double h_evaluate(const HTerms& k, const Vector& pi, const Vector& eta, double r) {
  const double g = k.gamma;
  const Vector v = k.sigma.transpose() * pi;  // row vector pi Sigma
  return k.f_prime * r + k.g_prime + 0.5 * k.a.squaredNorm() * k.f * k.f +
         0.5 * g * (g - 1.0) * v.squaredNorm() + g * k.f * v.dot(k.a) +
         g * v.dot(k.lambda + eta) + k.f * eta.dot(k.a) + (k.b - k.kappa * r) * k.f + g * r;
}

inline HValue h_value(const MarketModel& m, const SolutionPair& sol, const HQuery& q,
                      DerivativeMode mode = DerivativeMode::exact) {
  const HTerms k = h_terms(m, sol, q.t, mode);
  return {h_evaluate(k, q.pi, q.eta, q.r), k.one_sided};
}

/// Callable V(x, r, t).
using ValueEvaluator = std::function<double(double, double, double)>;

inline ValueEvaluator value_evaluator(const MarketModel& m, const SolutionPair& sol) {
  return [&m, &sol](double x, double r, double t) { return value_function(m, sol, {x, r, t}); };
}

struct FiniteDifferenceSteps {
  double relative_x = 1e-4;
  double r = 1e-5;
  double t = 1e-5;
};

/// The HJBI operator L^{pi,eta} V at (x, r, t) with all partials of V taken by
/// central finite differences.
inline double l_operator(const MarketModel& m, const ValueEvaluator& V, const HQuery& q, double x,
                         FiniteDifferenceSteps steps = {}) {
  if (!(x > 0.0)) throw DomainError("l_operator: wealth must be positive");
  const double r = q.r;
  const double t = q.t;
  const double dx = steps.relative_x * x;
  const double dr = steps.r;
  const double dt = steps.t;

  const double v0 = V(x, r, t);
  const double v_t = (V(x, r, t + dt) - V(x, r, t - dt)) / (2.0 * dt);
  const double vxp = V(x + dx, r, t);
  const double vxm = V(x - dx, r, t);
  const double vrp = V(x, r + dr, t);
  const double vrm = V(x, r - dr, t);
  const double v_x = (vxp - vxm) / (2.0 * dx);
  const double v_xx = (vxp - 2.0 * v0 + vxm) / (dx * dx);
  const double v_r = (vrp - vrm) / (2.0 * dr);
  const double v_rr = (vrp - 2.0 * v0 + vrm) / (dr * dr);
  const double v_xr =
      (V(x + dx, r + dr, t) - V(x + dx, r - dr, t) - V(x - dx, r + dr, t) + V(x - dx, r - dr, t)) /
      (4.0 * dx * dr);

  const Vector a = m.a(t);
  const Vector lambda = m.lambda(t);
  const Vector v = m.sigma(t).transpose() * q.pi;
  return v_t + 0.5 * a.squaredNorm() * v_rr + 0.5 * v.squaredNorm() * x * x * v_xx +
         v.dot(a) * x * v_xr + v.dot(lambda + q.eta) * x * v_x + q.eta.dot(a) * v_r +
         (m.b(t) - m.kappa(t) * r) * v_r + r * x * v_x;
}

// ---------------------------------------------------------------------------
// Saddle certification
// ---------------------------------------------------------------------------

inline constexpr double kSaddleSlackTolerance = 1e-9;
inline constexpr double kSaddleValueTolerance = 1e-8;

struct CertifyGrid {
  std::size_t t_points = 21;
  std::size_t r_points = 21;
  std::size_t pi_points = 21;
  std::size_t eta_points = 21;
  double r_lo = -0.05;
  double r_hi = 0.15;
  double pi_half_width = 5.0;
  double eta_half_width = 5.0;
  double t_end_margin = 0.01;  // fraction of T excluded at the end
  DerivativeMode mode = DerivativeMode::exact;
};

struct GridPoint {
  double t = 0.0;
  double r = 0.0;
  Vector pi;
  Vector eta;
  double violation = 0.0;
};

struct SaddleCertificate {
  CertifyGrid grid;
  double max_violation_upper = -std::numeric_limits<double>::infinity();
  double max_violation_lower = -std::numeric_limits<double>::infinity();
  double h_at_saddle_max_abs = 0.0;
  bool passed = false;
  bool degenerate = false;  // a == 0 everywhere: the rate carries no hedging demand
  std::size_t evaluations = 0;
  std::optional<GridPoint> worst;
};

/// Candidate saddle strategy as a function of t.
using Candidate = std::function<StrategyPoint(double)>;

/// The closed-form saddle of `sol`, evaluated pointwise (restricted when
/// `sol.constraint` is set).
inline Candidate saddle_candidate(const MarketModel& m, const SolutionPair& sol) {
  if (sol.constraint) {
    return [&m, &sol](double t) {
      const double f = sol.f(t);
      Vector eta = minimize_eta_at(m, f, t, *sol.constraint);
      Vector pi = best_response_pi(m, f, t, eta);
      return StrategyPoint{std::move(pi), std::move(eta)};
    };
  }
  return [&m, &sol](double t) { return robust_saddle_at(m, sol.duration(t), t); };
}

/// Traditional (non-robust) pi paired with the robust eta*.
inline Candidate traditional_candidate(const MarketModel& m, const SolutionPair& sol) {
  return [&m, &sol](double t) {
    StrategyPoint p = robust_saddle_at(m, sol.duration(t), t);
    p.pi = traditional_at(m, sol.f(t), t);
    return p;
  };
}

namespace detail {

// Offsets graded quadratically toward zero: w * u |u| for u uniform in [-1, 1].
inline std::vector<double> graded_offsets(std::size_t points, double half_width) {
  if (points <= 1) return {0.0};
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double u = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    out[i] = half_width * u * std::abs(u);
  }
  return out;
}

// Perturbation vectors in R^n: full tensor grid for n <= 2, otherwise the
// coordinate axes plus the main diagonal.
inline std::vector<Vector> perturbations(std::size_t n, std::size_t points, double half_width) {
  const auto offs = graded_offsets(points, half_width);
  const auto dim = static_cast<Eigen::Index>(n);
  std::vector<Vector> out;
  if (n == 1) {
    for (double o : offs) out.push_back(Vector::Constant(1, o));
  } else if (n == 2) {
    for (double o0 : offs)
      for (double o1 : offs) out.push_back((Vector(2) << o0, o1).finished());
  } else {
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (double o : offs) {
        Vector p = Vector::Zero(dim);
        p[j] = o;
        out.push_back(p);
      }
    }
    for (double o : offs) out.push_back(Vector::Constant(dim, o / std::sqrt(double(n))));
  }
  return out;
}

inline bool rate_degenerate(const MarketModel& m) {
  return std::all_of(m.a.values().begin(), m.a.values().end(),
                     [](const Vector& a) { return a.isZero(0.0); });
}

}  // namespace detail

/// Checks H(pi, eta^) <= H(pi^, eta^) = 0 <= H(pi^, eta) over a grid of
/// (t, r) and boxes of perturbations around the candidate (pi^, eta^). For a
/// restricted solution the eta perturbations are projected onto Gamma.
inline SaddleCertificate certify_candidate(const MarketModel& m, const SolutionPair& sol,
                                           const Candidate& candidate,
                                           const CertifyGrid& grid = {}) {
  require_valid(m);
  SaddleCertificate cert;
  cert.grid = grid;
  cert.degenerate = detail::rate_degenerate(m);

  const double t_end = m.horizon * (1.0 - grid.t_end_margin);
  const auto ts = grid.t_points > 1 ? uniform_grid(0.0, t_end, grid.t_points - 1)
                                    : std::vector<double>{0.0};
  const auto rs = grid.r_points > 1 ? uniform_grid(grid.r_lo, grid.r_hi, grid.r_points - 1)
                                    : std::vector<double>{grid.r_lo};
  const auto dpis = detail::perturbations(m.n, grid.pi_points, grid.pi_half_width);
  const auto detas = detail::perturbations(m.n, grid.eta_points, grid.eta_half_width);

  double worst_score = -std::numeric_limits<double>::infinity();
  auto consider = [&](double score, double t, double r, const Vector& pi, const Vector& eta,
                      double violation) {
    if (score > worst_score) {
      worst_score = score;
      cert.worst = GridPoint{t, r, pi, eta, violation};
    }
  };

  for (double t : ts) {
    const HTerms k = h_terms(m, sol, t, grid.mode);
    const StrategyPoint c = candidate(t);
    std::vector<Vector> etas;
    etas.reserve(detas.size());
    for (const auto& d : detas) {
      Vector e = c.eta + d;
      if (sol.constraint) e = sol.constraint->project(e);
      etas.push_back(std::move(e));
    }
    for (double r : rs) {
      const double h_star = h_evaluate(k, c.pi, c.eta, r);
      ++cert.evaluations;
      cert.h_at_saddle_max_abs = std::max(cert.h_at_saddle_max_abs, std::abs(h_star));
      consider(std::abs(h_star) - kSaddleValueTolerance + kSaddleSlackTolerance, t, r, c.pi,
               c.eta, h_star);
      for (const auto& d : dpis) {
        const Vector pi = c.pi + d;
        const double excess = h_evaluate(k, pi, c.eta, r) - h_star;
        cert.max_violation_upper = std::max(cert.max_violation_upper, excess);
        consider(excess, t, r, pi, c.eta, excess);
      }
      for (const auto& eta : etas) {
        const double deficit = h_star - h_evaluate(k, c.pi, eta, r);
        cert.max_violation_lower = std::max(cert.max_violation_lower, deficit);
        consider(deficit, t, r, c.pi, eta, deficit);
      }
      cert.evaluations += dpis.size() + etas.size();
    }
  }
  cert.passed = cert.max_violation_upper <= kSaddleSlackTolerance &&
                cert.max_violation_lower <= kSaddleSlackTolerance &&
                cert.h_at_saddle_max_abs <= kSaddleValueTolerance;
  return cert;
}

inline SaddleCertificate certify_saddle(const MarketModel& m, const SolutionPair& sol,
                                        const CertifyGrid& grid = {}) {
  return certify_candidate(m, sol, saddle_candidate(m, sol), grid);
}

}  // namespace robustgame
