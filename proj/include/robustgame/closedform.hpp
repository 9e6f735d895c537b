#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustgame/curve.hpp"
#include "robustgame/errors.hpp"
#include "robustgame/gamma_set.hpp"
#include "robustgame/model.hpp"
#include "robustgame/quadrature.hpp"

namespace robustgame {

inline constexpr std::size_t kDefaultQuadratureNodes = 2048;
inline constexpr std::size_t kMinQuadratureNodes = 16;

/// Solved value-function exponents and the saddle strategies built from them.
///
/// V(x, r, t) = (x^gamma / gamma) exp(f(t) r + g(t)).
/// `duration` is f / gamma computed without gamma, so the strategies are
/// exactly independent of risk aversion. `constraint` is set for solutions of
/// the game with a restricted uncertainty set.
struct SolutionPair {
  ScalarCurve f;
  ScalarCurve g;
  VectorCurve pi_star;
  VectorCurve eta_star;
  std::size_t quadrature_nodes = 0;
  ScalarCurve duration;
  std::optional<GammaSet> constraint;
};

struct StrategyPoint {
  Vector pi;
  Vector eta;
};

namespace detail {

inline void check_nodes(std::size_t nodes) {
  if (nodes < kMinQuadratureNodes) {
    throw std::invalid_argument("quadrature nodes must be >= " +
                                std::to_string(kMinQuadratureNodes));
  }
}

/// f/gamma on the uniform grid and its interval midpoints.
struct DurationSamples {
  std::vector<double> times;
  std::vector<double> at_nodes;
  std::vector<double> at_midpoints;
};

// D(t) = int_t^T exp(-int_t^k kappa) dk, marched backwards from D(T) = 0 with
// Simpson panels of half the grid step:
//   D(lo) = int_lo^hi exp(-int_lo^k kappa) dk + exp(-int_lo^hi kappa) D(hi).
inline DurationSamples duration_samples(const ScalarCurve& kappa, double horizon,
                                        std::size_t nodes) {
  DurationSamples out;
  out.times = uniform_grid(0.0, horizon, nodes);
  out.at_nodes.assign(nodes + 1, 0.0);
  out.at_midpoints.assign(nodes, 0.0);

  auto kappa_integral = [&](double lo, double hi) {
    return quadrature::simpson([&](double s) { return kappa(s); }, lo, hi);
  };
  auto step_back = [&](double lo, double hi, double d_hi) {
    const double mid = 0.5 * (lo + hi);
    const double decay_mid = std::exp(-kappa_integral(lo, mid));
    const double decay_hi = std::exp(-kappa_integral(lo, hi));
    return quadrature::simpson(1.0, decay_mid, decay_hi, hi - lo) + decay_hi * d_hi;
  };

  for (std::size_t i = nodes; i-- > 0;) {
    const double lo = out.times[i];
    const double hi = out.times[i + 1];
    const double mid = 0.5 * (lo + hi);
    out.at_midpoints[i] = step_back(mid, hi, out.at_nodes[i + 1]);
    out.at_nodes[i] = step_back(lo, mid, out.at_midpoints[i]);
  }
  return out;
}

inline void check_grid(const ScalarCurve& f, double horizon, std::size_t nodes) {
  if (f.size() != nodes + 1 || f.times() != uniform_grid(0.0, horizon, nodes)) {
    throw std::invalid_argument("f must be sampled on the uniform " + std::to_string(nodes) +
                                "-interval grid over [0, T]");
  }
}

}  // namespace detail

/// f / gamma as a curve on the uniform `nodes` grid.
inline ScalarCurve solve_duration(const MarketModel& m, std::size_t nodes) {
  require_valid(m);
  detail::check_nodes(nodes);
  auto d = detail::duration_samples(m.kappa, m.horizon, nodes);
  return ScalarCurve(std::move(d.times), std::move(d.at_nodes));
}

/// f(t) = gamma exp(-int_t^T kappa) int_t^T exp(int_k^T kappa) dk on a uniform grid.
inline ScalarCurve solve_f(const MarketModel& m, std::size_t nodes) {
  const ScalarCurve d = solve_duration(m, nodes);
  std::vector<double> f = d.values();
  for (double& v : f) v *= m.gamma;
  return ScalarCurve(d.times(), std::move(f));
}

/// Integrand of g for the unconstrained game, g'(t) = -integrand(t).
///
/// The three a-quadratic terms collapse to -|a|^2 f^2 / (2 gamma).
inline double g_integrand(const MarketModel& m, double f, double t) {
  const Vector a = m.a(t);
  const double a2 = a.squaredNorm();
  const double gamma = m.gamma;
  return 0.5 * f * f * a2 + 0.5 * a2 * f * f * (gamma - 1.0) / gamma - a2 * f * f -
         m.lambda(t).dot(a) * f + m.b(t) * f;
}

/// g on f's grid by composite Simpson from g(T) = 0, integrand supplied per (f, t).
template <typename Integrand>
ScalarCurve integrate_g(const MarketModel& m, const ScalarCurve& f, std::size_t nodes,
                        Integrand&& integrand) {
  detail::check_nodes(nodes);
  detail::check_grid(f, m.horizon, nodes);
  const auto& t = f.times();
  const auto& fv = f.values();
  std::vector<double> g(nodes + 1, 0.0);
  double right = integrand(fv[nodes], t[nodes]);
  for (std::size_t i = nodes; i-- > 0;) {
    const double mid = 0.5 * (t[i] + t[i + 1]);
    const double left = integrand(fv[i], t[i]);
    const double middle = integrand(quadrature::cubic_midpoint(fv, i), mid);
    g[i] = g[i + 1] + quadrature::simpson(left, middle, right, t[i + 1] - t[i]);
    right = left;
  }
  return ScalarCurve(t, std::move(g));
}

inline ScalarCurve solve_g(const MarketModel& m, const ScalarCurve& f, std::size_t nodes) {
  require_valid(m);
  return integrate_g(m, f, nodes, [&](double fv, double t) { return g_integrand(m, fv, t); });
}

/// Unconstrained saddle point at time t from D = f(t)/gamma:
/// pi* = -D a Sigma^{-1}, eta* = -lambda - D a.
inline StrategyPoint robust_saddle_at(const MarketModel& m, double duration, double t) {
  const Vector a = m.a(t);
  return {-duration * solve_sigma_transpose(m.sigma(t), a, t), -m.lambda(t) - duration * a};
}

/// The investor's best response to a fixed kernel eta:
/// pi = (lambda + eta + f a) Sigma^{-1} / (1 - gamma).
inline Vector best_response_pi(const MarketModel& m, double f, double t, const Vector& eta) {
  const Vector w = m.lambda(t) + eta + f * m.a(t);
  return solve_sigma_transpose(m.sigma(t), w, t) / (1.0 - m.gamma);
}

/// Merton-type strategy without model uncertainty: (lambda + f a) Sigma^{-1} / (1 - gamma).
inline Vector traditional_at(const MarketModel& m, double f, double t) {
  return best_response_pi(m, f, t, Vector::Zero(static_cast<Eigen::Index>(m.n)));
}

/// pi* and eta* sampled on f's grid.
inline std::pair<VectorCurve, VectorCurve> saddle_point(const MarketModel& m,
                                                        const ScalarCurve& f) {
  require_valid(m);
  std::vector<Vector> pis, etas;
  pis.reserve(f.size());
  etas.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto sp = robust_saddle_at(m, f.values()[i] / m.gamma, f.times()[i]);
    pis.push_back(std::move(sp.pi));
    etas.push_back(std::move(sp.eta));
  }
  return {VectorCurve(f.times(), std::move(pis)), VectorCurve(f.times(), std::move(etas))};
}

inline VectorCurve traditional_strategy(const MarketModel& m, const ScalarCurve& f) {
  require_valid(m);
  return VectorCurve::sample(f.times(), [&](double t) { return traditional_at(m, f(t), t); });
}

/// f, g and the saddle strategies in one pass.
inline SolutionPair solve(const MarketModel& m, std::size_t nodes = kDefaultQuadratureNodes) {
  SolutionPair sol;
  sol.quadrature_nodes = nodes;
  sol.duration = solve_duration(m, nodes);
  std::vector<double> f = sol.duration.values();
  for (double& v : f) v *= m.gamma;
  sol.f = ScalarCurve(sol.duration.times(), std::move(f));
  sol.g = solve_g(m, sol.f, nodes);

  std::vector<Vector> pis, etas;
  for (std::size_t i = 0; i < sol.duration.size(); ++i) {
    auto sp = robust_saddle_at(m, sol.duration.values()[i], sol.duration.times()[i]);
    pis.push_back(std::move(sp.pi));
    etas.push_back(std::move(sp.eta));
  }
  sol.pi_star = VectorCurve(sol.duration.times(), std::move(pis));
  sol.eta_star = VectorCurve(sol.duration.times(), std::move(etas));
  return sol;
}

/// V(x, r, t) = (x^gamma / gamma) exp(f(t) r + g(t)).
inline double value_function(const MarketModel& m, const SolutionPair& sol, const StatePoint& s) {
  if (!(s.x > 0.0)) throw DomainError("value_function: wealth must be positive");
  return std::pow(s.x, m.gamma) / m.gamma * std::exp(sol.f(s.t) * s.r + sol.g(s.t));
}

/// Excess drift Sigma_t (lambda_t + eta_t) of the discounted assets under Q^eta.
/// Zero iff Q^eta is a martingale measure at t.
inline Vector martingale_gap(const MarketModel& m, const VectorCurve& eta, double t) {
  return m.sigma(t) * (m.lambda(t) + eta(t));
}

}  // namespace robustgame
