#pragma once

#include <cstddef>
#include <vector>

#include "robustgame/closedform.hpp"
#include "robustgame/gamma_set.hpp"
#include "robustgame/model.hpp"

namespace robustgame {

// Game with the market's kernel eta confined to a compact convex set Gamma.
//
// Maximizing H over pi leaves, up to eta-free terms, the expression
//   phi(eta) = -c/2 |w|^2 + c w.(lambda + eta + f a) + f a.eta,
//   w = lambda + eta + f a,  c = gamma / (1 - gamma),
// whose eta-Hessian is c I. The constrained minimizer is therefore the
// Euclidean projection of the stationary point -lambda - (f/gamma) a onto Gamma.

enum class EtaMethod { projection, projected_gradient };

inline double eta_objective_at(const MarketModel& m, double f, double t, const Vector& eta) {
  const double c = m.gamma / (1.0 - m.gamma);
  const Vector a = m.a(t);
  const Vector w = m.lambda(t) + eta + f * a;
  return -0.5 * c * w.squaredNorm() + c * w.dot(m.lambda(t) + eta + f * a) + f * a.dot(eta);
}

inline double eta_objective(const MarketModel& m, const ScalarCurve& f, double t,
                            const Vector& eta) {
  return eta_objective_at(m, f(t), t, eta);
}

inline Vector eta_objective_gradient(const MarketModel& m, double f, double t, const Vector& eta) {
  const double c = m.gamma / (1.0 - m.gamma);
  const Vector a = m.a(t);
  return c * (m.lambda(t) + eta + f * a) + f * a;
}

/// Stationary point of the eta objective, -lambda - (f / gamma) a.
inline Vector unconstrained_eta(const MarketModel& m, double f, double t) {
  return -m.lambda(t) - (f / m.gamma) * m.a(t);
}

struct ProjectedGradientResult {
  Vector eta;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Projected gradient with step 1/L, L = gamma / (1 - gamma).
inline ProjectedGradientResult minimize_eta_projected_gradient(const MarketModel& m, double f,
                                                               double t, const GammaSet& set,
                                                               double tolerance = 1e-12,
                                                               std::size_t max_iterations = 10000) {
  const double lipschitz = m.gamma / (1.0 - m.gamma);
  ProjectedGradientResult res;
  const auto [lower, upper] = set.bounds();
  res.eta = set.project(0.5 * (lower + upper));
  for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations) {
    const Vector next =
        set.project(res.eta - eta_objective_gradient(m, f, t, res.eta) / lipschitz);
    const double step = (next - res.eta).lpNorm<Eigen::Infinity>();
    res.eta = next;
    if (step <= tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

inline Vector minimize_eta_at(const MarketModel& m, double f, double t, const GammaSet& set,
                              EtaMethod method = EtaMethod::projection) {
  if (method == EtaMethod::projected_gradient) {
    return minimize_eta_projected_gradient(m, f, t, set).eta;
  }
  return set.project(unconstrained_eta(m, f, t));
}

inline Vector minimize_eta(const MarketModel& m, const ScalarCurve& f, double t,
                           const GammaSet& set, EtaMethod method = EtaMethod::projection) {
  if (set.dimension() != static_cast<Eigen::Index>(m.n)) {
    throw std::invalid_argument("minimize_eta: Gamma dimension differs from asset count");
  }
  return minimize_eta_at(m, f(t), t, set, method);
}

struct RestrictedSolution {
  VectorCurve eta_star;
  VectorCurve pi_star;
  ScalarCurve objective;
  std::vector<bool> active;
};

/// Restricted saddle point on f's grid: eta* minimizes the objective over Gamma,
/// pi* is the investor's best response to it.
inline RestrictedSolution restricted_saddle(const MarketModel& m, const ScalarCurve& f,
                                            const GammaSet& set) {
  require_valid(m);
  if (set.dimension() != static_cast<Eigen::Index>(m.n)) {
    throw std::invalid_argument("restricted_saddle: Gamma dimension differs from asset count");
  }
  std::vector<Vector> etas, pis;
  std::vector<double> objective;
  RestrictedSolution out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double t = f.times()[i];
    const double fv = f.values()[i];
    Vector eta = minimize_eta_at(m, fv, t, set);
    out.active.push_back((eta - unconstrained_eta(m, fv, t)).norm() > 1e-10);
    objective.push_back(eta_objective_at(m, fv, t, eta));
    pis.push_back(best_response_pi(m, fv, t, eta));
    etas.push_back(std::move(eta));
  }
  out.eta_star = VectorCurve(f.times(), std::move(etas));
  out.pi_star = VectorCurve(f.times(), std::move(pis));
  out.objective = ScalarCurve(f.times(), std::move(objective));
  return out;
}

/// g'(t) + 1/2 |a|^2 f^2 + b f + min_Gamma phi = 0.
inline double restricted_g_integrand(const MarketModel& m, double f, double t,
                                     const GammaSet& set) {
  const Vector a = m.a(t);
  const Vector eta = minimize_eta_at(m, f, t, set);
  return 0.5 * a.squaredNorm() * f * f + m.b(t) * f + eta_objective_at(m, f, t, eta);
}

inline ScalarCurve restricted_g(const MarketModel& m, const ScalarCurve& f, const GammaSet& set,
                                std::size_t nodes) {
  require_valid(m);
  return integrate_g(m, f, nodes,
                     [&](double fv, double t) { return restricted_g_integrand(m, fv, t, set); });
}

/// Full solution of the restricted game, usable wherever a SolutionPair is.
inline SolutionPair solve_restricted(const MarketModel& m, const GammaSet& set,
                                     std::size_t nodes = kDefaultQuadratureNodes) {
  SolutionPair sol;
  sol.quadrature_nodes = nodes;
  sol.duration = solve_duration(m, nodes);
  std::vector<double> f = sol.duration.values();
  for (double& v : f) v *= m.gamma;
  sol.f = ScalarCurve(sol.duration.times(), std::move(f));
  sol.g = restricted_g(m, sol.f, set, nodes);
  auto rs = restricted_saddle(m, sol.f, set);
  sol.pi_star = std::move(rs.pi_star);
  sol.eta_star = std::move(rs.eta_star);
  sol.constraint = set;
  return sol;
}

}  // namespace robustgame
