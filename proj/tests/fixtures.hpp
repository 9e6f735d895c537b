#pragma once

#include <robustgame/robustgame.hpp>

namespace fixtures {

using robustgame::Matrix;
using robustgame::MarketModel;
using robustgame::MatrixCurve;
using robustgame::ScalarCurve;
using robustgame::Vector;
using robustgame::VectorCurve;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// Constant-coefficient model on [0, T].
inline MarketModel constant_model(double gamma, double kappa, double b, const Vector& lambda,
                                  const Vector& a, const Matrix& sigma, double T = 1.0) {
  MarketModel m;
  m.n = static_cast<std::size_t>(lambda.size());
  m.horizon = T;
  m.gamma = gamma;
  m.kappa = ScalarCurve::constant(kappa, T);
  m.b = ScalarCurve::constant(b, T);
  m.lambda = VectorCurve::constant(lambda, T);
  m.a = VectorCurve::constant(a, T);
  m.sigma = MatrixCurve::constant(sigma, T);
  return m;
}

/// One asset: kappa 0.1, b 0.02, lambda 0.3, a 0.01, sigma 0.2, T 1.
inline MarketModel reference(double gamma = 0.5) {
  return constant_model(gamma, 0.1, 0.02, vec({0.3}), vec({0.01}), Matrix::Constant(1, 1, 0.2));
}

/// A stock and a five-year zero-coupon bond, with time-varying coefficients.
inline MarketModel stock_bond(double gamma = 0.3) {
  const double T = 1.0;
  const double kappa = 0.2;
  const double a_level = 0.015;
  const auto grid = robustgame::uniform_grid(0.0, T, 8);
  MarketModel m;
  m.n = 2;
  m.horizon = T;
  m.gamma = gamma;
  m.kappa = ScalarCurve::constant(kappa, T);
  m.b = ScalarCurve::sample(grid, [](double t) { return 0.01 + 0.005 * t; });
  m.lambda = VectorCurve::sample(grid, [](double t) { return vec({0.35 - 0.05 * t, 0.1}); });
  m.a = VectorCurve::constant(vec({0.0, a_level}), T);
  m.sigma = MatrixCurve::sample(grid, [&](double t) {
    Matrix s(2, 2);
    s << 0.2, 0.05, 0.0, robustgame::bond_volatility(kappa, a_level, 5.0, t);
    return s;
  });
  return m;
}

}  // namespace fixtures
