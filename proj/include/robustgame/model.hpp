#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robustgame/curve.hpp"
#include "robustgame/errors.hpp"

namespace robustgame {

/// Smallest singular value below which a volatility matrix counts as singular.
inline constexpr double kSigmaConditionFloor = 1e-10;

/// Market with a bank account, n risky assets and a Hull-White short rate.
///
///   dr = (b_t - kappa_t r) dt + a_t dW
///   dS = diag(S) [ (r e + Sigma_t lambda_t) dt + Sigma_t dW ]
///
/// `b` is used as given: any a_t lambda_t^T drift correction must already be
/// folded into it by the caller.
struct MarketModel {
  std::size_t n = 1;
  double horizon = 1.0;
  double gamma = 0.5;
  ScalarCurve kappa;
  ScalarCurve b;
  VectorCurve lambda;
  VectorCurve a;
  MatrixCurve sigma;
};

/// Wealth x > 0, short rate r, time t in [0, T].
struct StatePoint {
  double x = 1.0;
  double r = 0.0;
  double t = 0.0;
};

struct Violation {
  std::string field;
  std::optional<std::size_t> index;  // breakpoint index, when the violation is local
  std::string message;
};

inline std::string to_string(const Violation& v) {
  std::ostringstream os;
  os << v.field;
  if (v.index) os << "[" << *v.index << "]";
  os << ": " << v.message;
  return os.str();
}

inline double smallest_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

namespace detail {

template <typename Value>
void check_curve(std::vector<Violation>& out, const std::string& name, const Curve<Value>& c,
                 double horizon, Eigen::Index rows, Eigen::Index cols) {
  if (c.size() == 0) {
    out.push_back({name, std::nullopt, "curve is empty"});
    return;
  }
  if (std::abs(c.horizon() - horizon) > detail::horizon_slack(horizon)) {
    out.push_back({name, c.size() - 1,
                   "last breakpoint " + std::to_string(c.horizon()) + " differs from horizon " +
                       std::to_string(horizon)});
  }
  if (c.rows() != rows || c.cols() != cols) {
    out.push_back({name, std::nullopt,
                   "dimension " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols)});
    return;
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!detail::all_finite(c.values()[i])) out.push_back({name, i, "non-finite value"});
  }
}

}  // namespace detail

/// Every violated model invariant with its location. Empty iff the model is valid.
inline std::vector<Violation> validate_model(const MarketModel& m) {
  std::vector<Violation> out;
  if (m.n == 0) out.push_back({"n", std::nullopt, "asset count must be positive"});
  if (!(m.horizon > 0.0) || !std::isfinite(m.horizon)) {
    out.push_back({"horizon", std::nullopt, "horizon must be finite and > 0"});
  }
  if (!(m.gamma > 0.0 && m.gamma < 1.0)) {
    out.push_back({"gamma", std::nullopt,
                   "gamma = " + std::to_string(m.gamma) + " outside the open interval (0, 1)"});
  }
  if (!out.empty() && (m.n == 0 || !(m.horizon > 0.0))) return out;

  const auto n = static_cast<Eigen::Index>(m.n);
  detail::check_curve(out, "kappa", m.kappa, m.horizon, 1, 1);
  detail::check_curve(out, "b", m.b, m.horizon, 1, 1);
  detail::check_curve(out, "lambda", m.lambda, m.horizon, n, 1);
  detail::check_curve(out, "a", m.a, m.horizon, n, 1);
  detail::check_curve(out, "sigma", m.sigma, m.horizon, n, n);

  if (m.sigma.size() > 0 && m.sigma.rows() == n && m.sigma.cols() == n) {
    for (std::size_t i = 0; i < m.sigma.size(); ++i) {
      const Matrix& s = m.sigma.values()[i];
      if (!s.allFinite()) continue;
      const double smin = smallest_singular_value(s);
      if (!(smin > kSigmaConditionFloor)) {
        std::ostringstream os;
        os << "sigma not invertible at t = " << m.sigma.times()[i]
           << " (smallest singular value " << smin << ")";
        out.push_back({"sigma", i, os.str()});
      }
    }
  }
  return out;
}

/// Throws InvalidModel listing every violation.
inline void require_valid(const MarketModel& m) {
  const auto violations = validate_model(m);
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += "\n  " + to_string(v);
  throw InvalidModel(msg);
}

/// Sigma_t^{-1} with the conditioning guard; throws NumericalError naming t.
inline Matrix sigma_inverse(const Matrix& sigma, double t) {
  const double smin = smallest_singular_value(sigma);
  if (!(smin > kSigmaConditionFloor)) {
    std::ostringstream os;
    os << "volatility matrix singular at t = " << t << " (smallest singular value " << smin
       << ")";
    throw NumericalError(os.str());
  }
  return sigma.partialPivLu().inverse();
}

/// Solves Sigma_t^T y = v, i.e. the column form of the row product v Sigma_t^{-1}.
inline Vector solve_sigma_transpose(const Matrix& sigma, const Vector& v, double t) {
  return sigma_inverse(sigma, t).transpose() * v;
}

/// Volatility of a zero-coupon bond maturing at `maturity` under Vasicek rate
/// dynamics with volatility level `a_level`: -(a/kappa)(1 - exp(-kappa (T' - t))).
inline double bond_volatility(double kappa, double a_level, double maturity, double t) {
  if (kappa == 0.0) {
    throw std::invalid_argument("bond_volatility: kappa = 0 is a degenerate parameter");
  }
  return -(a_level / kappa) * (1.0 - std::exp(-kappa * (maturity - t)));
}

/// Bond volatility sampled on `grid` (which must start at 0 and not exceed `maturity`).
inline ScalarCurve bond_volatility_curve(double kappa, double a_level, double maturity,
                                         const std::vector<double>& grid) {
  if (kappa == 0.0) {
    throw std::invalid_argument("bond_volatility_curve: kappa = 0 is a degenerate parameter");
  }
  if (grid.empty() || grid.back() > maturity) {
    throw std::invalid_argument("bond_volatility_curve: grid must end at or before maturity");
  }
  return ScalarCurve::sample(
      grid, [&](double t) { return bond_volatility(kappa, a_level, maturity, t); });
}

}  // namespace robustgame
