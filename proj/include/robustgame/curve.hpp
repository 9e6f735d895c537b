#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robustgame/errors.hpp"

namespace robustgame {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Interpolation { linear, constant_left };

namespace detail {

inline bool all_finite(double v) { return std::isfinite(v); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& v) { return v.allFinite(); }

inline std::pair<Eigen::Index, Eigen::Index> shape_of(double) { return {1, 1}; }
inline std::pair<Eigen::Index, Eigen::Index> shape_of(const Vector& v) { return {v.size(), 1}; }
inline std::pair<Eigen::Index, Eigen::Index> shape_of(const Matrix& v) { return {v.rows(), v.cols()}; }

// Slack allowed when t overshoots the horizon through accumulated rounding.
inline double horizon_slack(double horizon) { return 1e-12 * std::max(1.0, std::abs(horizon)); }

}  // namespace detail

/// Deterministic coefficient function of time, sampled at breakpoints on [0, T].
///
/// Evaluation at a breakpoint returns the stored value bit-exactly. Between
/// breakpoints the value is either linearly interpolated or held at the left
/// breakpoint's value.
template <typename Value>
class Curve {
 public:
  using value_type = Value;

  Curve() = default;

  Curve(std::vector<double> times, std::vector<Value> values,
        Interpolation interpolation = Interpolation::linear)
      : times_(std::move(times)), values_(std::move(values)), interpolation_(interpolation) {
    if (times_.empty() || times_.size() != values_.size()) {
      throw std::invalid_argument("curve: need matching, non-empty breakpoints and values");
    }
    if (times_.front() != 0.0) {
      throw std::invalid_argument("curve: first breakpoint must be 0");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
      if (!(times_[i] > times_[i - 1])) {
        throw std::invalid_argument("curve: breakpoints must be strictly increasing (index " +
                                    std::to_string(i) + ")");
      }
    }
    const auto shape = detail::shape_of(values_.front());
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(times_[i])) {
        throw std::invalid_argument("curve: non-finite breakpoint at index " + std::to_string(i));
      }
      if (detail::shape_of(values_[i]) != shape) {
        throw std::invalid_argument("curve: inconsistent value dimension at index " +
                                    std::to_string(i));
      }
    }
  }

  /// Constant curve on [0, horizon].
  static Curve constant(Value value, double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("curve: horizon must be positive");
    return Curve({0.0, horizon}, {value, value}, Interpolation::linear);
  }

  /// Samples `fn` on `times`.
  template <typename Fn>
  static Curve sample(const std::vector<double>& times, Fn&& fn,
                      Interpolation interpolation = Interpolation::linear) {
    std::vector<Value> values;
    values.reserve(times.size());
    for (double t : times) values.push_back(fn(t));
    return Curve(times, std::move(values), interpolation);
  }

  Value operator()(double t) const {
    if (times_.empty()) throw std::logic_error("curve: evaluating an empty curve");
    const double T = times_.back();
    if (!(t >= 0.0) || t > T + detail::horizon_slack(T)) {
      throw DomainError("curve: t = " + std::to_string(t) + " outside [0, " + std::to_string(T) +
                        "]");
    }
    t = std::min(t, T);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (times_[i] == t || i + 1 == times_.size() || interpolation_ == Interpolation::constant_left) {
      return values_[i];
    }
    const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return Value(values_[i] + w * (values_[i + 1] - values_[i]));
  }

  double horizon() const { return times_.back(); }
  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Value>& values() const { return values_; }
  Interpolation interpolation() const { return interpolation_; }

  bool finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](const Value& v) { return detail::all_finite(v); });
  }

  /// Rows for the first value (1 for scalar curves).
  Eigen::Index rows() const { return detail::shape_of(values_.front()).first; }
  Eigen::Index cols() const { return detail::shape_of(values_.front()).second; }

 private:
  std::vector<double> times_;
  std::vector<Value> values_;
  Interpolation interpolation_ = Interpolation::linear;
};

using ScalarCurve = Curve<double>;
using VectorCurve = Curve<Vector>;
using MatrixCurve = Curve<Matrix>;

/// `count`+1 equally spaced points on [from, to]; the last point equals `to` exactly.
inline std::vector<double> uniform_grid(double from, double to, std::size_t count) {
  if (count == 0) throw std::invalid_argument("uniform_grid: need at least one interval");
  std::vector<double> grid(count + 1);
  const double h = (to - from) / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = from + static_cast<double>(i) * h;
  grid[count] = to;
  return grid;
}

}  // namespace robustgame
