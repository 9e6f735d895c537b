#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robustgame/curve.hpp"

namespace robustgame {

/// Compact convex set of admissible Girsanov kernels: a box or a Euclidean ball.
class GammaSet {
 public:
  enum class Shape { box, ball };

  static GammaSet box(Vector lo, Vector hi) {
    if (lo.size() != hi.size() || lo.size() == 0) {
      throw std::invalid_argument("GammaSet::box: bounds must be non-empty and of equal length");
    }
    if (!lo.allFinite() || !hi.allFinite()) {
      throw std::invalid_argument("GammaSet::box: bounds must be finite");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (lo[i] > hi[i]) {
        throw std::invalid_argument("GammaSet::box: lo > hi in coordinate " + std::to_string(i));
      }
    }
    GammaSet s;
    s.shape_ = Shape::box;
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    return s;
  }

  static GammaSet ball(Vector center, double radius) {
    if (center.size() == 0 || !center.allFinite()) {
      throw std::invalid_argument("GammaSet::ball: center must be a finite non-empty vector");
    }
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
      throw std::invalid_argument("GammaSet::ball: radius must be finite and >= 0");
    }
    GammaSet s;
    s.shape_ = Shape::ball;
    s.center_ = std::move(center);
    s.radius_ = radius;
    return s;
  }

  Shape shape() const { return shape_; }
  Eigen::Index dimension() const { return shape_ == Shape::box ? lo_.size() : center_.size(); }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  /// Euclidean projection onto the set.
  Vector project(const Vector& eta) const {
    check_dimension(eta);
    if (shape_ == Shape::box) return eta.cwiseMax(lo_).cwiseMin(hi_);
    const Vector d = eta - center_;
    const double norm = d.norm();
    if (norm <= radius_) return eta;
    return center_ + (radius_ / norm) * d;
  }

  double distance(const Vector& eta) const { return (eta - project(eta)).norm(); }

  bool contains(const Vector& eta, double tol = 0.0) const { return distance(eta) <= tol; }

  /// Axis-aligned bounding box [lower, upper].
  std::pair<Vector, Vector> bounds() const {
    if (shape_ == Shape::box) return {lo_, hi_};
    const Vector r = Vector::Constant(center_.size(), radius_);
    return {center_ - r, center_ + r};
  }

 private:
  GammaSet() = default;

  void check_dimension(const Vector& eta) const {
    if (eta.size() != dimension()) {
      throw std::invalid_argument("GammaSet: dimension mismatch");
    }
  }

  Shape shape_ = Shape::box;
  Vector lo_, hi_;
  Vector center_;
  double radius_ = 0.0;
};

}  // namespace robustgame
