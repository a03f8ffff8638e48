#pragma once

#include <cmath>
#include <string>

#include "ovd/errors.hpp"

namespace ovd {

/// Desired-velocity map V(headway) with its exact derivative.
///
/// Tanh:    V(s) = tanh(s), nondimensional units, sup V = 1.
/// Sigmoid: V(s) = v_max/2 * (tanh((s - h_c)/ell) + 1), physical units.
///
/// Negative headways are evaluated as defined (no clamping).
class OvFunction {
 public:
  enum class Kind { Tanh, Sigmoid };

  static OvFunction tanh() { return OvFunction(Kind::Tanh, 1.0, 0.0, 1.0); }

  static OvFunction sigmoid(double v_max, double h_c, double ell) {
    if (!(ell > 0.0) || !std::isfinite(ell)) {
      throw ConfigError("sigmoid OV function requires ell > 0");
    }
    if (!(v_max > 0.0) || !std::isfinite(v_max) || !std::isfinite(h_c)) {
      throw ConfigError("sigmoid OV function requires finite v_max > 0 and h_c");
    }
    return OvFunction(Kind::Sigmoid, v_max, h_c, ell);
  }

  Kind kind() const noexcept { return kind_; }
  double v_max() const noexcept { return v_max_; }
  double h_c() const noexcept { return h_c_; }
  double ell() const noexcept { return ell_; }

  /// Least upper bound of V over all headways.
  double supremum() const noexcept { return kind_ == Kind::Tanh ? 1.0 : v_max_; }

  double operator()(double headway) const { return eval(headway); }

  double eval(double headway) const {
    check(headway);
    if (kind_ == Kind::Tanh) return std::tanh(headway);
    return 0.5 * v_max_ * (std::tanh((headway - h_c_) / ell_) + 1.0);
  }

  double derivative(double headway) const {
    check(headway);
    if (kind_ == Kind::Tanh) return sech2(headway);
    return v_max_ / (2.0 * ell_) * sech2((headway - h_c_) / ell_);
  }

  std::string name() const { return kind_ == Kind::Tanh ? "tanh" : "sigmoid"; }

 private:
  OvFunction(Kind kind, double v_max, double h_c, double ell)
      : kind_(kind), v_max_(v_max), h_c_(h_c), ell_(ell) {}

  static void check(double headway) {
    if (!std::isfinite(headway)) throw DomainError("OV function: non-finite headway");
  }

  // 1/cosh^2 stays accurate for large |s| where 1 - tanh^2 underflows to 0.
  static double sech2(double s) {
    const double c = std::cosh(s);
    return 1.0 / (c * c);
  }

  Kind kind_;
  double v_max_;
  double h_c_;
  double ell_;
};

}  // namespace ovd
