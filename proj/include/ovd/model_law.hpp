#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ovd/errors.hpp"

namespace ovd {

/// Per-vehicle acceleration rule.
///
/// ClassicalOvm: dv/dt = alpha (V - v).
/// HybridOvd:    dv/dt = a (1 - v^2 / V^2), with V floored at v_floor.
class ModelLaw {
 public:
  enum class Kind { ClassicalOvm, HybridOvd };

  static constexpr double kDefaultVelocityFloor = 1e-9;

  static ModelLaw classical_ovm(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw ConfigError("classical OVM requires alpha > 0");
    }
    return ModelLaw(Kind::ClassicalOvm, alpha, 0.0);
  }

  static ModelLaw hybrid_ovd(double a, double v_floor = kDefaultVelocityFloor) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("hybrid OVD requires a > 0");
    if (!(v_floor >= 0.0) || !std::isfinite(v_floor)) {
      throw ConfigError("hybrid OVD requires v_floor >= 0");
    }
    return ModelLaw(Kind::HybridOvd, a, v_floor);
  }

  Kind kind() const noexcept { return kind_; }
  bool is_hybrid() const noexcept { return kind_ == Kind::HybridOvd; }
  /// alpha for ClassicalOvm, a for HybridOvd.
  double rate() const noexcept { return rate_; }
  double v_floor() const noexcept { return v_floor_; }

  std::string name() const { return is_hybrid() ? "hybrid" : "ovm"; }

  double accel(double v, double v_des) const {
    check(v, v_des);
    if (!is_hybrid()) return rate_ * (v_des - v);
    const double V = floored(v_des);
    const double r = v / V;
    return rate_ * (1.0 - r * r);
  }

  /// a (V + v) / V^2; the state-dependent sensitivity of the hybrid law.
  /// For ClassicalOvm this is the constant alpha.
  double effective_sensitivity(double v, double v_des) const {
    check(v, v_des);
    if (!is_hybrid()) return rate_;
    const double V = floored(v_des);
    return rate_ * (V + v) / (V * V);
  }

  /// d^2v/dt^2 with the desired speed held fixed.
  double jerk(double v, double v_des) const {
    check(v, v_des);
    if (!is_hybrid()) return -rate_ * rate_ * (v_des - v);
    const double V = floored(v_des);
    const double r = v / V;
    return -(2.0 * rate_ * rate_ / (V * V)) * v * (1.0 - r * r);
  }

 private:
  ModelLaw(Kind kind, double rate, double v_floor) : kind_(kind), rate_(rate), v_floor_(v_floor) {}

  double floored(double v_des) const { return std::max(v_des, v_floor_); }

  static void check(double v, double v_des) {
    if (!std::isfinite(v) || !std::isfinite(v_des)) {
      throw DomainError("model law: non-finite velocity input");
    }
  }

  Kind kind_;
  double rate_;
  double v_floor_;
};

/// Closed-form speed of a lone vehicle under the drag law with fixed
/// terminal speed: v_max tanh((a/v_max) t + artanh(v0/v_max)).
inline double single_vehicle_solution(double a, double v_max, double v0, double t) {
  if (!(a > 0.0) || !(v_max > 0.0)) throw DomainError("single vehicle: need a > 0 and v_max > 0");
  if (!(v0 >= 0.0) || !(v0 < v_max)) throw DomainError("single vehicle: need 0 <= v0 < v_max");
  if (!(t >= 0.0)) throw DomainError("single vehicle: need t >= 0");
  return v_max * std::tanh(a / v_max * t + std::atanh(v0 / v_max));
}

}  // namespace ovd
