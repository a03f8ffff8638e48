#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ovd/errors.hpp"
#include "ovd/model_law.hpp"
#include "ovd/ov_function.hpp"

namespace ovd {

/// N vehicles on a periodic road of length L.
struct RingConfig {
  std::size_t n_vehicles = 100;
  double ring_length = 200.0;

  double spacing() const { return ring_length / static_cast<double>(n_vehicles); }

  void validate() const {
    if (n_vehicles < 2) throw ConfigError("ring needs at least 2 vehicles");
    if (!(ring_length > 0.0) || !std::isfinite(ring_length)) {
      throw ConfigError("ring length must be positive and finite");
    }
  }
};

/// Positions (unwrapped) and speeds of every vehicle at time t.
/// Vehicle n follows vehicle n+1; vehicle N-1 follows vehicle 0 shifted by L.
struct RingState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> v;

  std::size_t size() const { return x.size(); }
};

/// Periodic headways x[n+1] - x[n], closing the ring with x[0] + L.
inline void headways(std::span<const double> x, double ring_length, std::span<double> out) {
  const std::size_t n = x.size();
  if (out.size() != n || n == 0) throw ConfigError("headways: size mismatch");
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = x[i + 1] - x[i];
  out[n - 1] = x[0] + ring_length - x[n - 1];
}

inline std::vector<double> headways(const RingState& state, const RingConfig& config) {
  if (state.x.size() != config.n_vehicles || state.v.size() != config.n_vehicles) {
    throw ConfigError("headways: state has " + std::to_string(state.x.size()) +
                      " vehicles, config expects " + std::to_string(config.n_vehicles));
  }
  std::vector<double> out(state.x.size());
  headways(state.x, config.ring_length, out);
  return out;
}

/// Uniform flow at t = 0: x[n] = n b, v[n] = V(b).
inline RingState uniform_flow(const RingConfig& config, const OvFunction& ov) {
  config.validate();
  const double b = config.spacing();
  const double c = ov.eval(b);
  RingState s;
  s.x.resize(config.n_vehicles);
  s.v.assign(config.n_vehicles, c);
  for (std::size_t n = 0; n < config.n_vehicles; ++n) s.x[n] = static_cast<double>(n) * b;
  return s;
}

/// Shift one vehicle's position by dx; velocities untouched.
inline RingState perturb(RingState state, std::size_t vehicle_index, double dx) {
  if (vehicle_index >= state.x.size()) {
    throw ConfigError("perturb: vehicle index " + std::to_string(vehicle_index) + " out of range");
  }
  state.x[vehicle_index] += dx;
  return state;
}

/// Right-hand side of the coupled system: dx/dt = v, dv/dt = accel(v, V(headway)).
/// Every entry is computed from the same input state.
class RingVectorField {
 public:
  RingVectorField(ModelLaw law, OvFunction ov, double ring_length)
      : law_(law), ov_(ov), ring_length_(ring_length) {}

  void operator()(std::span<const double> x, std::span<const double> v, std::span<double> dx,
                  std::span<double> dv) const {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double gap = (i + 1 < n ? x[i + 1] : x[0] + ring_length_) - x[i];
      dx[i] = v[i];
      dv[i] = law_.accel(v[i], ov_.eval(gap));
    }
  }

  const ModelLaw& law() const { return law_; }
  const OvFunction& ov() const { return ov_; }
  double ring_length() const { return ring_length_; }

 private:
  ModelLaw law_;
  OvFunction ov_;
  double ring_length_;
};

}  // namespace ovd
