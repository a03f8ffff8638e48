#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ovd/errors.hpp"
#include "ovd/matrix.hpp"
#include "ovd/model_law.hpp"
#include "ovd/ov_function.hpp"
#include "ovd/ring.hpp"

namespace ovd {

enum class Scheme { ForwardEuler, RungeKutta4 };

inline std::string to_string(Scheme s) { return s == Scheme::ForwardEuler ? "euler" : "rk4"; }

struct IntegrationPlan {
  Scheme scheme = Scheme::ForwardEuler;
  double dt = 0.1;
  double t_end = 100.0;
  std::size_t record_stride = 1;
  /// Clamp speeds at zero after every step. Off by default.
  bool clamp_nonnegative = false;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("plan: dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("plan: t_end must be positive");
    if (dt > t_end) throw ConfigError("plan: dt exceeds t_end");
    if (record_stride < 1) throw ConfigError("plan: record_stride must be >= 1");
    if (t_end / dt > 1e9) throw ConfigError("plan: too many steps");
  }

  /// ceil(t_end / dt), ignoring rounding noise in the quotient.
  std::size_t step_count() const {
    const double q = t_end / dt;
    const double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(q));
  }

  /// Length of the final step; shorter than dt when dt does not divide t_end.
  double last_step() const {
    const std::size_t n = step_count();
    const double q = t_end / dt;
    if (std::abs(q - static_cast<double>(n)) <= 1e-9 * static_cast<double>(n)) return dt;
    return t_end - static_cast<double>(n - 1) * dt;
  }
};

struct RunMetadata {
  std::string scheme;
  double dt = 0.0;
  double t_end = 0.0;
  std::size_t steps = 0;
  std::size_t record_stride = 1;
  std::size_t n_vehicles = 0;
  double ring_length = 0.0;
  bool collision = false;
  /// Time of the first state with a non-positive headway, NaN when none.
  double first_collision_time = std::numeric_limits<double>::quiet_NaN();
  /// Extremes over every integration step, not only recorded samples.
  double min_velocity = std::numeric_limits<double>::infinity();
  double max_velocity = -std::numeric_limits<double>::infinity();
};

struct TrajectoryRecord {
  std::vector<double> times;
  Matrix<double> positions;
  Matrix<double> velocities;
  RunMetadata meta;

  std::size_t samples() const { return times.size(); }

  RingState state(std::size_t sample) const {
    RingState s;
    s.t = times.at(sample);
    auto xr = positions.row(sample);
    auto vr = velocities.row(sample);
    s.x.assign(xr.begin(), xr.end());
    s.v.assign(vr.begin(), vr.end());
    return s;
  }

  bool operator==(const TrajectoryRecord& o) const {
    return times == o.times && positions == o.positions && velocities == o.velocities;
  }
};

/// Integration stopped on a non-finite state; carries everything recorded before it.
class TrajectoryDiverged : public IntegrationDiverged {
 public:
  TrajectoryDiverged(std::size_t step, TrajectoryRecord partial)
      : IntegrationDiverged(step, "integration diverged at step " + std::to_string(step)),
        partial_(std::move(partial)) {}

  const TrajectoryRecord& partial() const noexcept { return partial_; }

 private:
  TrajectoryRecord partial_;
};

/// Fixed-step explicit stepper with reusable stage buffers.
///
/// All stage derivatives come from whole-state evaluations of the field, so
/// every vehicle sees the same frozen pre-stage state.
class Stepper {
 public:
  explicit Stepper(std::size_t n) : xs_(n), vs_(n) {
    for (auto& k : kx_) k.resize(n);
    for (auto& k : kv_) k.resize(n);
  }

  template <typename Field>
  void advance(Field&& field, Scheme scheme, double dt, std::vector<double>& x,
               std::vector<double>& v) {
    const std::size_t n = x.size();
    if (scheme == Scheme::ForwardEuler) {
      field(std::span<const double>(x), std::span<const double>(v), std::span<double>(kx_[0]),
            std::span<double>(kv_[0]));
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += dt * kx_[0][i];
        v[i] += dt * kv_[0][i];
      }
      return;
    }
    const double half = 0.5 * dt;
    field(std::span<const double>(x), std::span<const double>(v), std::span<double>(kx_[0]),
          std::span<double>(kv_[0]));
    stage(x, v, half, 0);
    field(std::span<const double>(xs_), std::span<const double>(vs_), std::span<double>(kx_[1]),
          std::span<double>(kv_[1]));
    stage(x, v, half, 1);
    field(std::span<const double>(xs_), std::span<const double>(vs_), std::span<double>(kx_[2]),
          std::span<double>(kv_[2]));
    stage(x, v, dt, 2);
    field(std::span<const double>(xs_), std::span<const double>(vs_), std::span<double>(kx_[3]),
          std::span<double>(kv_[3]));
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += w * (kx_[0][i] + 2.0 * kx_[1][i] + 2.0 * kx_[2][i] + kx_[3][i]);
      v[i] += w * (kv_[0][i] + 2.0 * kv_[1][i] + 2.0 * kv_[2][i] + kv_[3][i]);
    }
  }

 private:
  void stage(const std::vector<double>& x, const std::vector<double>& v, double h, int k) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      xs_[i] = x[i] + h * kx_[k][i];
      vs_[i] = v[i] + h * kv_[k][i];
    }
  }

  std::vector<double> xs_, vs_;
  std::vector<double> kx_[4], kv_[4];
};

namespace detail {

inline bool all_finite(const RingState& s) {
  auto finite = [](double d) { return std::isfinite(d); };
  return std::all_of(s.x.begin(), s.x.end(), finite) &&
         std::all_of(s.v.begin(), s.v.end(), finite);
}

inline void check_state(const RingState& state, const RingConfig& config) {
  config.validate();
  if (state.x.size() != config.n_vehicles || state.v.size() != config.n_vehicles) {
    throw ConfigError("state size does not match ring configuration");
  }
}

}  // namespace detail

/// One step of length dt; the input state is left untouched.
inline RingState step(const RingState& state, const ModelLaw& law, const OvFunction& ov,
                      const RingConfig& config, double dt, Scheme scheme) {
  detail::check_state(state, config);
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  RingState next = state;
  Stepper stepper(state.size());
  stepper.advance(RingVectorField(law, ov, config.ring_length), scheme, dt, next.x, next.v);
  next.t = state.t + dt;
  if (!detail::all_finite(next)) throw IntegrationDiverged(0, "integration diverged at step 0");
  return next;
}

/// Integrates from `initial` to initial.t + plan.t_end, recording every
/// record_stride-th step plus the initial and final states.
inline TrajectoryRecord run(const RingState& initial, const ModelLaw& law, const OvFunction& ov,
                            const RingConfig& config, const IntegrationPlan& plan) {
  detail::check_state(initial, config);
  plan.validate();

  const std::size_t n = config.n_vehicles;
  const std::size_t steps = plan.step_count();
  const double last_dt = plan.last_step();

  TrajectoryRecord rec;
  rec.meta.scheme = to_string(plan.scheme);
  rec.meta.dt = plan.dt;
  rec.meta.t_end = plan.t_end;
  rec.meta.steps = steps;
  rec.meta.record_stride = plan.record_stride;
  rec.meta.n_vehicles = n;
  rec.meta.ring_length = config.ring_length;

  std::vector<double> gaps(n);
  auto observe = [&](const RingState& s) {
    for (double vi : s.v) {
      rec.meta.min_velocity = std::min(rec.meta.min_velocity, vi);
      rec.meta.max_velocity = std::max(rec.meta.max_velocity, vi);
    }
    headways(s.x, config.ring_length, gaps);
    if (!rec.meta.collision && std::any_of(gaps.begin(), gaps.end(), [](double g) { return g <= 0.0; })) {
      rec.meta.collision = true;
      rec.meta.first_collision_time = s.t;
    }
  };
  auto record = [&](const RingState& s) {
    rec.times.push_back(s.t);
    rec.positions.push_row(s.x);
    rec.velocities.push_row(s.v);
  };

  RingState s = initial;
  if (!detail::all_finite(s)) throw TrajectoryDiverged(0, std::move(rec));
  observe(s);
  record(s);

  const RingVectorField field(law, ov, config.ring_length);
  Stepper stepper(n);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double h = k == steps ? last_dt : plan.dt;
    stepper.advance(field, plan.scheme, h, s.x, s.v);
    if (plan.clamp_nonnegative) {
      for (double& vi : s.v) vi = std::max(vi, 0.0);
    }
    s.t = k == steps ? initial.t + plan.t_end : initial.t + static_cast<double>(k) * plan.dt;
    if (!detail::all_finite(s)) throw TrajectoryDiverged(k, std::move(rec));
    observe(s);
    if (k % plan.record_stride == 0 || k == steps) record(s);
  }
  return rec;
}

}  // namespace ovd
