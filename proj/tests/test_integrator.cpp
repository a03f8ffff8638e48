#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ovd/integrator.hpp"

using namespace ovd;

namespace {

struct Preset {
  RingConfig ring;
  double ratio;
};

const Preset kStable{{100, 200.0}, 2.2};
const Preset kUnstable{{100, 50.0}, 0.5};

ModelLaw hybrid_for(const Preset& p) {
  const auto ov = OvFunction::tanh();
  const double b = p.ring.spacing();
  return ModelLaw::hybrid_ovd(p.ratio * ov.eval(b) * ov.derivative(b));
}

RingState perturbed(const Preset& p) {
  return perturb(uniform_flow(p.ring, OvFunction::tanh()), 0, 0.01 * p.ring.spacing());
}

double spread(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

// Max |v(t) - v_exact(t)| for a lone vehicle chasing a fixed V = 20 from rest.
double single_vehicle_error(Scheme scheme, double dt) {
  const double a = 5.0, V = 20.0;
  const auto law = ModelLaw::hybrid_ovd(a);
  auto field = [&](std::span<const double> x, std::span<const double> v, std::span<double> dx,
                   std::span<double> dv) {
    (void)x;
    dx[0] = v[0];
    dv[0] = law.accel(v[0], V);
  };
  std::vector<double> x{0.0}, v{0.0};
  Stepper stepper(1);
  const int steps = static_cast<int>(std::lround(10.0 / dt));
  double worst = 0.0;
  for (int k = 1; k <= steps; ++k) {
    stepper.advance(field, scheme, dt, x, v);
    worst = std::max(worst, std::abs(v[0] - single_vehicle_solution(a, V, 0.0, k * dt)));
  }
  return worst;
}

}  // namespace

TEST(Integrator, StepPreservesUniformFlow) {
  const auto ov = OvFunction::tanh();
  const RingConfig cfg{100, 200.0};
  const auto s = uniform_flow(cfg, ov);
  for (Scheme scheme : {Scheme::ForwardEuler, Scheme::RungeKutta4}) {
    const auto next = step(s, hybrid_for(kStable), ov, cfg, 0.1, scheme);
    EXPECT_DOUBLE_EQ(next.t, 0.1);
    for (std::size_t i = 0; i < 100; ++i) {
      EXPECT_NEAR(next.x[i], s.x[i] + 0.1 * s.v[i], 1e-14);
      EXPECT_EQ(next.v[i], s.v[i]);
    }
  }
}

TEST(Integrator, EulerUsesFrozenPreStepState) {
  const auto ov = OvFunction::tanh();
  const RingConfig cfg{4, 8.0};
  const auto law = ModelLaw::hybrid_ovd(0.4);
  RingState s;
  s.x = {0.0, 1.5, 4.25, 6.0};
  s.v = {0.7, 0.9, 0.8, 1.0};
  const auto next = step(s, law, ov, cfg, 0.1, Scheme::ForwardEuler);
  const auto h = headways(s, cfg);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(next.x[i], s.x[i] + 0.1 * s.v[i]);
    EXPECT_EQ(next.v[i], s.v[i] + 0.1 * law.accel(s.v[i], ov.eval(h[i])));
  }
}

TEST(Integrator, RungeKutta4MatchesClosedForm) {
  EXPECT_LE(single_vehicle_error(Scheme::RungeKutta4, 0.01), 1e-6);
}

TEST(Integrator, ForwardEulerIsFirstOrder) {
  const double coarse = single_vehicle_error(Scheme::ForwardEuler, 0.1);
  const double fine = single_vehicle_error(Scheme::ForwardEuler, 0.05);
  EXPECT_NEAR(coarse / fine, 2.0, 0.4);
}

TEST(Integrator, PlanStepCountAndRecordLayout) {
  IntegrationPlan plan{Scheme::ForwardEuler, 0.1, 100.0, 1, false};
  EXPECT_EQ(plan.step_count(), 1000u);
  EXPECT_EQ(plan.last_step(), 0.1);
  plan.t_end = 1.05;
  EXPECT_EQ(plan.step_count(), 11u);
  EXPECT_NEAR(plan.last_step(), 0.05, 1e-12);

  const auto ov = OvFunction::tanh();
  const RingConfig cfg{10, 20.0};
  const auto init = perturb(uniform_flow(cfg, ov), 0, 0.02);
  const auto law = ModelLaw::hybrid_ovd(0.1);
  const auto r1 = run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 0.1, 10.0, 1, false});
  EXPECT_EQ(r1.samples(), 101u);
  EXPECT_EQ(r1.times.front(), 0.0);
  EXPECT_EQ(r1.times.back(), 10.0);
  EXPECT_TRUE(std::is_sorted(r1.times.begin(), r1.times.end()));
  const auto r2 = run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 0.1, 10.0, 2, false});
  EXPECT_EQ(r2.samples(), 51u);
  for (std::size_t s = 0; s < r2.samples(); ++s) {
    EXPECT_EQ(r2.times[s], r1.times[2 * s]);
    for (std::size_t n = 0; n < 10; ++n) EXPECT_EQ(r2.positions(s, n), r1.positions(2 * s, n));
  }
  // Final state is always recorded, even off-stride.
  const auto r3 = run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 0.1, 10.0, 3, false});
  EXPECT_EQ(r3.samples(), 100u / 3u + 2u);
  EXPECT_EQ(r3.times.back(), 10.0);
}

TEST(Integrator, RejectsInvalidPlans) {
  const auto ov = OvFunction::tanh();
  const RingConfig cfg{10, 20.0};
  const auto init = uniform_flow(cfg, ov);
  const auto law = ModelLaw::hybrid_ovd(0.1);
  EXPECT_THROW(run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 0.0, 1.0, 1, false}), ConfigError);
  EXPECT_THROW(run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 2.0, 1.0, 1, false}), ConfigError);
  EXPECT_THROW(run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 0.1, 1.0, 0, false}), ConfigError);
  EXPECT_THROW(run(init, law, ov, RingConfig{11, 20.0}, IntegrationPlan{}), ConfigError);
}

TEST(Integrator, EquilibriumPreservedOverLongHorizon) {
  const auto ov = OvFunction::tanh();
  for (const auto& p : {kStable, kUnstable}) {
    const auto init = uniform_flow(p.ring, ov);
    const double c = init.v[0];
    for (Scheme scheme : {Scheme::ForwardEuler, Scheme::RungeKutta4}) {
      const auto rec = run(init, hybrid_for(p), ov, p.ring, IntegrationPlan{scheme, 0.1, 100.0, 1, false});
      for (std::size_t s = 0; s < rec.samples(); ++s) {
        for (double v : rec.velocities.row(s)) ASSERT_LE(std::abs(v - c), 1e-12);
      }
    }
  }
}

TEST(Integrator, HeadwaySumConserved) {
  const auto ov = OvFunction::tanh();
  for (const auto& p : {kStable, kUnstable}) {
    const auto rec = run(perturbed(p), hybrid_for(p), ov, p.ring, IntegrationPlan{});
    std::vector<double> gaps(p.ring.n_vehicles);
    for (std::size_t s = 0; s < rec.samples(); ++s) {
      headways(rec.positions.row(s), p.ring.ring_length, gaps);
      double sum = 0.0;
      for (double g : gaps) sum += g;
      ASSERT_NEAR(sum, p.ring.ring_length, 1e-9 * p.ring.ring_length);
    }
  }
}

TEST(Integrator, StablePresetDecays) {
  const auto ov = OvFunction::tanh();
  const auto rec = run(perturbed(kStable), hybrid_for(kStable), ov, kStable.ring, IntegrationPlan{});
  const double c = ov.eval(2.0);
  auto deviation = [&](std::size_t s) {
    double m = 0.0;
    for (double v : rec.velocities.row(s)) m = std::max(m, std::abs(v - c));
    return m;
  };
  double early = 0.0;
  for (std::size_t s = 1; s <= 100; ++s) early = std::max(early, deviation(s));
  EXPECT_LT(deviation(rec.samples() - 1), early);
  EXPECT_FALSE(rec.meta.collision);
}

TEST(Integrator, UnstablePresetGrows) {
  const auto ov = OvFunction::tanh();
  const auto rec = run(perturbed(kUnstable), hybrid_for(kUnstable), ov, kUnstable.ring, IntegrationPlan{});
  EXPECT_GT(spread(rec.velocities.row(rec.samples() - 1)), 10.0 * spread(rec.velocities.row(10)));
  EXPECT_GT(rec.meta.min_velocity, 0.0);
}

TEST(Integrator, UnstableLongHorizonNeverStops) {
  const auto ov = OvFunction::tanh();
  const auto rec = run(perturbed(kUnstable), hybrid_for(kUnstable), ov, kUnstable.ring,
                       IntegrationPlan{Scheme::ForwardEuler, 0.1, 300.0, 1, false});
  EXPECT_GT(rec.meta.min_velocity, 0.0);
  double min_sampled = rec.velocities(0, 0);
  for (std::size_t s = 0; s < rec.samples(); ++s) {
    for (double v : rec.velocities.row(s)) min_sampled = std::min(min_sampled, v);
  }
  EXPECT_EQ(min_sampled, rec.meta.min_velocity);
}

TEST(Integrator, SchemesAgreeInStableRegime) {
  const auto ov = OvFunction::tanh();
  const auto euler = run(perturbed(kStable), hybrid_for(kStable), ov, kStable.ring, IntegrationPlan{});
  const auto rk4 = run(perturbed(kStable), hybrid_for(kStable), ov, kStable.ring,
                       IntegrationPlan{Scheme::RungeKutta4, 0.1, 100.0, 1, false});
  const auto last = euler.samples() - 1;
  for (std::size_t n = 0; n < 100; ++n) {
    EXPECT_NEAR(euler.velocities(last, n), rk4.velocities(last, n), 1e-2);
  }
}

TEST(Integrator, Deterministic) {
  const auto ov = OvFunction::tanh();
  const auto a = run(perturbed(kUnstable), hybrid_for(kUnstable), ov, kUnstable.ring, IntegrationPlan{});
  const auto b = run(perturbed(kUnstable), hybrid_for(kUnstable), ov, kUnstable.ring, IntegrationPlan{});
  EXPECT_TRUE(a == b);
}

TEST(Integrator, DivergenceCarriesStepAndPartialRecord) {
  const auto ov = OvFunction::tanh();
  const RingConfig cfg{10, 20.0};
  const auto init = perturb(uniform_flow(cfg, ov), 0, 0.5);
  const auto law = ModelLaw::classical_ovm(1e3);
  try {
    run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 1.0, 1000.0, 1, false});
    FAIL() << "expected divergence";
  } catch (const TrajectoryDiverged& e) {
    EXPECT_GT(e.step(), 0u);
    EXPECT_EQ(e.partial().samples(), e.step());
  }
}

TEST(Integrator, CollisionIsFlaggedNotFatal) {
  const auto ov = OvFunction::tanh();
  const RingConfig cfg{10, 20.0};
  const auto init = perturb(uniform_flow(cfg, ov), 0, 3.0);
  const auto rec = run(init, ModelLaw::classical_ovm(0.5), ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 0.1, 1.0, 1, false});
  EXPECT_TRUE(rec.meta.collision);
  EXPECT_EQ(rec.meta.first_collision_time, 0.0);
  EXPECT_EQ(rec.samples(), 11u);
}

TEST(Integrator, OptionalClampKeepsSpeedsNonNegative) {
  const auto ov = OvFunction::tanh();
  const RingConfig cfg{10, 20.0};
  const auto init = perturb(uniform_flow(cfg, ov), 0, 2.5);
  const auto law = ModelLaw::classical_ovm(5.0);
  const auto free = run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 0.1, 5.0, 1, false});
  const auto clamped = run(init, law, ov, cfg, IntegrationPlan{Scheme::ForwardEuler, 0.1, 5.0, 1, true});
  EXPECT_LT(free.meta.min_velocity, 0.0);
  EXPECT_GE(clamped.meta.min_velocity, 0.0);
}
