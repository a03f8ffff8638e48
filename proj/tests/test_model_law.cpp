#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ovd/model_law.hpp"

using ovd::ModelLaw;

TEST(ModelLaw, HybridAcceleration) {
  const auto law = ModelLaw::hybrid_ovd(5.0);
  EXPECT_EQ(law.accel(0.0, 20.0), 5.0);
  EXPECT_EQ(law.accel(20.0, 20.0), 0.0);
  EXPECT_DOUBLE_EQ(law.accel(10.0, 20.0), 3.75);
  EXPECT_LT(law.accel(25.0, 20.0), 0.0);
}

TEST(ModelLaw, ClassicalAcceleration) {
  const auto law = ModelLaw::classical_ovm(0.5);
  EXPECT_EQ(law.accel(20.0, 20.0), 0.0);
  EXPECT_DOUBLE_EQ(law.accel(10.0, 20.0), 5.0);
}

TEST(ModelLaw, EffectiveSensitivity) {
  const auto law = ModelLaw::hybrid_ovd(5.0);
  EXPECT_DOUBLE_EQ(law.effective_sensitivity(20.0, 20.0), 0.5);
  EXPECT_DOUBLE_EQ(law.effective_sensitivity(0.0, 20.0), 0.25);
  for (double V : {0.3, 1.0, 7.5, 33.0}) {
    EXPECT_DOUBLE_EQ(law.effective_sensitivity(V, V), 2.0 * 5.0 / V);
  }
  EXPECT_EQ(ModelLaw::classical_ovm(0.7).effective_sensitivity(3.0, 9.0), 0.7);
}

TEST(ModelLaw, Jerk) {
  const auto hybrid = ModelLaw::hybrid_ovd(5.0);
  EXPECT_EQ(hybrid.jerk(0.0, 20.0), 0.0);
  EXPECT_EQ(hybrid.jerk(20.0, 20.0), 0.0);
  EXPECT_DOUBLE_EQ(hybrid.jerk(10.0, 20.0), -0.9375);
  EXPECT_DOUBLE_EQ(ModelLaw::classical_ovm(0.5).jerk(10.0, 20.0), -2.5);
}

TEST(ModelLaw, RejectsInvalidParameters) {
  EXPECT_THROW(ModelLaw::hybrid_ovd(0.0), ovd::ConfigError);
  EXPECT_THROW(ModelLaw::hybrid_ovd(1.0, -1.0), ovd::ConfigError);
  EXPECT_THROW(ModelLaw::classical_ovm(-0.5), ovd::ConfigError);
  const auto law = ModelLaw::hybrid_ovd(1.0);
  EXPECT_THROW(law.accel(std::numeric_limits<double>::quiet_NaN(), 1.0), ovd::DomainError);
  EXPECT_THROW(law.jerk(1.0, std::numeric_limits<double>::infinity()), ovd::DomainError);
}

TEST(ModelLaw, VelocityFloorTurnsZeroTargetIntoBraking) {
  const auto law = ModelLaw::hybrid_ovd(2.0);
  const double acc = law.accel(0.5, 0.0);
  EXPECT_TRUE(std::isfinite(acc));
  EXPECT_LT(acc, -1e6);
}

TEST(ModelLaw, FactorizationIdentity) {
  const double a = 3.7;
  const auto law = ModelLaw::hybrid_ovd(a);
  for (int i = 1; i <= 40; ++i) {
    const double V = 0.05 * i * i;
    for (int j = 0; j <= 40; ++j) {
      const double v = V * j / 40.0;
      const double lhs = law.accel(v, V);
      const double rhs = a * (V + v) / (V * V) * (V - v);
      EXPECT_LE(std::abs(lhs - rhs), 4.0 * std::numeric_limits<double>::epsilon() * a)
          << "v = " << v << ", V = " << V;
    }
  }
}

TEST(ModelLaw, BoundedByAOnZeroToV) {
  const double a = 5.0;
  const auto law = ModelLaw::hybrid_ovd(a);
  for (double V : {0.2, 1.0, 20.0}) {
    for (int j = 0; j <= 100; ++j) {
      const double v = V * j / 100.0;
      EXPECT_LE(std::abs(law.accel(v, V)), a);
    }
  }
}

TEST(ModelLaw, OverspeedSigns) {
  const auto law = ModelLaw::hybrid_ovd(5.0);
  for (double v = 20.5; v < 60.0; v += 0.5) {
    EXPECT_LT(law.accel(v, 20.0), 0.0);
    EXPECT_GT(law.jerk(v, 20.0), 0.0);
  }
}

TEST(ModelLaw, LocalCorrespondenceRemainderIsQuadratic) {
  const double a = 5.0, V = 20.0;
  const auto law = ModelLaw::hybrid_ovd(a);
  std::vector<double> logd, logr;
  for (double rel : {1e-4, 5e-5, 2.5e-5, 1.25e-5}) {
    const double dv = rel * V;
    const double remainder = std::abs(law.accel(V + dv, V) - 2.0 * a / V * (-dv));
    logd.push_back(std::log(dv));
    logr.push_back(std::log(remainder));
  }
  // Remainder is exactly a dv^2 / V^2; check the fitted slope.
  const double slope = (logr.back() - logr.front()) / (logd.back() - logd.front());
  EXPECT_NEAR(slope, 2.0, 0.1);
}

TEST(SingleVehicle, ClosedForm) {
  EXPECT_EQ(ovd::single_vehicle_solution(5.0, 20.0, 3.0, 0.0), 3.0);
  EXPECT_NEAR(ovd::single_vehicle_solution(5.0, 20.0, 0.0, 2.0), 9.24234314520019517, 1e-12);
  EXPECT_NEAR(ovd::single_vehicle_solution(5.0, 20.0, 0.0, 100.0 * 20.0 / 5.0), 20.0, 1e-6);
  double prev = 0.0;
  for (double t = 0.1; t < 20.0; t += 0.1) {
    const double v = ovd::single_vehicle_solution(5.0, 20.0, 0.0, t);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_THROW(ovd::single_vehicle_solution(5.0, 20.0, 20.0, 1.0), ovd::DomainError);
  EXPECT_THROW(ovd::single_vehicle_solution(5.0, 20.0, 25.0, 1.0), ovd::DomainError);
}

TEST(SingleVehicle, JerkMatchesFiniteDifferenceOfAcceleration) {
  const double a = 5.0, V = 20.0, h = 1e-4;
  const auto law = ModelLaw::hybrid_ovd(a);
  for (double t = 0.25; t <= 8.0; t += 0.25) {
    const double vp = ovd::single_vehicle_solution(a, V, 0.0, t + h);
    const double vm = ovd::single_vehicle_solution(a, V, 0.0, t - h);
    const double fd = (law.accel(vp, V) - law.accel(vm, V)) / (2.0 * h);
    const double exact = law.jerk(ovd::single_vehicle_solution(a, V, 0.0, t), V);
    EXPECT_LT(std::abs(fd - exact), 1e-3 * std::abs(exact)) << "t = " << t;
  }
}
