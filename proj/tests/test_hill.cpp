#include "flatmuscle/hill.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace flatmuscle {
namespace {

HillParams reference_params() {
  HillParams p;
  p.f_max = 100.0;
  p.l_min = 0.06;
  p.l_opt = 0.25;
  p.l_max = 0.30;
  p.tau_act = 0.01;
  p.tau_deact = 0.04;
  p.fl_width = 0.45;
  p.fv_shape = 4.0;
  p.fv_ceiling = 1.4;
  p.fp_stiffness = 1.0;
  return p;
}

TEST(ForceLength, PeaksAtOptimalLength) {
  const HillParams p = reference_params();
  EXPECT_DOUBLE_EQ(force_length(p.l_opt, p), 1.0);
}

TEST(ForceLength, OneWidthFromPeak) {
  const HillParams p = reference_params();
  EXPECT_NEAR(force_length(p.l_opt * (1.0 + p.fl_width), p), std::exp(-1.0), 1e-15);
}

TEST(ForceLength, DirectEvaluation) {
  const HillParams p = reference_params();
  const double expected = std::exp(-std::pow(0.2 / 0.45, 2));
  EXPECT_NEAR(force_length(p.l_opt * 0.8, p), expected, 1e-15);
  EXPECT_NEAR(expected, 0.8208, 1e-4);
}

TEST(ForceVelocity, IsometricGainIsExactlyOne) {
  const HillParams p = reference_params();
  EXPECT_DOUBLE_EQ(force_velocity(0.0, p), 1.0);
}

TEST(ForceVelocity, SaturatesAtCeilingAndFloor) {
  const HillParams p = reference_params();
  EXPECT_DOUBLE_EQ(force_velocity(1e3, p), p.fv_ceiling);
  EXPECT_DOUBLE_EQ(force_velocity(-1e3, p), kVelocityGainFloor);
}

TEST(ForceVelocity, GlobalBoundsAndMonotonicity) {
  const HillParams p = reference_params();
  double prev = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double v = -20.0 + 0.01 * i;
    const double g = force_velocity(v, p);
    EXPECT_GE(g, kVelocityGainFloor);
    EXPECT_LE(g, p.fv_ceiling);
    if (i > 0) EXPECT_GE(g, prev - 1e-15);
    prev = g;
  }
}

TEST(ForcePassive, ZeroBelowOptimal) {
  const HillParams p = reference_params();
  EXPECT_DOUBLE_EQ(force_passive(p.l_opt, p), 0.0);
  EXPECT_DOUBLE_EQ(force_passive(0.5 * p.l_opt, p), 0.0);
}

TEST(ForcePassive, NormalizedAtLongestLength) {
  const HillParams p = reference_params();
  EXPECT_NEAR(force_passive(p.l_max, p), p.f_max, 1e-12);
}

TEST(ForcePassive, QuadraticMidpoint) {
  const HillParams p = reference_params();
  EXPECT_NEAR(force_passive(0.5 * (p.l_opt + p.l_max), p), 0.25 * p.f_max, 1e-12);
}

TEST(HillTension, ZeroActivationShortMuscle) {
  const HillParams p = reference_params();
  MuscleState s{p.l_opt, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(hill_tension(0.0, s, p), 0.0);
}

TEST(HillTension, PeakIsometric) {
  const HillParams p = reference_params();
  MuscleState s{p.l_opt, 0.0, 1.0};
  EXPECT_NEAR(hill_tension(1.0, s, p), p.f_max, 1e-12);
}

TEST(HillTension, LinearInActivationAtOptimum) {
  HillParams p = reference_params();
  p.fp_stiffness = 0.0;
  MuscleState s{p.l_opt, 0.0, 0.5};
  EXPECT_NEAR(hill_tension(0.5, s, p), 0.5 * p.f_max, 1e-12);
}

TEST(InvertHill, PassiveForceExactlySuppliesDemand) {
  const HillParams p = reference_params();
  MuscleState s{0.28, 0.0, 0.0};
  const auto inv = invert_hill(force_passive(s.length, p), s, p);
  EXPECT_DOUBLE_EQ(inv.value, 0.0);
  EXPECT_TRUE(inv.feasible);
}

TEST(InvertHill, PeakDemand) {
  HillParams p = reference_params();
  p.fp_stiffness = 0.0;
  MuscleState s{p.l_opt, 0.0, 0.0};
  const auto inv = invert_hill(p.f_max, s, p);
  EXPECT_NEAR(inv.value, 1.0, 1e-12);
  EXPECT_TRUE(inv.feasible);
}

TEST(InvertHill, RoundTripRecoversActivation) {
  const HillParams p = reference_params();
  MuscleState s{0.27, -0.08, 0.0};
  const double tension = hill_tension(0.37, s, p);
  const auto inv = invert_hill(tension, s, p);
  EXPECT_NEAR(inv.value, 0.37, 1e-12);
  EXPECT_TRUE(inv.feasible);
}

TEST(InvertHill, RoundTripOverGrid) {
  const HillParams p = reference_params();
  for (int ia = 0; ia <= 20; ++ia) {
    for (int il = -4; il <= 4; ++il) {
      for (int iv = -3; iv <= 3; ++iv) {
        const double act = ia / 20.0;
        MuscleState s{p.l_opt * (1.0 + 0.1 * il), 0.3 * iv, 0.0};
        const auto inv = invert_hill(hill_tension(act, s, p), s, p);
        EXPECT_NEAR(inv.value, act, 1e-12);
        EXPECT_TRUE(inv.feasible);
      }
    }
  }
}

TEST(InvertHill, FlagsOverCapacityDemand) {
  HillParams p = reference_params();
  p.fp_stiffness = 0.0;
  MuscleState s{p.l_opt, 0.0, 0.0};
  const auto inv = invert_hill(2.0 * p.f_max, s, p);
  EXPECT_FALSE(inv.feasible);
  EXPECT_DOUBLE_EQ(inv.value, 1.0);
  const auto neg = invert_hill(-1.0, s, p);
  EXPECT_FALSE(neg.feasible);
  EXPECT_DOUBLE_EQ(neg.value, 0.0);
}

TEST(HillTension, MonotoneInActivation) {
  const HillParams p = reference_params();
  MuscleState s{0.26, 0.05, 0.0};
  double prev = -1.0;
  for (int i = 0; i <= 50; ++i) {
    const double t = hill_tension(i / 50.0, s, p);
    EXPECT_GE(t, prev);
    prev = t;
  }
}

TEST(ActivationRate, FixedPointAtEqualInput) {
  const HillParams p = reference_params();
  EXPECT_DOUBLE_EQ(activation_rate(0.3, 0.3, p), 0.0);
}

TEST(ActivationRate, FullStepUp) {
  const HillParams p = reference_params();
  // (1 - 0) / (0.01 * 0.5) with the activation branch.
  EXPECT_NEAR(activation_rate(0.0, 1.0, p), 200.0, 1e-12);
}

TEST(ActivationRate, FullStepDown) {
  const HillParams p = reference_params();
  // (0 - 1) / (0.04 / 2.0) with the deactivation branch.
  EXPECT_NEAR(activation_rate(1.0, 0.0, p), -50.0, 1e-12);
}

TEST(InvertActivation, SteadyState) {
  const HillParams p = reference_params();
  const auto inv = invert_activation(0.42, 0.0, p);
  EXPECT_DOUBLE_EQ(inv.value, 0.42);
  EXPECT_TRUE(inv.feasible);
}

TEST(InvertActivation, ActivationBranch) {
  const HillParams p = reference_params();
  const auto inv = invert_activation(0.5, 10.0, p);
  EXPECT_NEAR(inv.value, 0.5 + 10.0 * 0.01 * 1.25, 1e-12);
  EXPECT_TRUE(inv.feasible);
}

TEST(InvertActivation, DeactivationBranch) {
  const HillParams p = reference_params();
  const auto inv = invert_activation(0.5, -10.0, p);
  EXPECT_NEAR(inv.value, 0.5 - 10.0 * 0.04 / 1.25, 1e-12);
  EXPECT_TRUE(inv.feasible);
}

TEST(InvertActivation, RateConsistency) {
  const HillParams p = reference_params();
  for (int ia = 1; ia < 20; ++ia) {
    const double act = ia / 20.0;
    for (double rate : {-8.0, -1.0, -0.1, 0.1, 1.0, 8.0}) {
      const auto inv = invert_activation(act, rate, p);
      if (!inv.feasible) continue;
      EXPECT_NEAR(activation_rate(act, inv.value, p), rate, 1e-10);
    }
  }
}

TEST(IntegrateActivation, ConvergesMonotonicallyWithinBox) {
  const HillParams p = reference_params();
  for (double u : {0.0, 0.35, 1.0}) {
    double act = (u > 0.5) ? 0.0 : 1.0;
    double prev_gap = std::abs(u - act);
    for (int step = 0; step < 5000; ++step) {
      act = integrate_activation(act, u, p, 1e-3);
      ASSERT_GE(act, 0.0);
      ASSERT_LE(act, 1.0);
      const double gap = std::abs(u - act);
      ASSERT_LE(gap, prev_gap + 1e-15);
      prev_gap = gap;
    }
    EXPECT_NEAR(act, u, 1e-6);
  }
}

}  // namespace
}  // namespace flatmuscle
