#include "flatmuscle/planner.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace flatmuscle {
namespace {

TableGeometry reference_table() { return TableGeometry{}; }

PlannerConfig reference_config() {
  PlannerConfig cfg;
  cfg.plane_x = -1.55;
  cfg.vz_lo = 1.8;
  cfg.vz_hi = 2.6;
  cfg.target = {0.35, 1.0, -0.35, 0.35};
  cfg.c_r = 0.85;
  return cfg;
}

// Serve fixture used across the planner tests: launched from the opponent
// side, one bounce on the near side, then through the hitting plane.
BallState serve_fixture() {
  BallState b;
  b.p = Vec3(1.2, 0.1, 0.4);
  b.v = Vec3(-3.9, -0.2, 1.0);
  return b;
}

TEST(Propagate, DropOntoTable) {
  TableGeometry table = reference_table();
  table.c_v = 0.9;
  BallState b;
  b.p = Vec3(0.0, 0.0, 0.45);
  // Closed-form drop: impact time sqrt(2 z / g), speed g t.
  const double t_impact = std::sqrt(2.0 * 0.45 / table.g);
  EXPECT_NEAR(t_impact, 0.3029, 2e-4);
  const auto just_before = propagate(b, t_impact - 1e-9, table);
  ASSERT_TRUE(just_before);
  EXPECT_NEAR(just_before->v.z(), -table.g * t_impact, 1e-6);
  EXPECT_NEAR(just_before->v.z(), -2.971, 1e-3);
  const auto after = propagate(b, t_impact + 1e-6, table);
  ASSERT_TRUE(after);
  EXPECT_NEAR(after->v.z(), 0.9 * table.g * t_impact, 1e-4);
  EXPECT_NEAR(after->v.z(), 2.674, 1e-3);
}

TEST(Propagate, PureGravitySmallStep) {
  const TableGeometry table = reference_table();
  BallState b;
  b.p = Vec3(0.0, 0.0, 1.0);
  const auto next = propagate(b, 1e-3, table);
  ASSERT_TRUE(next);
  EXPECT_DOUBLE_EQ(next->v.z(), -table.g * 1e-3);
  EXPECT_DOUBLE_EQ(next->v.x(), 0.0);
}

TEST(Propagate, UnitHorizontalRestitutionPreservesXY) {
  TableGeometry table = reference_table();
  table.c_h = 1.0;
  BallState b;
  b.p = Vec3(0.0, 0.0, 0.3);
  b.v = Vec3(2.0, -1.0, 0.0);
  const auto after = propagate(b, 1.0, table);
  ASSERT_TRUE(after);
  EXPECT_DOUBLE_EQ(after->v.x(), 2.0);
  EXPECT_DOUBLE_EQ(after->v.y(), -1.0);
}

TEST(Propagate, EnergyAcrossBounces) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    TableGeometry table = reference_table();
    const bool elastic = trial % 2 == 0;
    if (elastic) {
      table.c_h = 1.0;
      table.c_v = 1.0;
    }
    BallState b;
    b.p = Vec3(0.0, 0.0, rng.uniform(0.2, 1.0));
    b.v = Vec3(rng.uniform(-4, 4), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double e0 = 0.5 * b.v.squaredNorm() + table.g * b.p.z();
    const auto after = propagate(b, rng.uniform(0.2, 1.5), table);
    if (!after) continue;
    const double e1 = 0.5 * after->v.squaredNorm() + table.g * after->p.z();
    if (elastic) EXPECT_NEAR(e1, e0, 1e-9 * std::max(1.0, e0));
    else EXPECT_LE(e1, e0 + 1e-9);
  }
}

TEST(Propagate, DegenerateChatterIsDeadBall) {
  const TableGeometry table = reference_table();
  BallState b;
  b.p = Vec3(0.0, 0.0, 1e-4);
  b.v = Vec3(1.0, 0.0, -0.01);
  EXPECT_FALSE(propagate(b, 0.5, table));
}

TEST(PredictStrike, BallMovingAwayHasNoIntersection) {
  const TableGeometry table = reference_table();
  const PlannerConfig cfg = reference_config();
  BallState b;
  b.p = Vec3(cfg.plane_x, 0.0, 0.3);
  b.v = Vec3(3.0, 0.0, 0.5);
  PlanStatus status;
  EXPECT_FALSE(predict_strike(b, cfg, table, &status));
  EXPECT_EQ(status, PlanStatus::no_intersection);
}

TEST(PredictStrike, LinearMotionWithoutGravity) {
  TableGeometry table = reference_table();
  table.g = 0.0;
  const PlannerConfig cfg = reference_config();
  BallState b;
  b.p = Vec3(1.0, 0.2, 0.4);
  b.v = Vec3(-2.0, 0.1, 0.0);
  const auto strike = predict_strike(b, cfg, table);
  ASSERT_TRUE(strike);
  const double expected_t = (1.0 - cfg.plane_x) / 2.0;
  EXPECT_NEAR(strike->t_strike, expected_t, 1e-12);
  EXPECT_NEAR(strike->p_strike.y(), 0.2 + 0.1 * expected_t, 1e-12);
  EXPECT_EQ(strike->bounces, 0);
}

TEST(PredictStrike, MatchesFineStepPropagationOracle) {
  const TableGeometry table = reference_table();
  const PlannerConfig cfg = reference_config();
  const BallState serve = serve_fixture();
  const auto strike = predict_strike(serve, cfg, table);
  ASSERT_TRUE(strike);
  EXPECT_EQ(strike->bounces, 1);

  // Brute-force oracle: march at 1 us, bracket the plane crossing, and
  // interpolate linearly inside the final step.
  BallState cur = serve;
  const double dt = 1e-6;
  double prev_x = cur.p.x();
  BallState prev = cur;
  bool crossed = false;
  for (int i = 0; i < 3000000; ++i) {
    const auto next = propagate(cur, dt, table);
    ASSERT_TRUE(next);
    if ((prev_x - cfg.plane_x) * (next->p.x() - cfg.plane_x) <= 0.0) {
      const double frac = (cfg.plane_x - prev.p.x()) / (next->p.x() - prev.p.x());
      const Vec3 p_cross = prev.p + frac * (next->p - prev.p);
      const double t_cross = prev.t + frac * dt;
      EXPECT_NEAR(strike->p_strike.y(), p_cross.y(), 1e-5);
      EXPECT_NEAR(strike->p_strike.z(), p_cross.z(), 1e-5);
      EXPECT_NEAR(strike->t_strike, t_cross, 1e-5);
      crossed = true;
      break;
    }
    prev = *next;
    prev_x = next->p.x();
    cur = *next;
  }
  EXPECT_TRUE(crossed);
}

TEST(PredictStrike, SecondBounceBeforePlaneFails) {
  const TableGeometry table = reference_table();
  const PlannerConfig cfg = reference_config();
  BallState b;
  b.p = Vec3(0.5, 0.0, 0.2);
  b.v = Vec3(-0.35, 0.0, -0.5);  // slow roll: bounces repeatedly first
  PlanStatus status;
  EXPECT_FALSE(predict_strike(b, cfg, table, &status));
}

TEST(SampleReturn, DegenerateBoxIsDeterministic) {
  const TableGeometry table = reference_table();
  PlannerConfig cfg = reference_config();
  cfg.target = {0.7, 0.7, 0.1, 0.1};
  cfg.vz_lo = cfg.vz_hi = 2.0;
  Rng rng(9);
  const Vec3 strike_p(-1.55, -0.05, 0.2);
  const auto v = sample_return(strike_p, cfg, table, rng, nullptr);
  ASSERT_TRUE(v);
  const double t = time_to_ground(0.2, 2.0, table.g);
  EXPECT_NEAR((2.0 + std::sqrt(4.0 + 2.0 * table.g * 0.2)) / table.g, t, 1e-12);
  EXPECT_NEAR(v->x(), (0.7 - strike_p.x()) / t, 1e-12);
  EXPECT_NEAR(v->y(), (0.1 - strike_p.y()) / t, 1e-12);
  EXPECT_NEAR(v->z(), 2.0, 1e-12);
  // Landing exactly on the box point.
  EXPECT_NEAR(strike_p.x() + v->x() * t, 0.7, 1e-12);
}

TEST(SampleReturn, AllLandingsInsideBoxAndOverNet) {
  const TableGeometry table = reference_table();
  const PlannerConfig cfg = reference_config();
  Rng rng(33);
  int accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 strike_p(-1.55, rng.uniform(-0.4, 0.4), rng.uniform(0.2, 0.5));
    const auto v = sample_return(strike_p, cfg, table, rng, nullptr);
    if (!v) continue;
    ++accepted;
    const double t = time_to_ground(strike_p.z(), v->z(), table.g);
    const double x_land = strike_p.x() + v->x() * t;
    const double y_land = strike_p.y() + v->y() * t;
    EXPECT_GE(x_land, cfg.target.x_lower - 1e-6);
    EXPECT_LE(x_land, cfg.target.x_upper + 1e-6);
    EXPECT_GE(y_land, cfg.target.y_lower - 1e-6);
    EXPECT_LE(y_land, cfg.target.y_upper + 1e-6);
    const double t_net = (table.net_x - strike_p.x()) / v->x();
    const double z_net = strike_p.z() + v->z() * t_net - 0.5 * table.g * t_net * t_net;
    EXPECT_GT(z_net, table.net_height);
  }
  EXPECT_GT(accepted, 9900);
}

TEST(RacketImpact, ElasticReflectionFixedPoint) {
  const auto impact = racket_impact(Vec3(-5, 0, 0), Vec3(5, 0, 0), 1.0);
  ASSERT_TRUE(impact);
  EXPECT_NEAR(impact->normal.x(), 1.0, 1e-15);
  EXPECT_NEAR(impact->v_hat.norm(), 0.0, 1e-15);
}

TEST(RacketImpact, OneDimensionalRestitution) {
  const auto impact = racket_impact(Vec3(-4, 0, 0), Vec3(6, 0, 0), 0.8);
  ASSERT_TRUE(impact);
  EXPECT_NEAR(impact->v_hat.x(), 2.8 / 1.8, 1e-12);
  // Applying the restitution law about the computed racket reproduces the
  // requested outgoing velocity.
  const Vec3 v_out = apply_racket_restitution(Vec3(-4, 0, 0), impact->v_hat,
                                              impact->normal, 0.8);
  EXPECT_NEAR(v_out.x(), 6.0, 1e-12);
}

TEST(RacketImpact, RestitutionLawReproducesSampledVelocity) {
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 v_i(rng.uniform(-6, 0), rng.uniform(-2, 2), rng.uniform(-3, 1));
    const Vec3 v_o(rng.uniform(1, 6), rng.uniform(-2, 2), rng.uniform(0, 3));
    const double c_r = rng.uniform(0.3, 1.0);
    const auto impact = racket_impact(v_i, v_o, c_r);
    ASSERT_TRUE(impact);
    const Vec3 v_out = apply_racket_restitution(v_i, impact->v_hat, impact->normal, c_r);
    EXPECT_LT((v_out - v_o).cwiseAbs().maxCoeff(), 1e-12);
    // v_hat is parallel to the normal and bounded by the normal speeds.
    EXPECT_LT(impact->v_hat.cross(impact->normal).norm(), 1e-12);
    EXPECT_LE(impact->v_hat.norm(),
              std::max(std::abs(v_o.dot(impact->normal)),
                       std::abs(v_i.dot(impact->normal))) + 1e-12);
  }
}

TEST(RacketImpact, DegenerateWhenVelocitiesCoincide) {
  PlanStatus status;
  EXPECT_FALSE(racket_impact(Vec3(1, 2, 3), Vec3(1, 2, 3), 0.8, &status));
  EXPECT_EQ(status, PlanStatus::degenerate_impact);
}

TEST(NormalToQuaternion, IdentityAndQuarterTurn) {
  EXPECT_NEAR(normal_to_quaternion(Vec3::UnitX()).angularDistance(Quat::Identity()),
              0.0, 1e-15);
  const Quat q = normal_to_quaternion(Vec3::UnitZ());
  EXPECT_NEAR((q * Vec3::UnitX() - Vec3::UnitZ()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(2.0 * std::acos(std::clamp(q.w(), -1.0, 1.0)), M_PI / 2.0, 1e-12);
}

TEST(NormalToQuaternion, RandomRoundTrip) {
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    Vec3 u(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (u.norm() < 1e-6) continue;
    u.normalize();
    const Quat q = normal_to_quaternion(u);
    EXPECT_NEAR(q.norm(), 1.0, 1e-12);
    EXPECT_LT((q * kRacketFaceNormal - u).norm(), 1e-12);
  }
}

TEST(NormalToQuaternion, AntipodalHalfTurnAboutZ) {
  const Quat q = normal_to_quaternion(-Vec3::UnitX());
  EXPECT_NEAR(q.w(), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q.z()), 1.0, 1e-15);
  EXPECT_LT((q * kRacketFaceNormal + Vec3::UnitX()).norm(), 1e-12);
}

TEST(Plan, DeterministicForFixedSeed) {
  const TableGeometry table = reference_table();
  const PlannerConfig cfg = reference_config();
  const BallState serve = serve_fixture();
  Rng rng_a(42), rng_b(42);
  const PlanResult a = plan(serve, cfg, table, rng_a);
  const PlanResult b = plan(serve, cfg, table, rng_b);
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  EXPECT_EQ(a.command.p_hat, b.command.p_hat);
  EXPECT_EQ(a.command.v_hat, b.command.v_hat);
  EXPECT_EQ(a.command.o_hat.coeffs(), b.command.o_hat.coeffs());
}

TEST(Plan, BallMovingAwayFails) {
  const TableGeometry table = reference_table();
  const PlannerConfig cfg = reference_config();
  BallState b;
  b.p = Vec3(0.0, 0.0, 0.3);
  b.v = Vec3(2.0, 0.0, 0.0);
  Rng rng(1);
  EXPECT_EQ(plan(b, cfg, table, rng).status, PlanStatus::no_intersection);
}

TEST(Plan, CommandInvariantsAndSelfConsistency) {
  const TableGeometry table = reference_table();
  const PlannerConfig cfg = reference_config();
  Rng rng(2024);
  int planned = 0;
  for (int i = 0; i < 1500 && planned < 1000; ++i) {
    BallState serve;
    serve.p = Vec3(rng.uniform(1.1, 1.3), rng.uniform(-0.25, 0.25),
                   rng.uniform(0.35, 0.45));
    serve.v = Vec3(rng.uniform(-4.2, -3.6), rng.uniform(-0.25, 0.25),
                   rng.uniform(0.9, 1.1));
    const PlanResult result = plan(serve, cfg, table, rng);
    if (!result.ok()) continue;
    ++planned;
    // Invariants: unit quaternion, command on the hitting plane.
    EXPECT_NEAR(result.command.o_hat.norm(), 1.0, 1e-12);
    EXPECT_NEAR(result.command.p_hat.x(), cfg.plane_x, 1e-9);
    // Executing the command under the same flight and impact models lands
    // the ball inside the target box and clears the net.
    const Vec3 face_normal = result.command.o_hat * kRacketFaceNormal;
    const Vec3 v_out = apply_racket_restitution(result.v_in, result.command.v_hat,
                                                face_normal, cfg.c_r);
    EXPECT_LT((v_out - result.v_out).cwiseAbs().maxCoeff(), 1e-9);
    const double t = time_to_ground(result.command.p_hat.z(), v_out.z(), table.g);
    const double x_land = result.command.p_hat.x() + v_out.x() * t;
    const double y_land = result.command.p_hat.y() + v_out.y() * t;
    EXPECT_GE(x_land, cfg.target.x_lower - 1e-6);
    EXPECT_LE(x_land, cfg.target.x_upper + 1e-6);
    EXPECT_GE(y_land, cfg.target.y_lower - 1e-6);
    EXPECT_LE(y_land, cfg.target.y_upper + 1e-6);
    const double t_net = (table.net_x - result.command.p_hat.x()) / v_out.x();
    const double z_net = result.command.p_hat.z() + v_out.z() * t_net -
                         0.5 * table.g * t_net * t_net;
    EXPECT_GT(z_net, table.net_height);
  }
  EXPECT_EQ(planned, 1000);
}

}  // namespace
}  // namespace flatmuscle
