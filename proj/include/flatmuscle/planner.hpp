#pragma once

#include <cmath>
#include <optional>

#include "flatmuscle/core.hpp"

namespace flatmuscle {

// World frame: x toward the opponent, y lateral, z up, table surface z = 0.
struct BallState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double t = 0.0;
};

struct TableGeometry {
  double length = 2.74;
  double width = 1.525;
  double net_height = 0.1525;
  double net_x = 0.0;
  double c_h = 0.95;  // horizontal table restitution
  double c_v = 0.90;  // vertical table restitution
  double g = 9.81;

  double half_length() const { return 0.5 * length; }
  double half_width() const { return 0.5 * width; }
  bool on_table(double x, double y) const {
    return std::abs(x - net_x) <= half_length() && std::abs(y) <= half_width();
  }
};

struct TargetBox {
  double x_lower = 0.0;
  double x_upper = 0.0;
  double y_lower = 0.0;
  double y_upper = 0.0;
};

struct PlannerConfig {
  double plane_x = -1.55;      // virtual hitting plane
  double vz_lo = 1.8;          // sampled vertical return velocity range
  double vz_hi = 2.6;
  TargetBox target;            // landing box on the opponent's table
  double c_r = 0.85;           // racket restitution
  std::uint64_t seed = 0;      // used only when the planner owns its rng
};

struct PlannerCommand {
  Vec3 p_hat = Vec3::Zero();   // racket position at strike
  Vec3 v_hat = Vec3::Zero();   // racket velocity at strike
  Quat o_hat = Quat::Identity();  // racket face orientation
};

// Canonical racket face normal in the racket frame.
inline const Vec3 kRacketFaceNormal = Vec3::UnitX();

enum class PlanStatus {
  ok,
  dead_ball,
  no_intersection,
  sampling_exhausted,
  degenerate_impact,
};

// Time for the ballistic arc z(s) = p_z + v_z s - g/2 s^2 to reach z = 0,
// smallest non-negative root; negative when it never does within [0, inf).
inline double time_to_ground(double p_z, double v_z, double g) {
  // g/2 s^2 - v_z s - p_z = 0
  const double disc = v_z * v_z + 2.0 * g * p_z;
  if (disc < 0.0) return -1.0;
  const double root = (v_z + std::sqrt(disc)) / g;
  return root >= 0.0 ? root : -1.0;
}

// Closed-form ballistic flight with exact bounce events on the z = 0 plane:
// v' = g while airborne, v+ = diag(c_h, c_h, -c_v) v- at impact. Returns
// nullopt (dead ball) when the post-bounce apex falls under 1 mm.
inline std::optional<BallState> propagate(BallState ball, double dt,
                                          const TableGeometry& table) {
  double remaining = dt;
  while (remaining > 0.0) {
    const double t_hit = (ball.p.z() <= 0.0 && ball.v.z() < 0.0)
                             ? 0.0
                             : time_to_ground(ball.p.z(), ball.v.z(), table.g);
    if (t_hit < 0.0 || t_hit >= remaining) {
      ball.p.x() += ball.v.x() * remaining;
      ball.p.y() += ball.v.y() * remaining;
      ball.p.z() += ball.v.z() * remaining - 0.5 * table.g * remaining * remaining;
      ball.v.z() -= table.g * remaining;
      ball.t += remaining;
      return ball;
    }
    ball.p.x() += ball.v.x() * t_hit;
    ball.p.y() += ball.v.y() * t_hit;
    ball.p.z() = 0.0;
    ball.v.z() -= table.g * t_hit;
    ball.t += t_hit;
    remaining -= t_hit;
    ball.v.x() *= table.c_h;
    ball.v.y() *= table.c_h;
    ball.v.z() *= -table.c_v;
    const double apex = ball.v.z() * ball.v.z() / (2.0 * table.g);
    if (apex < 1e-3) return std::nullopt;  // degenerate chatter
  }
  return ball;
}

struct StrikePrediction {
  Vec3 p_strike = Vec3::Zero();
  Vec3 v_in = Vec3::Zero();
  double t_strike = 0.0;  // absolute time (ball.t at crossing)
  int bounces = 0;
};

// First crossing of x = plane_x after at most one table bounce. The x
// motion is piecewise linear between bounce events, so each segment's
// crossing is solved exactly.
inline std::optional<StrikePrediction> predict_strike(const BallState& ball,
                                                      const PlannerConfig& cfg,
                                                      const TableGeometry& table,
                                                      PlanStatus* status = nullptr) {
  const auto fail = [&](PlanStatus s) {
    if (status) *status = s;
    return std::nullopt;
  };
  if ((cfg.plane_x - ball.p.x()) * ball.v.x() <= 0.0)
    return fail(PlanStatus::no_intersection);

  BallState cur = ball;
  const double deadline = ball.t + 3.0;
  int bounces = 0;
  while (cur.t < deadline) {
    if (std::abs(cur.v.x()) < 1e-12) return fail(PlanStatus::no_intersection);
    const double t_cross = (cfg.plane_x - cur.p.x()) / cur.v.x();
    if (t_cross < 0.0) return fail(PlanStatus::no_intersection);
    const double t_bounce = time_to_ground(cur.p.z(), cur.v.z(), table.g);
    if (t_bounce < 0.0 || t_cross <= t_bounce) {
      if (cur.t + t_cross > deadline) return fail(PlanStatus::no_intersection);
      StrikePrediction out;
      out.p_strike = Vec3(cfg.plane_x, cur.p.y() + cur.v.y() * t_cross,
                          cur.p.z() + cur.v.z() * t_cross -
                              0.5 * table.g * t_cross * t_cross);
      out.v_in = Vec3(cur.v.x(), cur.v.y(), cur.v.z() - table.g * t_cross);
      out.t_strike = cur.t + t_cross;
      out.bounces = bounces;
      if (status) *status = PlanStatus::ok;
      return out;
    }
    if (++bounces > 1) return fail(PlanStatus::no_intersection);
    const auto next = propagate(cur, t_bounce + 1e-12, table);
    if (!next) return fail(PlanStatus::dead_ball);
    cur = *next;
  }
  return fail(PlanStatus::no_intersection);
}

// Sample an outgoing ball velocity whose free flight from strike_p lands in
// the target box: v_z uniform over the configured range, flight time from
// the landing condition, then horizontal components uniform over the
// displacement-referenced bounds. Rejection keeps net clearance.
inline std::optional<Vec3> sample_return(const Vec3& strike_p, const PlannerConfig& cfg,
                                         const TableGeometry& table, Rng& rng,
                                         PlanStatus* status = nullptr) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double vz = rng.uniform(cfg.vz_lo, cfg.vz_hi);
    const double t = time_to_ground(strike_p.z(), vz, table.g);
    if (t <= 0.0) continue;
    const double vx =
        rng.uniform((cfg.target.x_lower - strike_p.x()) / t,
                    (cfg.target.x_upper - strike_p.x()) / t);
    const double vy =
        rng.uniform((cfg.target.y_lower - strike_p.y()) / t,
                    (cfg.target.y_upper - strike_p.y()) / t);
    if (std::abs(vx) < 1e-12) continue;
    const double t_net = (table.net_x - strike_p.x()) / vx;
    if (t_net <= 0.0 || t_net >= t) continue;
    const double z_net =
        strike_p.z() + vz * t_net - 0.5 * table.g * t_net * t_net;
    if (z_net <= table.net_height) continue;
    if (status) *status = PlanStatus::ok;
    return Vec3(vx, vy, vz);
  }
  if (status) *status = PlanStatus::sampling_exhausted;
  return std::nullopt;
}

struct RacketImpact {
  Vec3 v_hat = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
};

// Frictionless restitution along the racket normal: the racket velocity
// that turns incoming v_i into outgoing v_o.
inline std::optional<RacketImpact> racket_impact(const Vec3& v_i, const Vec3& v_o,
                                                 double c_r,
                                                 PlanStatus* status = nullptr) {
  const Vec3 diff = v_o - v_i;
  if (diff.norm() < 1e-9) {
    if (status) *status = PlanStatus::degenerate_impact;
    return std::nullopt;
  }
  RacketImpact out;
  out.normal = diff.normalized();
  out.v_hat = ((v_o.dot(out.normal) + c_r * v_i.dot(out.normal)) / (1.0 + c_r)) *
              out.normal;
  if (status) *status = PlanStatus::ok;
  return out;
}

// Minimal rotation taking the canonical face normal onto u; the antipodal
// case maps to a half turn about the world z axis.
inline Quat normal_to_quaternion(const Vec3& u) {
  const double w = 1.0 + kRacketFaceNormal.dot(u);
  if (w < 1e-12) return Quat(0.0, 0.0, 0.0, 1.0);
  const Vec3 xyz = kRacketFaceNormal.cross(u);
  Quat q(w, xyz.x(), xyz.y(), xyz.z());
  q.normalize();
  return q;
}

struct PlanResult {
  PlanStatus status = PlanStatus::no_intersection;
  PlannerCommand command;
  Vec3 v_out = Vec3::Zero();   // sampled return velocity
  Vec3 v_in = Vec3::Zero();    // predicted incoming velocity at strike
  double t_strike = 0.0;
  int bounces = 0;

  bool ok() const { return status == PlanStatus::ok; }
};

// Full pipeline: strike prediction, return sampling, impact inversion,
// orientation. Deterministic in (ball, cfg, rng state).
inline PlanResult plan(const BallState& ball, const PlannerConfig& cfg,
                       const TableGeometry& table, Rng& rng) {
  PlanResult out;
  const auto strike = predict_strike(ball, cfg, table, &out.status);
  if (!strike) return out;
  const auto v_o = sample_return(strike->p_strike, cfg, table, rng, &out.status);
  if (!v_o) return out;
  const auto impact = racket_impact(strike->v_in, *v_o, cfg.c_r, &out.status);
  if (!impact) return out;
  out.command.p_hat = strike->p_strike;
  out.command.v_hat = impact->v_hat;
  out.command.o_hat = normal_to_quaternion(impact->normal);
  out.v_out = *v_o;
  out.v_in = strike->v_in;
  out.t_strike = strike->t_strike;
  out.bounces = strike->bounces;
  out.status = PlanStatus::ok;
  return out;
}

// Outgoing ball velocity for a ball meeting a racket moving at v_racket
// with face normal n: the normal relative velocity reflects scaled by c_r,
// the tangential component is untouched. Shared by the planner's inverse
// (racket_impact) and the contact resolution in the episode engine.
inline Vec3 apply_racket_restitution(const Vec3& v_ball, const Vec3& v_racket,
                                     const Vec3& normal, double c_r) {
  const double rel_n = (v_ball - v_racket).dot(normal);
  return v_ball - (1.0 + c_r) * rel_n * normal;
}

}  // namespace flatmuscle
