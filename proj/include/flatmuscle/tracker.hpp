#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "flatmuscle/plant.hpp"
#include "flatmuscle/planner.hpp"
#include "flatmuscle/scenario.hpp"

namespace flatmuscle {

// What a controller sees each tick. Ball and command are expressed in the
// robot's own frame (the episode engine mirrors them for the far robot).
struct Observation {
  double t = 0.0;
  const PlantState* plant = nullptr;
  const PlantModel* model = nullptr;
  BallState ball;
  bool has_command = false;
  PlannerCommand command;
  double t_strike = 0.0;
};

// Joint targets out.
using Controller = std::function<Vec(const Observation&)>;

// Quintic with specified endpoint positions and velocities (zero endpoint
// accelerations); the classic minimum-jerk profile when velocities vanish.
class MinJerkVec3 {
 public:
  MinJerkVec3() = default;
  MinJerkVec3(const Vec3& p0, const Vec3& v0, const Vec3& p1, const Vec3& v1,
              double t0, double t1)
      : t0_(t0), h_(std::max(1e-6, t1 - t0)) {
    for (int a = 0; a < 3; ++a) {
      const double d = p1[a] - p0[a];
      const double w0 = v0[a] * h_, w1 = v1[a] * h_;
      c_[a] = {p0[a], w0, 0.0, 10.0 * d - 6.0 * w0 - 4.0 * w1,
               -15.0 * d + 8.0 * w0 + 7.0 * w1, 6.0 * d - 3.0 * w0 - 3.0 * w1};
    }
  }

  Vec3 position(double t) const {
    const double s = std::clamp((t - t0_) / h_, 0.0, 1.0);
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      double y = 0.0;
      for (int d = 5; d >= 0; --d) y = y * s + c_[a][d];
      p[a] = y;
    }
    return p;
  }

  Vec3 velocity(double t) const {
    const double s = std::clamp((t - t0_) / h_, 0.0, 1.0);
    Vec3 v;
    for (int a = 0; a < 3; ++a) {
      double y = 0.0;
      for (int d = 5; d >= 1; --d) y = y * s + d * c_[a][d];
      v[a] = y / h_;
    }
    return v;
  }

 private:
  double t0_ = 0.0;
  double h_ = 1.0;
  std::array<std::array<double, 6>, 3> c_{};
};

// Scripted stand-in for a learned policy: on a fresh planner command it lays
// a minimum-jerk racket trajectory from the current racket state to the
// commanded strike (position and velocity, timed to t_strike), blends the
// face normal toward the commanded one, and resolves joint targets by
// damped-least-squares inverse kinematics. After a short follow-through it
// recovers to the ready pose.
class ScriptedTracker {
 public:
  ScriptedTracker(const PlantModel& model, const TrackerParams& params)
      : model_(&model), params_(params), q_star_(params.ready_pose) {}

  void reset() {
    phase_ = Phase::kReady;
    q_star_ = params_.ready_pose;
    active_strike_time_ = -1.0;
  }

  Vec operator()(const Observation& obs) {
    const double t = obs.t;
    if (obs.has_command && obs.t_strike > t &&
        obs.t_strike != active_strike_time_) {
      start_swing(obs);
    }
    switch (phase_) {
      case Phase::kSwing: {
        if (t > active_strike_time_ + params_.follow_through) {
          start_recovery(t);
          break;
        }
        const double t_ref = std::min(t + params_.lead_time,
                                      active_strike_time_ + params_.follow_through);
        Vec3 p_ref, v_ref;
        if (t_ref <= active_strike_time_) {
          p_ref = swing_.position(t_ref);
          v_ref = swing_.velocity(t_ref);
        } else {
          // Carry the commanded velocity through the contact window.
          p_ref = command_.p_hat + command_.v_hat * (t_ref - active_strike_time_);
          v_ref = command_.v_hat;
        }
        const double blend = std::clamp(
            (t_ref - swing_start_) / std::max(1e-6, 0.8 * (active_strike_time_ - swing_start_)),
            0.0, 1.0);
        const Vec3 n_ref =
            ((1.0 - blend) * start_normal_ + blend * strike_normal_).normalized();
        (void)v_ref;  // velocity lead is provided by sampling the reference ahead
        solve_ik(p_ref, n_ref);
        break;
      }
      case Phase::kRecover: {
        const double s = std::clamp((t - recover_start_) / params_.recover_time, 0.0, 1.0);
        const double w = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
        q_star_ = recover_from_ + w * (params_.ready_pose - recover_from_);
        if (s >= 1.0) phase_ = Phase::kReady;
        break;
      }
      case Phase::kReady:
        q_star_ = params_.ready_pose;
        break;
    }
    return clamp_to_limits(q_star_);
  }

 private:
  enum class Phase { kReady, kSwing, kRecover };

  void start_swing(const Observation& obs) {
    command_ = obs.command;
    active_strike_time_ = obs.t_strike;
    swing_start_ = obs.t;
    const RacketPose rp = racket_pose(*obs.plant, *model_);
    swing_ = MinJerkVec3(rp.center, rp.velocity, command_.p_hat, command_.v_hat,
                         obs.t, obs.t_strike);
    start_normal_ = rp.normal;
    strike_normal_ = command_.o_hat * kRacketFaceNormal;
    phase_ = Phase::kSwing;
  }

  void start_recovery(double t) {
    recover_from_ = q_star_;
    recover_start_ = t;
    phase_ = Phase::kRecover;
  }

  Vec clamp_to_limits(Vec q) const {
    for (int j = 0; j < model_->joint_count(); ++j) {
      const double margin = 1e-3;
      q[j] = std::clamp(q[j], model_->joints[j].lo + margin, model_->joints[j].hi - margin);
    }
    return q;
  }

  // Damped least squares on the 6-dim task [position error; face alignment],
  // iterated from the previous target so the solution tracks continuously.
  void solve_ik(const Vec3& p_ref, const Vec3& n_ref) {
    const int n = model_->joint_count();
    Vec q = clamp_to_limits(q_star_);
    Mat jac(6, n);
    Mat jp(3, n);
    for (int iter = 0; iter < params_.ik_iterations; ++iter) {
      const FrameCache fc = forward_kinematics(q, *model_);
      const Vec3 center = point_world(fc, model_->racket.link, model_->racket.offset);
      const Vec3 normal = fc.rot[model_->racket.link] * model_->racket.normal;
      point_jacobian(fc, *model_, model_->racket.link, center, jp);
      jac.topRows(3) = jp;
      for (int j = 0; j < n; ++j) {
        Vec3 dn = Vec3::Zero();
        if (j <= model_->racket.link && model_->joints[j].type == JointType::revolute)
          dn = (fc.rot[j] * model_->joints[j].axis).cross(normal);
        jac.block(3, j, 3, 1) = params_.orient_weight * dn;
      }
      Eigen::Matrix<double, 6, 1> err;
      err.head<3>() = p_ref - center;
      err.tail<3>() = params_.orient_weight * (n_ref - normal);
      if (err.norm() < 1e-10) break;
      const Mat jjt = jac * jac.transpose() +
                      params_.ik_damping * params_.ik_damping * Mat::Identity(6, 6);
      const Vec dq = jac.transpose() * jjt.ldlt().solve(err);
      q += dq;
      q = clamp_to_limits(q);
    }
    q_star_ = q;
  }

  const PlantModel* model_;
  TrackerParams params_;
  Vec q_star_;
  Phase phase_ = Phase::kReady;
  PlannerCommand command_;
  MinJerkVec3 swing_;
  Vec3 start_normal_ = Vec3::UnitX();
  Vec3 strike_normal_ = Vec3::UnitX();
  double swing_start_ = 0.0;
  double active_strike_time_ = -1.0;
  Vec recover_from_;
  double recover_start_ = 0.0;
};

}  // namespace flatmuscle
