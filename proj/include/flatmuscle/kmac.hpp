#pragma once

#include <string>

#include "flatmuscle/core.hpp"
#include "flatmuscle/hill.hpp"
#include "flatmuscle/plant.hpp"

namespace flatmuscle {

// Kinematics-based muscle actuation: forward kinematics gives target muscle
// lengths, a muscle-space PD law gives commanded tensions (clipped to the
// contractile range), and Hill inversion turns tensions into excitations.
struct KmacGains {
  double kp = 5.0;
  double kd = 1.5;
  enum class Mode { kStatic, kRateCompensated };
  // kStatic maps the commanded activation straight to the excitation;
  // kRateCompensated also inverts the activation lag using a backward
  // difference of the commanded activation.
  Mode mode = Mode::kStatic;

  bool valid() const { return kp > 0.0 && kd >= 0.0; }
};

inline KmacGains::Mode kmac_mode_from_string(const std::string& s) {
  if (s == "static") return KmacGains::Mode::kStatic;
  if (s == "rate-compensated") return KmacGains::Mode::kRateCompensated;
  throw ConfigError("kmac.mode: expected 'static' or 'rate-compensated', got '" + s + "'");
}

struct KmacTelemetry {
  long steps = 0;
  long infeasible_inversions = 0;
  long clamped_targets = 0;
};

// Target muscle lengths for a joint-space target; out-of-limit targets are
// clamped onto the limits (flagged via telemetry when a counter is given).
inline Vec target_lengths(const Vec& q_star, const PlantModel& model,
                          long* clamped = nullptr) {
  Vec q = q_star;
  for (int j = 0; j < model.joint_count(); ++j) {
    const double c = std::clamp(q[j], model.joints[j].lo, model.joints[j].hi);
    if (c != q[j] && clamped) ++(*clamped);
    q[j] = c;
  }
  return muscle_lengths(q, model);
}

// Muscle-space PD force, normalized by the per-muscle length range and
// clipped to the contractile side: a muscle is commanded to pull only when
// it is longer than its target.
inline double pd_force(double l_star, double l, double ldot, const KmacGains& gains,
                       const HillParams& p) {
  const double raw =
      p.f_max * (gains.kp * (l_star - l) - gains.kd * ldot) / p.length_range();
  return std::clamp(-raw, 0.0, p.f_max);
}

class KmacController {
 public:
  KmacController(const PlantModel& model, const KmacGains& gains)
      : model_(&model), gains_(gains), prev_act_(Vec::Zero(model.muscle_count())),
        has_prev_(false) {
    if (!gains.valid()) throw ConfigError("kmac: gains must satisfy kp > 0, kd >= 0");
  }

  const KmacTelemetry& telemetry() const { return telemetry_; }

  void reset() {
    has_prev_ = false;
    prev_act_.setZero();
  }

  // One control tick: joint targets in, excitations in [0, 1] out.
  Vec step(const Vec& q_star, const PlantState& state, double dt_ctrl) {
    const int m = model_->muscle_count();
    const Vec l_star = target_lengths(q_star, *model_, &telemetry_.clamped_targets);
    Vec u(m);
    Vec act_cmd(m);
    for (int i = 0; i < m; ++i) {
      const HillParams& hp = model_->hill[i];
      const MuscleState ms{state.lengths[i], state.velocities[i], state.act[i]};
      const double tension =
          pd_force(l_star[i], state.lengths[i], state.velocities[i], gains_, hp);
      const Inversion inv = invert_hill(tension, ms, hp);
      act_cmd[i] = inv.value;
      if (!inv.feasible) ++telemetry_.infeasible_inversions;
      if (gains_.mode == KmacGains::Mode::kStatic) {
        u[i] = act_cmd[i];
      } else {
        const double act_dot =
            has_prev_ ? (act_cmd[i] - prev_act_[i]) / dt_ctrl : 0.0;
        const Inversion uinv = invert_activation(act_cmd[i], act_dot, hp);
        u[i] = uinv.value;
        if (!uinv.feasible) ++telemetry_.infeasible_inversions;
      }
    }
    prev_act_ = act_cmd;
    has_prev_ = true;
    ++telemetry_.steps;
    return u;
  }

 private:
  const PlantModel* model_;
  KmacGains gains_;
  Vec prev_act_;
  bool has_prev_;
  KmacTelemetry telemetry_;
};

}  // namespace flatmuscle
