#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "flatmuscle/core.hpp"

namespace flatmuscle {

// Lower clamp of the force-velocity gain. Keeping the gain strictly positive
// everywhere makes the velocity non-singularity condition hold by
// construction, so the algebraic inversion below is total.
inline constexpr double kVelocityGainFloor = 0.05;

// Tolerance used when flagging an inversion as out of the physiological box.
inline constexpr double kFeasibilityEps = 1e-9;

struct HillParams {
  double f_max = 0.0;      // peak isometric force, N
  double l_min = 0.0;      // shortest operating length, m
  double l_opt = 0.0;      // optimal (peak force) length, m
  double l_max = 0.0;      // longest operating length, m
  double tau_act = 0.01;   // activation time constant, s
  double tau_deact = 0.04; // deactivation time constant, s
  double fl_width = 0.45;      // force-length Gaussian width
  double fv_shape = 4.0;       // force-velocity hyperbola curvature
  double fv_ceiling = 1.4;     // eccentric force cap
  double fp_stiffness = 0.0;   // passive force scale, relative to f_max
  std::string name;

  double length_range() const { return l_max - l_min; }

  bool valid() const {
    return f_max > 0.0 && 0.0 < l_min && l_min < l_opt && l_opt < l_max &&
           tau_act > 0.0 && tau_deact > 0.0 && fv_ceiling >= 1.0 &&
           fl_width > 0.0 && fv_shape >= 0.0 && fp_stiffness >= 0.0;
  }
};

struct MuscleState {
  double length = 0.0;    // m
  double velocity = 0.0;  // m/s, lengthening positive
  double activation = 0.0;

  // Sanity envelope; outside of it the plant reports an episode fault.
  bool within_bounds(const HillParams& p) const {
    return activation >= 0.0 && activation <= 1.0 &&
           length >= 0.5 * p.l_min && length <= 2.0 * p.l_max;
  }
};

// Clamped inversion result. Callers decide policy on infeasibility.
struct Inversion {
  double value = 0.0;
  bool feasible = true;
};

// Active force-length gain: Gaussian around l_opt, maximum 1, strictly
// positive everywhere.
inline double force_length(double l, const HillParams& p) {
  const double x = (l / p.l_opt - 1.0) / p.fl_width;
  return std::exp(-x * x);
}

// Force-velocity gain. Shortening side is the Hill hyperbola, lengthening
// side rises with matched slope and saturates exactly at fv_ceiling; the
// whole thing is clamped to [kVelocityGainFloor, fv_ceiling] and equals 1
// exactly at zero velocity. Velocity is normalized by 10 * l_opt per second.
inline double force_velocity(double ldot, const HillParams& p) {
  const double vbar = ldot / (10.0 * p.l_opt);
  double gain;
  if (vbar <= 0.0) {
    gain = (1.0 + vbar) / (1.0 - p.fv_shape * vbar);
  } else if (p.fv_ceiling <= 1.0) {
    gain = 1.0;
  } else {
    const double v_sat = 2.0 * (p.fv_ceiling - 1.0) / (1.0 + p.fv_shape);
    if (vbar >= v_sat) {
      gain = p.fv_ceiling;
    } else {
      const double r = 1.0 - vbar / v_sat;
      gain = p.fv_ceiling - (p.fv_ceiling - 1.0) * r * r;
    }
  }
  return std::clamp(gain, kVelocityGainFloor, p.fv_ceiling);
}

// Passive elastic tension: zero at or below l_opt, quadratic above it,
// normalized so that l_max with fp_stiffness = 1 yields f_max.
inline double force_passive(double l, const HillParams& p) {
  if (l <= p.l_opt) return 0.0;
  const double x = (l - p.l_opt) / (p.l_max - p.l_opt);
  return p.f_max * p.fp_stiffness * x * x;
}

// Total muscle tension (pulling positive). The MuJoCo-style force in
// [-f_max, 0] is represented as T = -f, so torques are tau = -J^T * T.
inline double hill_tension(double act, const MuscleState& s, const HillParams& p) {
  return act * p.f_max * force_length(s.length, p) * force_velocity(s.velocity, p) +
         force_passive(s.length, p);
}

// Algebraic inverse of hill_tension in the activation. Total because the
// force-velocity gain is floored away from zero.
inline Inversion invert_hill(double tension, const MuscleState& s, const HillParams& p) {
  const double denom =
      p.f_max * force_length(s.length, p) * force_velocity(s.velocity, p);
  const double raw = (tension - force_passive(s.length, p)) / denom;
  return {clamp01(raw), raw >= -kFeasibilityEps && raw <= 1.0 + kFeasibilityEps};
}

// Runtime time constant of the first-order activation lag. The boundary
// u == act belongs to the deactivation branch.
inline double activation_time_constant(double act, double u, const HillParams& p) {
  const double scale = 0.5 + 1.5 * act;
  return (u - act > 0.0) ? p.tau_act * scale : p.tau_deact / scale;
}

// d(act)/dt for excitation u.
inline double activation_rate(double act, double u, const HillParams& p) {
  return (u - act) / activation_time_constant(act, u, p);
}

// Branch-consistent inverse of the activation dynamics: the excitation that
// produces act_dot at the current activation. u > act iff act_dot > 0, so
// the branch is decided by the sign of the requested rate.
inline Inversion invert_activation(double act, double act_dot, const HillParams& p) {
  const double scale = 0.5 + 1.5 * act;
  const double raw = (act_dot > 0.0) ? act + act_dot * p.tau_act * scale
                                     : act + act_dot * p.tau_deact / scale;
  return {clamp01(raw), raw >= -kFeasibilityEps && raw <= 1.0 + kFeasibilityEps};
}

// One RK4 step of the activation lag with excitation held constant.
// The result is clamped to [0, 1]; the continuous dynamics never leave the
// box, the clamp only removes integrator round-off.
inline double integrate_activation(double act, double u, const HillParams& p, double dt) {
  const auto f = [&](double a) { return activation_rate(clamp01(a), u, p); };
  const double k1 = f(act);
  const double k2 = f(act + 0.5 * dt * k1);
  const double k3 = f(act + 0.5 * dt * k2);
  const double k4 = f(act + dt * k3);
  return clamp01(act + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace flatmuscle
