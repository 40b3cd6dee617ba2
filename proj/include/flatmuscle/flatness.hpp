#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "flatmuscle/core.hpp"
#include "flatmuscle/hill.hpp"
#include "flatmuscle/plant.hpp"
#include "flatmuscle/trajectory.hpp"

namespace flatmuscle {

// Kinematic solvability: the muscle Jacobian transpose, restricted to the
// muscle-actuated joints, must have full row rank. Direct-drive joints get
// their generalized force from the drives and do not enter the rank test.
struct RankReport {
  bool ok = false;
  double sigma_min = 0.0;
  double cond = std::numeric_limits<double>::infinity();
};

// Actuation matrix A = -J_m^T restricted to muscle-actuated joints, so that
// A * tensions = tau on those joints (tension-positive convention).
inline Mat actuation_matrix(const Vec& q, const PlantModel& model) {
  const Mat jac = muscle_jacobian(q, model);
  const auto rows = model.muscle_joints();
  Mat a(rows.size(), model.muscle_count());
  for (std::size_t r = 0; r < rows.size(); ++r) a.row(r) = -jac.col(rows[r]).transpose();
  return a;
}

inline RankReport check_rank(const Vec& q, const PlantModel& model) {
  const Mat a = actuation_matrix(q, model);
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sigma = svd.singularValues();
  RankReport report;
  const double smax = sigma.size() > 0 ? sigma[0] : 0.0;
  const double smin = sigma.size() > 0 ? sigma[sigma.size() - 1] : 0.0;
  report.sigma_min = smin;
  report.cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  report.ok = sigma.size() == a.rows() && smin > 1e-8 * smax && smax > 0.0;
  return report;
}

struct ForceDistribution {
  Vec tensions;
  Vec alpha;
  Mat projector;
  bool feasible = false;
  int iterations = 0;
  double residual = 0.0;  // || A * T - tau ||_inf
};

namespace detail {

inline Mat pseudo_inverse(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double tol = 1e-12 * std::max(a.rows(), a.cols()) *
                     (sigma.size() > 0 ? sigma[0] : 0.0);
  Vec inv = Vec::Zero(sigma.size());
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma[i] > tol) inv[i] = 1.0 / sigma[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace detail

// Solve A * T = tau with per-muscle tension bounds. The minimum-norm
// solution is T0 = A^+ tau; if T0 + P * alpha leaves the box, a
// projected-gradient search over the box drives the torque residual to
// zero, staying as close to T0 as the constraints allow, and the result is
// polished back onto the torque manifold so feasible returns reproduce tau
// to 1e-9.
inline ForceDistribution distribute_forces_boxed(const Vec& tau_m, const Vec& q,
                                                 const PlantModel& model,
                                                 const Vec& alpha, const Vec& lo,
                                                 const Vec& hi) {
  constexpr double kBoxTol = 1e-9;
  constexpr double kResidualTol = 1e-10;
  constexpr int kMaxIterations = 500;

  const int m = model.muscle_count();
  const Mat a = actuation_matrix(q, model);
  const Mat a_pinv = detail::pseudo_inverse(a);
  const Mat projector = Mat::Identity(m, m) - a_pinv * a;

  const auto in_box = [&](const Vec& t, double tol) {
    for (int i = 0; i < m; ++i)
      if (t[i] < lo[i] - tol || t[i] > hi[i] + tol) return false;
    return true;
  };
  const auto clip_box = [&](Vec t) {
    for (int i = 0; i < m; ++i) t[i] = std::clamp(t[i], lo[i], hi[i]);
    return t;
  };

  ForceDistribution out;
  out.projector = projector;

  const Vec t0 = a_pinv * tau_m;
  Vec t = t0 + projector * alpha;
  if (in_box(t, kBoxTol)) {
    out.tensions = t;
    out.alpha = alpha;
    out.feasible = true;
    out.residual = (a * t - tau_m).cwiseAbs().maxCoeff();
    return out;
  }

  // Projected gradient on 0.5 * ||(I - P)(T - T0)||^2 over the box; the
  // gradient has unit Lipschitz constant, so the 0.5 step is safe.
  t = clip_box(t);
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    const Vec residual_vec = a * t - tau_m;
    if (residual_vec.cwiseAbs().maxCoeff() <= kResidualTol) break;
    const Vec grad = a_pinv * residual_vec;
    t = clip_box(t - 0.5 * grad);
  }

  // Projected gradient crawls when the solution pins several tensions at
  // their bounds under shallow angles; cyclic coordinate minimization of
  // ||A T - tau||^2 closes the gap in a handful of sweeps.
  Vec r = a * t - tau_m;
  for (int sweep = 0; sweep < 200 && r.cwiseAbs().maxCoeff() > kResidualTol; ++sweep) {
    for (int i = 0; i < m; ++i) {
      const double g = a.col(i).squaredNorm();
      if (g < 1e-300) continue;
      const double next = std::clamp(t[i] - a.col(i).dot(r) / g, lo[i], hi[i]);
      const double delta = next - t[i];
      if (delta != 0.0) {
        r += a.col(i) * delta;
        t[i] = next;
      }
    }
  }
  // Alternate the exact torque projection with box clipping until both
  // constraints hold; ends on the torque side so feasible returns
  // reproduce tau to round-off.
  bool polished = false;
  for (int polish = 0; polish < 50; ++polish) {
    t -= a_pinv * (a * t - tau_m);
    if (in_box(t, kBoxTol)) {
      polished = true;
      break;
    }
    t = clip_box(t);
  }

  out.tensions = t;
  out.alpha = t - t0;
  out.iterations = it;
  out.residual = (a * t - tau_m).cwiseAbs().maxCoeff();
  out.feasible = polished && out.residual <= 1e-9;
  return out;
}

// Spec box: tensions in [0, f_max] per muscle.
inline ForceDistribution distribute_forces(const Vec& tau_m, const Vec& q,
                                           const Vec& /*qd*/, const PlantModel& model,
                                           const Vec& alpha) {
  const int m = model.muscle_count();
  Vec lo = Vec::Zero(m), hi(m);
  for (int i = 0; i < m; ++i) hi[i] = model.hill[i].f_max;
  return distribute_forces_boxed(tau_m, q, model, alpha, lo, hi);
}

struct FlatnessFlags {
  bool c1_ok = true;
  bool c2_ok = true;
  bool c3_ok = true;

  bool all() const { return c1_ok && c2_ok && c3_ok; }
};

struct FlatnessReport {
  double dt_ctrl = 0.0;
  std::vector<double> times;
  std::vector<Vec> excitations;  // per sample, one entry per muscle
  std::vector<Vec> activations;  // realized activation trajectory
  std::vector<Vec> dd_targets;   // direct-drive positions from the flat output
  std::vector<Vec> dd_target_vels;
  std::vector<Vec> dd_forces;    // feedforward generalized force per drive
  std::vector<FlatnessFlags> flags;
  std::vector<int> infeasible_samples;
  double max_condition = 0.0;
  double min_sigma = std::numeric_limits<double>::infinity();
  bool all_ok = true;

  std::size_t sample_count() const { return times.size(); }
};

using LoadSchedule = std::function<ExternalLoad(double)>;

inline LoadSchedule zero_loads(const PlantModel& model) {
  const int n = model.joint_count();
  return [n](double) { return ExternalLoad::zero(n); };
}

// The sufficiency construction, sampled along the trajectory: inverse
// dynamics for the required torque, tension distribution across the
// redundant muscles, Hill inversion for activations, and activation-rate
// inversion for excitations. Activation rates are estimated by central
// differences over the control grid.
//
// The free null-space parameter is used to keep each demanded activation
// above the fastest decay the deactivation dynamics can realize from the
// previous sample, so a muscle going slack follows its natural exponential
// tail instead of demanding u < 0. Torque reproduction stays exact; the
// tension bounds are the state-dependent physiological box
// [hill_tension(envelope), hill_tension(1)].
inline FlatnessReport flat_invert(const FlatTrajectory& traj, const LoadSchedule& loads,
                                  const PlantModel& model, double dt_ctrl) {
  if (dt_ctrl <= 0.0) throw ConfigError("flat_invert: dt_ctrl must be positive");
  if (traj.joint_count() != model.joint_count())
    throw ConfigError("flat_invert: trajectory joint count does not match the plant");

  const int m = model.muscle_count();
  const auto muscle_joint_idx = model.muscle_joints();
  const int nd = static_cast<int>(model.direct_drives.size());
  Dynamics dyn(model);

  const int samples = static_cast<int>(std::floor(traj.horizon() / dt_ctrl)) + 1;
  FlatnessReport report;
  report.dt_ctrl = dt_ctrl;
  report.times.reserve(samples);

  std::vector<Vec> tensions(samples);
  Vec act_prev = Vec::Zero(m);
  for (int k = 0; k < samples; ++k) {
    const double t = k * dt_ctrl;
    const TrajectorySample ts = traj.sample(t);
    const ExternalLoad load = loads(t);
    const Vec tau_full = dyn.inverse_dynamics(ts.y, ts.yd, ts.ydd, load);

    FlatnessFlags flags;
    const RankReport rank = check_rank(ts.y, model);
    flags.c1_ok = rank.ok;
    report.max_condition = std::max(report.max_condition, rank.cond);
    report.min_sigma = std::min(report.min_sigma, rank.sigma_min);

    Vec tau_m(muscle_joint_idx.size());
    for (std::size_t r = 0; r < muscle_joint_idx.size(); ++r)
      tau_m[r] = tau_full[muscle_joint_idx[r]];

    const Vec lengths = muscle_lengths(ts.y, model);
    const Mat jac = muscle_jacobian(ts.y, model);
    const Vec rates = jac * ts.yd;

    Vec lo(m), hi(m);
    for (int i = 0; i < m; ++i) {
      const MuscleState ms{lengths[i], rates[i], 0.0};
      double envelope = 0.0;
      if (k > 0) {
        const double a = act_prev[i];
        const double max_decay = a * (0.5 + 1.5 * a) / model.hill[i].tau_deact;
        envelope = std::max(0.0, a - 0.9 * max_decay * dt_ctrl);
      }
      lo[i] = hill_tension(envelope, ms, model.hill[i]);
      hi[i] = hill_tension(1.0, ms, model.hill[i]);
    }
    const ForceDistribution dist =
        distribute_forces_boxed(tau_m, ts.y, model, Vec::Zero(m), lo, hi);
    flags.c2_ok = dist.feasible;

    Vec act(m);
    for (int i = 0; i < m; ++i) {
      const MuscleState ms{lengths[i], rates[i], 0.0};
      const Inversion inv = invert_hill(dist.tensions[i], ms, model.hill[i]);
      act[i] = inv.value;
      flags.c2_ok = flags.c2_ok && inv.feasible;
    }
    act_prev = act;

    Vec dd_force(nd), dd_target(nd), dd_target_vel(nd);
    for (int d = 0; d < nd; ++d) {
      const int j = model.direct_drives[d].joint;
      // Muscles may load a direct-driven joint; the drive supplies the rest.
      double f = tau_full[j];
      f += jac.col(j).dot(dist.tensions);
      const double limit = model.direct_drives[d].force_limit;
      if (std::abs(f) > limit) {
        flags.c2_ok = false;
        f = std::clamp(f, -limit, limit);
      }
      dd_force[d] = f;
      dd_target[d] = ts.y[j];
      dd_target_vel[d] = ts.yd[j];
    }

    tensions[k] = dist.tensions;
    report.times.push_back(t);
    report.activations.push_back(act);
    report.dd_targets.push_back(dd_target);
    report.dd_target_vels.push_back(dd_target_vel);
    report.dd_forces.push_back(dd_force);
    report.flags.push_back(flags);
  }

  // Excitations from the activation trajectory, central differences inside
  // the grid and one-sided stencils at the ends.
  report.excitations.resize(samples);
  for (int k = 0; k < samples; ++k) {
    Vec act_dot(m);
    if (samples == 1) {
      act_dot.setZero();
    } else if (k == 0) {
      act_dot = (report.activations[1] - report.activations[0]) / dt_ctrl;
    } else if (k == samples - 1) {
      act_dot = (report.activations[k] - report.activations[k - 1]) / dt_ctrl;
    } else {
      act_dot = (report.activations[k + 1] - report.activations[k - 1]) / (2.0 * dt_ctrl);
    }
    Vec u(m);
    for (int i = 0; i < m; ++i) {
      const Inversion inv = invert_activation(report.activations[k][i], act_dot[i],
                                              model.hill[i]);
      u[i] = inv.value;
      report.flags[k].c2_ok = report.flags[k].c2_ok && inv.feasible;
    }
    report.excitations[k] = u;
  }

  for (int k = 0; k < samples; ++k) {
    if (!report.flags[k].all()) {
      report.infeasible_samples.push_back(k);
      report.all_ok = false;
    }
  }
  return report;
}

struct ReplayResult {
  double rms = std::numeric_limits<double>::infinity();
  StepStatus status = StepStatus::ok;
  double max_abs_error = 0.0;
};

// Open-loop application of the inverted excitations: the theorem's round
// trip. Muscles run purely feedforward; direct drives track the flat output
// through their position servo plus the inverted feedforward force.
inline ReplayResult replay_flat(const PlantModel& model, const FlatnessReport& report,
                                const FlatTrajectory& traj, double dt,
                                const LoadSchedule& loads) {
  const TrajectorySample start = traj.sample(0.0);
  PlantState state = make_state(model, start.y, start.yd,
                                report.activations.empty() ? Vec::Zero(model.muscle_count())
                                                           : report.activations[0]);
  PlantStepper stepper(model);
  const int substeps = std::max(1, static_cast<int>(std::llround(report.dt_ctrl / dt)));
  const double sub_dt = report.dt_ctrl / substeps;

  ReplayResult result;
  double sq_sum = 0.0;
  long count = 0;
  for (std::size_t k = 0; k + 1 < report.sample_count(); ++k) {
    StepInput in;
    in.u = report.excitations[k];
    in.dd_target = report.dd_targets[k];
    in.dd_target_vel = report.dd_target_vels[k];
    in.dd_feedforward = report.dd_forces[k];
    for (int s = 0; s < substeps; ++s) {
      const StepStatus status = stepper.step(state, in, loads(state.t), sub_dt);
      if (status != StepStatus::ok) {
        result.status = status;
        return result;
      }
    }
    const TrajectorySample ref = traj.sample(report.times[k + 1]);
    const Vec err = state.q - ref.y;
    sq_sum += err.squaredNorm();
    count += err.size();
    result.max_abs_error = std::max(result.max_abs_error, err.cwiseAbs().maxCoeff());
  }
  result.rms = count > 0 ? std::sqrt(sq_sum / count) : 0.0;
  return result;
}

}  // namespace flatmuscle
