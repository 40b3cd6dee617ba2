#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "flatmuscle/core.hpp"
#include "flatmuscle/hill.hpp"

namespace flatmuscle {

enum class JointType { revolute, prismatic };

struct Link {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();      // center of mass, link frame
  Vec3 inertia = Vec3::Zero();  // diagonal rotational inertia about the com
  Vec3 tip = Vec3::Zero();      // where the next joint attaches
};

struct Joint {
  JointType type = JointType::revolute;
  Vec3 axis = Vec3::UnitZ();   // unit axis, child frame
  Vec3 origin = Vec3::Zero();  // joint location, parent frame
  double lo = -1e9;
  double hi = 1e9;
};

// link == kWorldLink anchors the point to the world frame.
inline constexpr int kWorldLink = -1;

struct ViaPoint {
  int link = kWorldLink;
  Vec3 point = Vec3::Zero();
};

struct MusclePath {
  std::vector<ViaPoint> points;
};

// Force actuator wrapped in a position servo, mirroring position-actuated
// base joints. Commands are positions; the realized force is clamped.
struct DirectDrive {
  int joint = 0;
  double force_limit = 0.0;
  double kp = 0.0;
  double kd = 0.0;
};

struct RacketMount {
  int link = kWorldLink;  // kWorldLink means no racket
  Vec3 offset = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();  // face normal, link frame
  double radius = 0.085;

  bool attached() const { return link != kWorldLink; }
};

struct PlantModel {
  std::string name;
  std::vector<Link> links;
  std::vector<Joint> joints;
  std::vector<MusclePath> muscle_paths;
  std::vector<HillParams> hill;
  std::vector<DirectDrive> direct_drives;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  RacketMount racket;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int muscle_count() const { return static_cast<int>(muscle_paths.size()); }

  bool is_direct_drive(int joint) const {
    for (const auto& d : direct_drives)
      if (d.joint == joint) return true;
    return false;
  }

  // Joints actuated through muscles, in index order.
  std::vector<int> muscle_joints() const {
    std::vector<int> out;
    for (int j = 0; j < joint_count(); ++j)
      if (!is_direct_drive(j)) out.push_back(j);
    return out;
  }

  void validate() const {
    const int n = joint_count();
    const int m = muscle_count();
    if (n < 1) throw ConfigError("plant: needs at least one joint");
    if (static_cast<int>(links.size()) != n)
      throw ConfigError("plant: one link per joint required");
    if (m < n) throw ConfigError("plant: muscle count must be >= joint count");
    if (static_cast<int>(hill.size()) != m)
      throw ConfigError("plant: one HillParams per muscle required");
    for (int j = 0; j < n; ++j) {
      if (joints[j].lo >= joints[j].hi)
        throw ConfigError("plant: joint " + std::to_string(j) + " limits lo >= hi");
      if (std::abs(joints[j].axis.norm() - 1.0) > 1e-9)
        throw ConfigError("plant: joint " + std::to_string(j) + " axis not unit");
    }
    for (int i = 0; i < m; ++i) {
      if (!hill[i].valid())
        throw ConfigError("plant: muscle " + std::to_string(i) + " HillParams invalid");
      if (muscle_paths[i].points.size() < 2)
        throw ConfigError("plant: muscle " + std::to_string(i) + " needs >= 2 via points");
      for (const auto& vp : muscle_paths[i].points)
        if (vp.link < kWorldLink || vp.link >= n)
          throw ConfigError("plant: muscle " + std::to_string(i) + " references bad link");
    }
    for (const auto& d : direct_drives)
      if (d.joint < 0 || d.joint >= n)
        throw ConfigError("plant: direct drive references bad joint");
    if (racket.attached() && (racket.link < 0 || racket.link >= n))
      throw ConfigError("plant: racket references bad link");
  }
};

struct JointState {
  Vec q;
  Vec qd;
};

struct ExternalLoad {
  Vec tau_ext;

  static ExternalLoad zero(int n) { return {Vec::Zero(n)}; }
};

inline Mat3 axis_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

// World pose of every link frame at configuration q.
struct FrameCache {
  std::vector<Mat3> rot;
  std::vector<Vec3> pos;
};

inline FrameCache forward_kinematics(const Vec& q, const PlantModel& model) {
  const int n = model.joint_count();
  FrameCache fc;
  fc.rot.resize(n);
  fc.pos.resize(n);
  Mat3 r_parent = Mat3::Identity();
  Vec3 p_parent = Vec3::Zero();
  for (int j = 0; j < n; ++j) {
    const Joint& joint = model.joints[j];
    Vec3 p = p_parent + r_parent * joint.origin;
    Mat3 r = r_parent;
    if (joint.type == JointType::revolute) {
      r = r_parent * axis_rotation(joint.axis, q[j]);
    } else {
      p += r_parent * (joint.axis * q[j]);
    }
    fc.rot[j] = r;
    fc.pos[j] = p;
    // The next joint's origin is expressed in this link frame.
    r_parent = r;
    p_parent = p;
  }
  return fc;
}

inline Vec3 point_world(const FrameCache& fc, int link, const Vec3& local) {
  if (link == kWorldLink) return local;
  return fc.pos[link] + fc.rot[link] * local;
}

// 3 x n positional Jacobian of a point fixed to `link`.
inline void point_jacobian(const FrameCache& fc, const PlantModel& model, int link,
                           const Vec3& world_point, Mat& out) {
  out.setZero();
  if (link == kWorldLink) return;
  for (int j = 0; j <= link; ++j) {
    const Joint& joint = model.joints[j];
    const Vec3 axis_w = fc.rot[j] * joint.axis;
    if (joint.type == JointType::revolute) {
      out.col(j) = axis_w.cross(world_point - fc.pos[j]);
    } else {
      out.col(j) = axis_w;
    }
  }
}

// Length of each muscle path: sum of straight segments between via points.
inline Vec muscle_lengths(const Vec& q, const PlantModel& model) {
  const FrameCache fc = forward_kinematics(q, model);
  Vec lengths(model.muscle_count());
  for (int i = 0; i < model.muscle_count(); ++i) {
    const auto& pts = model.muscle_paths[i].points;
    double total = 0.0;
    Vec3 prev = point_world(fc, pts[0].link, pts[0].point);
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const Vec3 cur = point_world(fc, pts[k].link, pts[k].point);
      total += (cur - prev).norm();
      prev = cur;
    }
    lengths[i] = total;
  }
  return lengths;
}

// Analytic muscle Jacobian, row i = d l_i / d q.
inline Mat muscle_jacobian(const Vec& q, const PlantModel& model) {
  const int n = model.joint_count();
  const FrameCache fc = forward_kinematics(q, model);
  Mat jac = Mat::Zero(model.muscle_count(), n);
  Mat jp_prev(3, n), jp_cur(3, n);
  for (int i = 0; i < model.muscle_count(); ++i) {
    const auto& pts = model.muscle_paths[i].points;
    Vec3 prev = point_world(fc, pts[0].link, pts[0].point);
    point_jacobian(fc, model, pts[0].link, prev, jp_prev);
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const Vec3 cur = point_world(fc, pts[k].link, pts[k].point);
      point_jacobian(fc, model, pts[k].link, cur, jp_cur);
      const Vec3 diff = cur - prev;
      const double len = diff.norm();
      if (len > 1e-12) {
        const Vec3 unit = diff / len;
        jac.row(i) += unit.transpose() * (jp_cur - jp_prev);
      }
      prev = cur;
      jp_prev.swap(jp_cur);
    }
  }
  return jac;
}

// Recursive Newton-Euler on the serial chain: returns
// M(q) qdd + C(q, qd) qd + G(q) for the given gravity vector.
class Dynamics {
 public:
  explicit Dynamics(const PlantModel& model) : model_(&model) {
    const int n = model.joint_count();
    w_.resize(n);
    dw_.resize(n);
    dv_.resize(n);
    f_.resize(n);
    nmom_.resize(n);
    r_pc_.resize(n);
    o_pc_.resize(n);
    m_.resize(n, n);
    tau_scratch_.resize(n);
  }

  Vec rnea(const Vec& q, const Vec& qd, const Vec& qdd, const Vec3& gravity) const {
    const int n = model_->joint_count();
    Vec tau(n);
    // Outward pass, all quantities in the local link frame. Gravity enters
    // as a fictitious base acceleration.
    Vec3 w_p = Vec3::Zero();
    Vec3 dw_p = Vec3::Zero();
    Vec3 dv_p = -gravity;
    for (int i = 0; i < n; ++i) {
      const Joint& joint = model_->joints[i];
      const Link& link = model_->links[i];
      const bool rev = joint.type == JointType::revolute;
      r_pc_[i] = rev ? axis_rotation(joint.axis, q[i]) : Mat3::Identity();
      o_pc_[i] = joint.origin + (rev ? Vec3::Zero() : Vec3(joint.axis * q[i]));
      const Mat3 r_cp = r_pc_[i].transpose();

      Vec3 w_c, dw_c, dv_c;
      const Vec3 dv_joint =
          dv_p + dw_p.cross(o_pc_[i]) + w_p.cross(w_p.cross(o_pc_[i]));
      if (rev) {
        const Vec3 qd_axis = joint.axis * qd[i];
        w_c = r_cp * w_p + qd_axis;
        dw_c = r_cp * dw_p + (r_cp * w_p).cross(qd_axis) + joint.axis * qdd[i];
        dv_c = r_cp * dv_joint;
      } else {
        w_c = r_cp * w_p;
        dw_c = r_cp * dw_p;
        dv_c = r_cp * dv_joint + 2.0 * w_c.cross(joint.axis * qd[i]) +
               joint.axis * qdd[i];
      }
      const Vec3 dv_com = dv_c + dw_c.cross(link.com) + w_c.cross(w_c.cross(link.com));
      f_[i] = link.mass * dv_com;
      const Vec3 iw = link.inertia.cwiseProduct(w_c);
      nmom_[i] = link.inertia.cwiseProduct(dw_c) + w_c.cross(iw);
      w_[i] = w_c;
      dw_[i] = dw_c;
      dv_[i] = dv_c;
      w_p = w_c;
      dw_p = dw_c;
      dv_p = dv_c;
    }
    // Inward pass.
    Vec3 f_child = Vec3::Zero();
    Vec3 n_child = Vec3::Zero();
    for (int i = n - 1; i >= 0; --i) {
      const Joint& joint = model_->joints[i];
      const Link& link = model_->links[i];
      Vec3 f_i = f_[i];
      Vec3 n_i = nmom_[i] + link.com.cross(f_[i]);
      if (i < n - 1) {
        const Vec3 f_down = r_pc_[i + 1] * f_child;
        f_i += f_down;
        n_i += r_pc_[i + 1] * n_child + o_pc_[i + 1].cross(f_down);
      }
      tau[i] = (joint.type == JointType::revolute) ? n_i.dot(joint.axis)
                                                   : f_i.dot(joint.axis);
      f_child = f_i;
      n_child = n_i;
    }
    return tau;
  }

  Mat mass_matrix(const Vec& q) const {
    const int n = model_->joint_count();
    const Vec qzero = Vec::Zero(n);
    Vec e = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      e[j] = 1.0;
      m_.col(j) = rnea(q, qzero, e, Vec3::Zero());
      e[j] = 0.0;
    }
    // Symmetrize away round-off.
    m_ = 0.5 * (m_ + m_.transpose()).eval();
    return m_;
  }

  Vec gravity_forces(const Vec& q) const {
    const Vec z = Vec::Zero(model_->joint_count());
    return rnea(q, z, z, model_->gravity);
  }

  Vec bias_forces(const Vec& q, const Vec& qd) const {
    const Vec z = Vec::Zero(model_->joint_count());
    return rnea(q, qd, z, model_->gravity) - gravity_forces(q);
  }

  // tau_m = M(y) ydd + C(y, yd) yd + G(y) - tau_ext
  Vec inverse_dynamics(const Vec& y, const Vec& yd, const Vec& ydd,
                       const ExternalLoad& load) const {
    return rnea(y, yd, ydd, model_->gravity) - load.tau_ext;
  }

  double kinetic_energy(const Vec& q, const Vec& qd) const {
    return 0.5 * qd.dot(mass_matrix(q) * qd);
  }

  double potential_energy(const Vec& q) const {
    const FrameCache fc = forward_kinematics(q, *model_);
    double u = 0.0;
    for (int i = 0; i < model_->joint_count(); ++i) {
      const Vec3 com_w = point_world(fc, i, model_->links[i].com);
      u -= model_->links[i].mass * model_->gravity.dot(com_w);
    }
    return u;
  }

 private:
  const PlantModel* model_;
  mutable std::vector<Vec3> w_, dw_, dv_, f_, nmom_;
  mutable std::vector<Mat3> r_pc_;
  mutable std::vector<Vec3> o_pc_;
  mutable Mat m_;
  mutable Vec tau_scratch_;
};

inline Mat mass_matrix(const Vec& q, const PlantModel& model) {
  return Dynamics(model).mass_matrix(q);
}
inline Vec gravity_forces(const Vec& q, const PlantModel& model) {
  return Dynamics(model).gravity_forces(q);
}
inline Vec bias_forces(const Vec& q, const Vec& qd, const PlantModel& model) {
  return Dynamics(model).bias_forces(q, qd);
}
inline Vec inverse_dynamics(const Vec& y, const Vec& yd, const Vec& ydd,
                            const ExternalLoad& load, const PlantModel& model) {
  return Dynamics(model).inverse_dynamics(y, yd, ydd, load);
}

struct PlantState {
  double t = 0.0;
  Vec q;
  Vec qd;
  Vec act;        // per muscle
  Vec lengths;    // per muscle, kept consistent with q
  Vec velocities; // per muscle, J_m * qd
};

inline PlantState make_state(const PlantModel& model, const Vec& q, const Vec& qd,
                             const Vec& act) {
  PlantState s;
  s.q = q;
  s.qd = qd;
  s.act = act;
  s.lengths = muscle_lengths(q, model);
  s.velocities = muscle_jacobian(q, model) * qd;
  return s;
}

inline PlantState make_state(const PlantModel& model, const Vec& q) {
  return make_state(model, q, Vec::Zero(model.joint_count()),
                    Vec::Zero(model.muscle_count()));
}

// Per-step command: muscle excitations plus position targets for the
// direct drives (aligned with model.direct_drives order).
struct StepInput {
  Vec u;            // muscle excitations, [0, 1]
  Vec dd_target;    // target positions
  Vec dd_target_vel;
  Vec dd_feedforward;

  static StepInput hold(const PlantModel& model, const PlantState& s) {
    StepInput in;
    in.u = Vec::Zero(model.muscle_count());
    const int nd = static_cast<int>(model.direct_drives.size());
    in.dd_target = Vec::Zero(nd);
    for (int k = 0; k < nd; ++k) in.dd_target[k] = s.q[model.direct_drives[k].joint];
    in.dd_target_vel = Vec::Zero(nd);
    in.dd_feedforward = Vec::Zero(nd);
    return in;
  }
};

enum class StepStatus { ok, non_finite, joint_limit };

// Reusable stepper; owns scratch space. One stepper per simulated state.
class PlantStepper {
 public:
  explicit PlantStepper(const PlantModel& model) : model_(&model), dyn_(model) {}

  const PlantModel& model() const { return *model_; }
  const Dynamics& dynamics() const { return dyn_; }

  // Semi-implicit Euler (velocity first) at dt; activation advances by RK4
  // with the excitation held over the step.
  StepStatus step(PlantState& s, const StepInput& in, const ExternalLoad& load,
                  double dt) const {
    const int n = model_->joint_count();
    const int m = model_->muscle_count();

    for (int i = 0; i < m; ++i)
      s.act[i] = integrate_activation(s.act[i], clamp01(in.u[i]), model_->hill[i], dt);

    const Mat jac = muscle_jacobian(s.q, *model_);
    Vec tau = Vec::Zero(n);
    for (int i = 0; i < m; ++i) {
      const MuscleState ms{s.lengths[i], s.velocities[i], s.act[i]};
      const double tension = hill_tension(s.act[i], ms, model_->hill[i]);
      tau -= jac.row(i).transpose() * tension;
    }
    for (std::size_t k = 0; k < model_->direct_drives.size(); ++k) {
      const DirectDrive& d = model_->direct_drives[k];
      const double force = std::clamp(
          d.kp * (in.dd_target[k] - s.q[d.joint]) +
              d.kd * (in.dd_target_vel[k] - s.qd[d.joint]) + in.dd_feedforward[k],
          -d.force_limit, d.force_limit);
      tau[d.joint] += force;
    }
    tau += load.tau_ext;

    const Vec rhs = tau - dyn_.rnea(s.q, s.qd, Vec::Zero(n), model_->gravity);
    const Vec qdd = dyn_.mass_matrix(s.q).ldlt().solve(rhs);

    s.qd += qdd * dt;
    s.q += s.qd * dt;
    s.t += dt;
    s.lengths = muscle_lengths(s.q, *model_);
    s.velocities = muscle_jacobian(s.q, *model_) * s.qd;

    if (!s.q.allFinite() || !s.qd.allFinite() || !s.act.allFinite())
      return StepStatus::non_finite;
    for (int j = 0; j < n; ++j)
      if (s.q[j] < model_->joints[j].lo || s.q[j] > model_->joints[j].hi)
        return StepStatus::joint_limit;
    return StepStatus::ok;
  }

 private:
  const PlantModel* model_;
  Dynamics dyn_;
};

// Racket face pose and velocity from the plant state.
struct RacketPose {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
  Vec3 velocity = Vec3::Zero();   // face-center velocity
  Vec3 angular = Vec3::Zero();    // link angular velocity
  double radius = 0.085;

  Vec3 point_velocity(const Vec3& world_point) const {
    return velocity + angular.cross(world_point - center);
  }
};

inline RacketPose racket_pose(const PlantState& s, const PlantModel& model) {
  RacketPose rp;
  if (!model.racket.attached()) return rp;
  const FrameCache fc = forward_kinematics(s.q, model);
  rp.center = point_world(fc, model.racket.link, model.racket.offset);
  rp.normal = fc.rot[model.racket.link] * model.racket.normal;
  rp.radius = model.racket.radius;
  Mat jp(3, model.joint_count());
  point_jacobian(fc, model, model.racket.link, rp.center, jp);
  rp.velocity = jp * s.qd;
  Vec3 omega = Vec3::Zero();
  for (int j = 0; j <= model.racket.link; ++j) {
    if (model.joints[j].type == JointType::revolute)
      omega += (fc.rot[j] * model.joints[j].axis) * s.qd[j];
  }
  rp.angular = omega;
  return rp;
}

}  // namespace flatmuscle
