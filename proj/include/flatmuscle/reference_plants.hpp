#pragma once

#include "flatmuscle/plant.hpp"

namespace flatmuscle {

// PEND1: one revolute joint (axis +y), two antagonist muscles routed so the
// moment arms at q = 0 are exactly -0.05 m (flexor, pulls q positive) and
// +0.05 m (extensor). Link hangs along -z at q = 0.
inline PlantModel make_pend1() {
  PlantModel m;
  m.name = "pend1";
  m.gravity = Vec3(0.0, 0.0, -9.81);

  Link link;
  link.mass = 1.0;
  link.com = Vec3(0.0, 0.0, -0.5);
  link.inertia = Vec3(1.0 / 12.0, 1.0 / 12.0, 1e-3);
  link.tip = Vec3(0.0, 0.0, -1.0);
  m.links.push_back(link);

  Joint joint;
  joint.type = JointType::revolute;
  joint.axis = Vec3(0.0, 1.0, 0.0);
  joint.origin = Vec3::Zero();
  joint.lo = -0.75;
  joint.hi = 2.0;
  m.joints.push_back(joint);

  HillParams hp;
  hp.f_max = 300.0;
  hp.l_min = 0.06;
  hp.l_opt = 0.25;
  hp.l_max = 0.30;
  hp.fp_stiffness = 0.01;

  // Anchor and insertion pins share the x offset, so at q = 0 the line of
  // action is vertical and the moment arm equals the pin offset exactly.
  MusclePath flexor;
  flexor.points = {{kWorldLink, Vec3(-0.05, 0.0, 0.15)}, {0, Vec3(-0.05, 0.0, -0.10)}};
  hp.name = "flexor";
  m.muscle_paths.push_back(flexor);
  m.hill.push_back(hp);

  MusclePath extensor;
  extensor.points = {{kWorldLink, Vec3(0.05, 0.0, 0.15)}, {0, Vec3(0.05, 0.0, -0.10)}};
  hp.name = "extensor";
  m.muscle_paths.push_back(extensor);
  m.hill.push_back(hp);

  return m;
}

// PEND1 variant whose muscles are anchored world-to-world: zero Jacobian,
// used as the kinematic-solvability failure witness.
inline PlantModel make_pend1_rank_deficient() {
  PlantModel m = make_pend1();
  m.name = "pend1_rank_deficient";
  m.muscle_paths[0].points = {{kWorldLink, Vec3(-0.05, 0.0, 0.15)},
                              {kWorldLink, Vec3(-0.05, 0.0, -0.10)}};
  m.muscle_paths[1].points = {{kWorldLink, Vec3(0.05, 0.0, 0.15)},
                              {kWorldLink, Vec3(0.05, 0.0, -0.10)}};
  return m;
}

namespace detail {

inline void add_muscle(PlantModel& m, const std::string& name, int link_a,
                       const Vec3& pt_a, int link_b, const Vec3& pt_b,
                       double f_max, double l_min, double l_opt, double l_max,
                       double fl_width = 0.45, double fp_stiffness = 0.02) {
  MusclePath path;
  path.points = {{link_a, pt_a}, {link_b, pt_b}};
  HillParams hp;
  hp.name = name;
  hp.f_max = f_max;
  hp.l_min = l_min;
  hp.l_opt = l_opt;
  hp.l_max = l_max;
  hp.fl_width = fl_width;
  hp.fp_stiffness = fp_stiffness;
  m.muscle_paths.push_back(path);
  m.hill.push_back(hp);
}

}  // namespace detail

// ARM3D: an x/y prismatic base on direct drives (position-servo force
// actuators), then yaw / shoulder pitch / elbow pitch driven by 8 muscles:
// an antagonist pair per revolute joint plus a bi-articular pair across
// shoulder and elbow. Working postures keep the arm below horizontal where
// gravity is restoring, and every optimal fiber length sits above the
// operating range so the active force-length slope adds stiffness; both
// together keep slow open-loop playback neutrally stable. The racket face
// is tilted back 0.75 rad from the forearm axis so strike normals point up
// and toward the table while the arm hangs below the shoulder.
inline PlantModel make_arm3d() {
  PlantModel m;
  m.name = "arm3d";
  m.gravity = Vec3(0.0, 0.0, -9.81);

  auto add_link = [&m](double mass, const Vec3& com, const Vec3& inertia, const Vec3& tip) {
    Link link;
    link.mass = mass;
    link.com = com;
    link.inertia = inertia;
    link.tip = tip;
    m.links.push_back(link);
  };
  auto add_joint = [&m](JointType type, const Vec3& axis, const Vec3& origin,
                        double lo, double hi) {
    Joint j;
    j.type = type;
    j.axis = axis;
    j.origin = origin;
    j.lo = lo;
    j.hi = hi;
    m.joints.push_back(j);
  };

  // 0: base carriage, x. 1: carriage, y. Both direct-driven.
  add_joint(JointType::prismatic, Vec3::UnitX(), Vec3(-1.95, 0.0, 0.50), -0.40, 0.40);
  add_link(3.0, Vec3::Zero(), Vec3(0.05, 0.05, 0.05), Vec3::Zero());
  add_joint(JointType::prismatic, Vec3::UnitY(), Vec3::Zero(), -0.65, 0.65);
  add_link(2.5, Vec3::Zero(), Vec3(0.04, 0.04, 0.04), Vec3::Zero());
  // 2: yaw about z.
  add_joint(JointType::revolute, Vec3::UnitZ(), Vec3(0.0, 0.0, 0.05), -1.1, 1.1);
  add_link(0.8, Vec3(0.02, 0.0, 0.0), Vec3(0.002, 0.002, 0.002), Vec3(0.05, 0.0, 0.0));
  // 3: shoulder pitch about y; upper arm along +x at home, positive pitch
  // swings it below the horizontal.
  add_joint(JointType::revolute, Vec3::UnitY(), Vec3(0.05, 0.0, 0.0), -0.45, 1.1);
  add_link(0.6, Vec3(0.175, 0.0, 0.0), Vec3(0.0005, 0.006, 0.006), Vec3(0.35, 0.0, 0.0));
  // 4: elbow pitch about y; forearm + racket.
  add_joint(JointType::revolute, Vec3::UnitY(), Vec3(0.35, 0.0, 0.0), -0.35, 1.4);
  add_link(0.45, Vec3(0.16, 0.0, 0.0), Vec3(0.0004, 0.005, 0.005), Vec3(0.35, 0.0, 0.0));

  DirectDrive dx;
  dx.joint = 0;
  dx.force_limit = 250.0;
  dx.kp = 1200.0;
  dx.kd = 140.0;
  m.direct_drives.push_back(dx);
  DirectDrive dy = dx;
  dy.joint = 1;
  m.direct_drives.push_back(dy);

  // Far anchors with short insertion pins behind each joint: the moment arm
  // of the loaded muscle grows as the joint deflects into it, which keeps
  // the arm-side stiffness positive across the working range.
  // Yaw pair, link1 -> link2, pins offset +-0.04 in y.
  detail::add_muscle(m, "yaw_left", 1, Vec3(-0.30, 0.04, 0.05), 2, Vec3(-0.05, 0.04, 0.0),
                     250.0, 0.10, 0.30, 0.36);
  detail::add_muscle(m, "yaw_right", 1, Vec3(-0.30, -0.04, 0.05), 2, Vec3(-0.05, -0.04, 0.0),
                     250.0, 0.10, 0.30, 0.36);
  // Shoulder pair, link2 -> link3, pins offset +-0.04 in z.
  detail::add_muscle(m, "shoulder_flex", 2, Vec3(-0.28, 0.0, -0.04), 3, Vec3(-0.05, 0.0, -0.04),
                     400.0, 0.12, 0.36, 0.43);
  detail::add_muscle(m, "shoulder_ext", 2, Vec3(-0.28, 0.0, 0.04), 3, Vec3(-0.05, 0.0, 0.04),
                     400.0, 0.12, 0.36, 0.43);
  // Elbow pair, link3 -> link4, pins offset +-0.04 in z.
  detail::add_muscle(m, "elbow_flex", 3, Vec3(0.05, 0.0, -0.04), 4, Vec3(-0.05, 0.0, -0.04),
                     300.0, 0.10, 0.35, 0.42);
  detail::add_muscle(m, "elbow_ext", 3, Vec3(0.05, 0.0, 0.04), 4, Vec3(-0.05, 0.0, 0.04),
                     300.0, 0.10, 0.35, 0.42);
  // Two distinct bi-articular flexors, link2 -> link4, spanning shoulder and
  // elbow along the underside. Flexors stay slack while gravity loads the
  // extensors, so their moment-arm gradients never fight the static hold.
  detail::add_muscle(m, "biart_fore", 2, Vec3(-0.02, 0.0, -0.07), 4, Vec3(0.07, 0.0, -0.07),
                     350.0, 0.25, 0.56, 0.68, 0.65);
  detail::add_muscle(m, "biart_back", 2, Vec3(-0.25, 0.0, -0.05), 4, Vec3(-0.05, 0.0, -0.05),
                     350.0, 0.30, 0.66, 0.76, 0.65);

  m.racket.link = 4;
  m.racket.offset = Vec3(0.35, 0.0, 0.0);
  m.racket.normal = Vec3(std::cos(0.75), 0.0, std::sin(0.75));
  m.racket.radius = 0.085;

  return m;
}

// Home pose used by tests and as the rally ready posture: arm hanging
// forward and below the shoulder, racket behind the hitting plane.
inline Vec arm3d_home_pose() {
  Vec q(5);
  q << -0.25, 0.0, 0.0, 0.35, 0.5;
  return q;
}

}  // namespace flatmuscle
