// Regenerates the bundled fixtures under fixtures/ from the reference
// builders. Run from the repository root after touching the builders:
//   ./build/tools/gen_fixtures fixtures

#include <cstdio>
#include <fstream>
#include <string>

#include "flatmuscle/plant_io.hpp"
#include "flatmuscle/reference_plants.hpp"
#include "flatmuscle/trajectory.hpp"

namespace fm = flatmuscle;

namespace {

void write_trajectory_csv(const std::string& path, const fm::FlatTrajectory& traj,
                          double dt) {
  std::ofstream out(path);
  const auto first = traj.sample(0.0);
  out << "t";
  for (int j = 0; j < first.y.size(); ++j) out << ",y" << (j + 1);
  out << "\n";
  const int count = static_cast<int>(std::llround(traj.horizon() / dt));
  for (int k = 0; k <= count; ++k) {
    const double t = k * dt;
    const auto s = traj.sample(t);
    out << fm::format_double(t);
    for (int j = 0; j < s.y.size(); ++j) out << "," << fm::format_double(s.y[j]);
    out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";

  fm::save_plant(dir + "/pend1.json", fm::make_pend1());
  fm::save_plant(dir + "/arm3d.json", fm::make_arm3d());
  fm::save_plant(dir + "/pend1_rank_deficient.json", fm::make_pend1_rank_deficient());

  const double dt = 1e-3;
  write_trajectory_csv(dir + "/traj_pend1_hold.csv",
                       fm::constant_trajectory(fm::Vec::Constant(1, M_PI / 2.0), 3.0), dt);
  write_trajectory_csv(dir + "/traj_pend1_sine.csv",
                       fm::sinusoid_trajectory({{0.3, 0.5, 0.0}}, 4.0), dt);
  write_trajectory_csv(
      dir + "/traj_pend1_multi.csv",
      fm::sinusoid_trajectory({{0.25, 0.4, 0.0, 0.3}, {0.10, 0.9, 0.7, 0.3}}, 5.0), dt);

  {
    std::vector<std::vector<fm::SineComponent>> per_joint(5);
    per_joint[0] = {{0.08, 0.30, 0.0, -0.25}};
    per_joint[1] = {{0.10, 0.25, 1.0}};
    per_joint[2] = {{0.20, 0.30, 0.5}};
    per_joint[3] = {{0.12, 0.35, 2.0, 0.35}};
    per_joint[4] = {{0.15, 0.28, 4.0, 0.50}};
    write_trajectory_csv(dir + "/traj_arm3d_wave.csv",
                         fm::multi_joint_sinusoid(per_joint, 5.0), dt);
  }
  {
    std::vector<std::vector<fm::SineComponent>> per_joint(5);
    per_joint[0] = {{0.06, 0.20, 0.0, -0.25}};
    per_joint[1] = {{0.12, 0.20, 1.57}};
    per_joint[2] = {{0.25, 0.20, 3.14}};
    per_joint[3] = {{0.12, 0.20, 0.8, 0.35}};
    per_joint[4] = {{0.15, 0.20, 2.4, 0.50}};
    write_trajectory_csv(dir + "/traj_arm3d_reach.csv",
                         fm::multi_joint_sinusoid(per_joint, 6.0), dt);
  }

  std::printf("fixtures written to %s\n", dir.c_str());
  return 0;
}
