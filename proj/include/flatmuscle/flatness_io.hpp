#pragma once

#include <fstream>
#include <string>

#include "flatmuscle/flatness.hpp"
#include "flatmuscle/json_util.hpp"
#include "flatmuscle/trajectory.hpp"

namespace flatmuscle {

// Per-row: t, flat output, excitation per muscle, condition flags.
inline void write_flatness_csv(const std::string& path, const FlatnessReport& report,
                               const FlatTrajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << "t";
  for (int j = 0; j < traj.joint_count(); ++j) out << ",y" << (j + 1);
  const int m = report.excitations.empty() ? 0 : static_cast<int>(report.excitations[0].size());
  for (int i = 0; i < m; ++i) out << ",u" << (i + 1);
  out << ",c1_ok,c2_ok,c3_ok\n";
  for (std::size_t k = 0; k < report.sample_count(); ++k) {
    out << format_double(report.times[k]);
    const Vec y = traj.sample(report.times[k]).y;
    for (int j = 0; j < y.size(); ++j) out << "," << format_double(y[j]);
    for (int i = 0; i < m; ++i) out << "," << format_double(report.excitations[k][i]);
    const auto& f = report.flags[k];
    out << "," << (f.c1_ok ? 1 : 0) << "," << (f.c2_ok ? 1 : 0) << ","
        << (f.c3_ok ? 1 : 0) << "\n";
  }
}

inline Json flatness_summary_json(const FlatnessReport& report) {
  Json j;
  j["samples"] = report.sample_count();
  j["all_ok"] = report.all_ok;
  j["infeasible_samples"] = report.infeasible_samples;
  j["max_condition"] = report.max_condition;
  j["min_sigma"] = report.min_sigma;
  j["dt_ctrl"] = report.dt_ctrl;
  std::size_t c1 = 0, c2 = 0, c3 = 0;
  for (const auto& f : report.flags) {
    c1 += f.c1_ok;
    c2 += f.c2_ok;
    c3 += f.c3_ok;
  }
  j["c1_ok_fraction"] = report.flags.empty() ? 1.0 : double(c1) / report.flags.size();
  j["c2_ok_fraction"] = report.flags.empty() ? 1.0 : double(c2) / report.flags.size();
  j["c3_ok_fraction"] = report.flags.empty() ? 1.0 : double(c3) / report.flags.size();
  return j;
}

}  // namespace flatmuscle
