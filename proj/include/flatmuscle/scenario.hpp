#pragma once

#include <filesystem>
#include <string>

#include "flatmuscle/json_util.hpp"
#include "flatmuscle/kmac.hpp"
#include "flatmuscle/plant_io.hpp"
#include "flatmuscle/planner.hpp"

namespace flatmuscle {

struct ServeBox {
  Vec3 p_lo = Vec3::Zero();
  Vec3 p_hi = Vec3::Zero();
  Vec3 v_lo = Vec3::Zero();
  Vec3 v_hi = Vec3::Zero();
};

struct RewardWeights {
  double w_g = 0.5;
  double w_c = 1.0;
  double w_s = 2.0;
};

// Shared spatial boundary on each hitting plane (dual mode): the serve is
// constrained to cross inside it and a return only counts as an exchange if
// its crossing stays inside it.
struct RallyBox {
  double y_lo = -0.5;
  double y_hi = 0.5;
  double z_lo = 0.15;
  double z_hi = 0.55;

  bool contains(double y, double z) const {
    return y >= y_lo && y <= y_hi && z >= z_lo && z <= z_hi;
  }
};

struct TrackerParams {
  Vec ready_pose;
  double recover_time = 0.7;
  double lead_time = 0.04;
  double follow_through = 0.06;
  double ik_damping = 0.05;
  int ik_iterations = 4;
  double orient_weight = 0.25;
};

enum class EpisodeMode { single, dual };

struct Scenario {
  std::string plant_path;
  PlantModel plant;
  EpisodeMode mode = EpisodeMode::single;
  std::uint64_t seed = 0;
  double horizon = 3.0;
  double dt = 1e-4;
  double dt_ctrl = 1e-2;
  TableGeometry table;
  PlannerConfig planner;
  ServeBox serve;
  RewardWeights rewards;
  RallyBox rally_box;
  KmacGains kmac;
  TrackerParams tracker;

  void validate() const {
    if (horizon <= 0.0) throw ConfigError("scenario: horizon must be positive");
    if (dt <= 0.0 || dt > 1e-2) throw ConfigError("scenario: dt must be in (0, 1e-2]");
    if (dt_ctrl < dt) throw ConfigError("scenario: dt_ctrl must be >= dt");
    if (rewards.w_g < 0 || rewards.w_c < 0 || rewards.w_s < 0)
      throw ConfigError("scenario: reward weights must be non-negative");
    if (planner.vz_hi < planner.vz_lo)
      throw ConfigError("scenario: planner.vz_range must be a nonempty interval");
    if (planner.target.x_lower >= planner.target.x_upper ||
        planner.target.y_lower >= planner.target.y_upper)
      throw ConfigError("scenario: planner.target_box must have positive extent");
    if (planner.c_r <= 0.0 || planner.c_r > 1.0)
      throw ConfigError("scenario: planner.c_r must be in (0, 1]");
    if (table.c_h <= 0.0 || table.c_h > 1.0 || table.c_v <= 0.0 || table.c_v > 1.0)
      throw ConfigError("scenario: table restitution must be in (0, 1]");
    for (int i = 0; i < 3; ++i) {
      if (serve.p_lo[i] > serve.p_hi[i] || serve.v_lo[i] > serve.v_hi[i])
        throw ConfigError("scenario: serve boxes must be nonempty");
    }
    if (tracker.ready_pose.size() != plant.joint_count())
      throw ConfigError("scenario: tracker.ready_pose size must match the plant");
  }
};

inline Json scenario_to_json(const Scenario& s) {
  Json j;
  j["format"] = 1;
  j["plant"] = s.plant_path;
  j["mode"] = s.mode == EpisodeMode::single ? "single" : "dual";
  j["seed"] = s.seed;
  j["horizon"] = s.horizon;
  j["dt"] = s.dt;
  j["dt_ctrl"] = s.dt_ctrl;
  j["table"] = {{"length", s.table.length},     {"width", s.table.width},
                {"net_height", s.table.net_height}, {"net_x", s.table.net_x},
                {"c_h", s.table.c_h},           {"c_v", s.table.c_v},
                {"g", s.table.g}};
  j["planner"] = {
      {"plane_x", s.planner.plane_x},
      {"vz_range", Json::array({s.planner.vz_lo, s.planner.vz_hi})},
      {"target_box",
       {{"x_lower", s.planner.target.x_lower},
        {"x_upper", s.planner.target.x_upper},
        {"y_lower", s.planner.target.y_lower},
        {"y_upper", s.planner.target.y_upper}}},
      {"c_r", s.planner.c_r}};
  j["serve"] = {{"position", {{"lo", vec3_to_json(s.serve.p_lo)},
                              {"hi", vec3_to_json(s.serve.p_hi)}}},
                {"velocity", {{"lo", vec3_to_json(s.serve.v_lo)},
                              {"hi", vec3_to_json(s.serve.v_hi)}}}};
  j["rewards"] = {{"w_g", s.rewards.w_g}, {"w_c", s.rewards.w_c}, {"w_s", s.rewards.w_s}};
  j["rally_box"] = {{"y", Json::array({s.rally_box.y_lo, s.rally_box.y_hi})},
                    {"z", Json::array({s.rally_box.z_lo, s.rally_box.z_hi})}};
  j["kmac"] = {{"kp", s.kmac.kp},
               {"kd", s.kmac.kd},
               {"mode", s.kmac.mode == KmacGains::Mode::kStatic ? "static"
                                                                : "rate-compensated"}};
  Json ready = Json::array();
  for (int i = 0; i < s.tracker.ready_pose.size(); ++i)
    ready.push_back(s.tracker.ready_pose[i]);
  j["tracker"] = {{"ready_pose", ready},
                  {"recover_time", s.tracker.recover_time},
                  {"lead_time", s.tracker.lead_time},
                  {"follow_through", s.tracker.follow_through},
                  {"ik_damping", s.tracker.ik_damping},
                  {"ik_iterations", s.tracker.ik_iterations},
                  {"orient_weight", s.tracker.orient_weight}};
  return j;
}

// `plant` may be a path relative to `base_dir`; the resolved model is
// embedded so a scenario snapshot is self-contained on re-run.
inline Scenario scenario_from_json(const Json& j, const std::string& where,
                                   const std::string& base_dir) {
  if (get_field_or<int>(j, "format", 0) != 1)
    throw ConfigError(where + ": unsupported or missing format (expected 1)");
  Scenario s;
  if (j.contains("plant_model")) {
    s.plant = plant_from_json(j.at("plant_model"), where + ".plant_model");
    s.plant_path = get_field_or<std::string>(j, "plant", "");
  } else {
    s.plant_path = get_field<std::string>(j, "plant", where);
    std::filesystem::path p(s.plant_path);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    s.plant = load_plant(p.string());
  }
  const std::string mode = get_field_or<std::string>(j, "mode", "single");
  if (mode == "single") s.mode = EpisodeMode::single;
  else if (mode == "dual") s.mode = EpisodeMode::dual;
  else throw ConfigError(where + ".mode: expected 'single' or 'dual'");
  s.seed = get_field_or<std::uint64_t>(j, "seed", 0);
  s.horizon = get_field<double>(j, "horizon", where);
  s.dt = get_field_or<double>(j, "dt", 1e-4);
  s.dt_ctrl = get_field_or<double>(j, "dt_ctrl", 1e-2);
  if (j.contains("table")) {
    const auto& t = j.at("table");
    s.table.length = get_field_or<double>(t, "length", s.table.length);
    s.table.width = get_field_or<double>(t, "width", s.table.width);
    s.table.net_height = get_field_or<double>(t, "net_height", s.table.net_height);
    s.table.net_x = get_field_or<double>(t, "net_x", s.table.net_x);
    s.table.c_h = get_field_or<double>(t, "c_h", s.table.c_h);
    s.table.c_v = get_field_or<double>(t, "c_v", s.table.c_v);
    s.table.g = get_field_or<double>(t, "g", s.table.g);
  }
  if (j.contains("planner")) {
    const auto& p = j.at("planner");
    s.planner.plane_x = get_field_or<double>(p, "plane_x", s.planner.plane_x);
    if (p.contains("vz_range")) {
      const auto& r = p.at("vz_range");
      if (!r.is_array() || r.size() != 2)
        throw ConfigError(where + ".planner.vz_range: expected [lo, hi]");
      s.planner.vz_lo = r[0].get<double>();
      s.planner.vz_hi = r[1].get<double>();
    }
    if (p.contains("target_box")) {
      const auto& b = p.at("target_box");
      s.planner.target.x_lower = get_field<double>(b, "x_lower", where + ".target_box");
      s.planner.target.x_upper = get_field<double>(b, "x_upper", where + ".target_box");
      s.planner.target.y_lower = get_field<double>(b, "y_lower", where + ".target_box");
      s.planner.target.y_upper = get_field<double>(b, "y_upper", where + ".target_box");
    }
    s.planner.c_r = get_field_or<double>(p, "c_r", s.planner.c_r);
  }
  if (j.contains("serve")) {
    const auto& sv = j.at("serve");
    s.serve.p_lo = get_vec3(sv.at("position"), "lo", where + ".serve.position");
    s.serve.p_hi = get_vec3(sv.at("position"), "hi", where + ".serve.position");
    s.serve.v_lo = get_vec3(sv.at("velocity"), "lo", where + ".serve.velocity");
    s.serve.v_hi = get_vec3(sv.at("velocity"), "hi", where + ".serve.velocity");
  }
  if (j.contains("rewards")) {
    const auto& r = j.at("rewards");
    s.rewards.w_g = get_field_or<double>(r, "w_g", s.rewards.w_g);
    s.rewards.w_c = get_field_or<double>(r, "w_c", s.rewards.w_c);
    s.rewards.w_s = get_field_or<double>(r, "w_s", s.rewards.w_s);
  }
  if (j.contains("rally_box")) {
    const auto& b = j.at("rally_box");
    const auto& y = b.at("y");
    const auto& z = b.at("z");
    s.rally_box.y_lo = y[0].get<double>();
    s.rally_box.y_hi = y[1].get<double>();
    s.rally_box.z_lo = z[0].get<double>();
    s.rally_box.z_hi = z[1].get<double>();
  }
  if (j.contains("kmac")) {
    const auto& k = j.at("kmac");
    s.kmac.kp = get_field_or<double>(k, "kp", s.kmac.kp);
    s.kmac.kd = get_field_or<double>(k, "kd", s.kmac.kd);
    if (k.contains("mode"))
      s.kmac.mode = kmac_mode_from_string(k.at("mode").get<std::string>());
  }
  s.tracker.ready_pose = Vec::Zero(s.plant.joint_count());
  if (j.contains("tracker")) {
    const auto& t = j.at("tracker");
    if (t.contains("ready_pose")) {
      const auto& r = t.at("ready_pose");
      if (static_cast<int>(r.size()) != s.plant.joint_count())
        throw ConfigError(where + ".tracker.ready_pose: size must match the plant");
      for (std::size_t i = 0; i < r.size(); ++i)
        s.tracker.ready_pose[static_cast<int>(i)] = r[i].get<double>();
    }
    s.tracker.recover_time = get_field_or<double>(t, "recover_time", s.tracker.recover_time);
    s.tracker.lead_time = get_field_or<double>(t, "lead_time", s.tracker.lead_time);
    s.tracker.follow_through =
        get_field_or<double>(t, "follow_through", s.tracker.follow_through);
    s.tracker.ik_damping = get_field_or<double>(t, "ik_damping", s.tracker.ik_damping);
    s.tracker.ik_iterations =
        get_field_or<int>(t, "ik_iterations", s.tracker.ik_iterations);
    s.tracker.orient_weight =
        get_field_or<double>(t, "orient_weight", s.tracker.orient_weight);
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  const std::filesystem::path p(path);
  return scenario_from_json(load_json_file(path), path, p.parent_path().string());
}

// Snapshot with the plant model embedded, for byte-identical re-runs.
inline Json scenario_snapshot(const Scenario& s) {
  Json j = scenario_to_json(s);
  j["plant_model"] = plant_to_json(s.plant);
  return j;
}

}  // namespace flatmuscle
