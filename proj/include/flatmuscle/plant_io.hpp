#pragma once

#include <string>

#include "flatmuscle/json_util.hpp"
#include "flatmuscle/plant.hpp"

namespace flatmuscle {

// Plant model file, format 1. Lengths in meters, masses in kg, angles in
// radians. Top-level keys: links, joints, muscles, direct_drives, gravity.

inline Json hill_to_json(const HillParams& p) {
  Json j;
  j["f_max"] = p.f_max;
  j["l_min"] = p.l_min;
  j["l_opt"] = p.l_opt;
  j["l_max"] = p.l_max;
  j["tau_act"] = p.tau_act;
  j["tau_deact"] = p.tau_deact;
  j["fl_width"] = p.fl_width;
  j["fv_shape"] = p.fv_shape;
  j["fv_ceiling"] = p.fv_ceiling;
  j["fp_stiffness"] = p.fp_stiffness;
  return j;
}

inline HillParams hill_from_json(const Json& j, const std::string& where) {
  HillParams p;
  p.f_max = get_field<double>(j, "f_max", where);
  p.l_min = get_field<double>(j, "l_min", where);
  p.l_opt = get_field<double>(j, "l_opt", where);
  p.l_max = get_field<double>(j, "l_max", where);
  p.tau_act = get_field_or<double>(j, "tau_act", 0.01);
  p.tau_deact = get_field_or<double>(j, "tau_deact", 0.04);
  p.fl_width = get_field_or<double>(j, "fl_width", 0.45);
  p.fv_shape = get_field_or<double>(j, "fv_shape", 4.0);
  p.fv_ceiling = get_field_or<double>(j, "fv_ceiling", 1.4);
  p.fp_stiffness = get_field_or<double>(j, "fp_stiffness", 0.0);
  return p;
}

inline Json plant_to_json(const PlantModel& model) {
  Json j;
  j["format"] = 1;
  j["name"] = model.name;
  j["gravity"] = vec3_to_json(model.gravity);
  j["links"] = Json::array();
  for (const auto& link : model.links) {
    Json l;
    l["mass"] = link.mass;
    l["com"] = vec3_to_json(link.com);
    l["inertia"] = vec3_to_json(link.inertia);
    l["tip"] = vec3_to_json(link.tip);
    j["links"].push_back(l);
  }
  j["joints"] = Json::array();
  for (const auto& joint : model.joints) {
    Json a;
    a["type"] = joint.type == JointType::revolute ? "revolute" : "prismatic";
    a["axis"] = vec3_to_json(joint.axis);
    a["origin"] = vec3_to_json(joint.origin);
    a["limits"] = Json::array({joint.lo, joint.hi});
    j["joints"].push_back(a);
  }
  j["muscles"] = Json::array();
  for (int i = 0; i < model.muscle_count(); ++i) {
    Json m;
    m["name"] = model.hill[i].name;
    m["path"] = Json::array();
    for (const auto& vp : model.muscle_paths[i].points) {
      Json v;
      v["link"] = vp.link;
      v["point"] = vec3_to_json(vp.point);
      m["path"].push_back(v);
    }
    m["hill"] = hill_to_json(model.hill[i]);
    j["muscles"].push_back(m);
  }
  j["direct_drives"] = Json::array();
  for (const auto& d : model.direct_drives) {
    Json a;
    a["joint"] = d.joint;
    a["force_limit"] = d.force_limit;
    a["kp"] = d.kp;
    a["kd"] = d.kd;
    j["direct_drives"].push_back(a);
  }
  if (model.racket.attached()) {
    Json r;
    r["link"] = model.racket.link;
    r["offset"] = vec3_to_json(model.racket.offset);
    r["normal"] = vec3_to_json(model.racket.normal);
    r["radius"] = model.racket.radius;
    j["racket"] = r;
  }
  return j;
}

inline PlantModel plant_from_json(const Json& j, const std::string& where) {
  if (get_field_or<int>(j, "format", 0) != 1)
    throw ConfigError(where + ": unsupported or missing format (expected 1)");
  PlantModel model;
  model.name = get_field_or<std::string>(j, "name", "");
  model.gravity = get_vec3(j, "gravity", where);
  if (!j.contains("links") || !j.contains("joints") || !j.contains("muscles"))
    throw ConfigError(where + ": links, joints, and muscles are required");
  int idx = 0;
  for (const auto& l : j.at("links")) {
    const std::string at = where + ".links[" + std::to_string(idx++) + "]";
    Link link;
    link.mass = get_field<double>(l, "mass", at);
    link.com = get_vec3(l, "com", at);
    link.inertia = get_vec3(l, "inertia", at);
    link.tip = l.contains("tip") ? get_vec3(l, "tip", at) : Vec3::Zero();
    model.links.push_back(link);
  }
  idx = 0;
  for (const auto& a : j.at("joints")) {
    const std::string at = where + ".joints[" + std::to_string(idx++) + "]";
    Joint joint;
    const auto type = get_field<std::string>(a, "type", at);
    if (type == "revolute") joint.type = JointType::revolute;
    else if (type == "prismatic") joint.type = JointType::prismatic;
    else throw ConfigError(at + ": unknown joint type '" + type + "'");
    joint.axis = get_vec3(a, "axis", at);
    joint.origin = get_vec3(a, "origin", at);
    const auto& lim = a.at("limits");
    if (!lim.is_array() || lim.size() != 2)
      throw ConfigError(at + ".limits: expected [lo, hi]");
    joint.lo = lim[0].get<double>();
    joint.hi = lim[1].get<double>();
    model.joints.push_back(joint);
  }
  idx = 0;
  for (const auto& m : j.at("muscles")) {
    const std::string at = where + ".muscles[" + std::to_string(idx++) + "]";
    MusclePath path;
    for (const auto& v : m.at("path")) {
      ViaPoint vp;
      vp.link = get_field<int>(v, "link", at + ".path");
      vp.point = get_vec3(v, "point", at + ".path");
      path.points.push_back(vp);
    }
    HillParams hp = hill_from_json(m.at("hill"), at + ".hill");
    hp.name = get_field_or<std::string>(m, "name", "");
    model.muscle_paths.push_back(path);
    model.hill.push_back(hp);
  }
  if (j.contains("direct_drives")) {
    for (const auto& d : j.at("direct_drives")) {
      DirectDrive dd;
      dd.joint = get_field<int>(d, "joint", where + ".direct_drives");
      dd.force_limit = get_field<double>(d, "force_limit", where + ".direct_drives");
      dd.kp = get_field_or<double>(d, "kp", 0.0);
      dd.kd = get_field_or<double>(d, "kd", 0.0);
      model.direct_drives.push_back(dd);
    }
  }
  if (j.contains("racket") && !j.at("racket").is_null()) {
    const auto& r = j.at("racket");
    model.racket.link = get_field<int>(r, "link", where + ".racket");
    model.racket.offset = get_vec3(r, "offset", where + ".racket");
    model.racket.normal = get_vec3(r, "normal", where + ".racket").normalized();
    model.racket.radius = get_field_or<double>(r, "radius", 0.085);
  }
  model.validate();
  return model;
}

inline PlantModel load_plant(const std::string& path) {
  return plant_from_json(load_json_file(path), path);
}

inline void save_plant(const std::string& path, const PlantModel& model) {
  save_json_file(path, plant_to_json(model));
}

}  // namespace flatmuscle
