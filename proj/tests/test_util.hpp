#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "actsynth/scene.hpp"

namespace actsynth::test {

inline std::string fixture(const std::string& name) { return std::string(ACTSYNTH_FIXTURE_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scene apartment() { return load_scene(fixture("apartment.json")); }

inline SceneObject box(int id, std::string label, Vec3 pos, Vec3 half, AffordanceSet aff = {Affordance::walk_obstacle},
                       double yaw = 0.0) {
  SceneObject o;
  o.id = id;
  o.label = std::move(label);
  o.position = pos;
  o.half_extents = half;
  o.yaw = yaw;
  o.affordances = aff;
  if (aff.has(Affordance::support_surface)) o.support_height = pos.z + half.z;
  return o;
}

}  // namespace actsynth::test
