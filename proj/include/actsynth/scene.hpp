#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "actsynth/geometry.hpp"

namespace actsynth {

enum class Affordance : std::uint8_t {
  sittable = 1u << 0,
  lieable = 1u << 1,
  walk_obstacle = 1u << 2,
  support_surface = 1u << 3,
};

std::string_view to_string(Affordance a);
std::optional<Affordance> affordance_from_string(std::string_view s);

class AffordanceSet {
 public:
  AffordanceSet() = default;
  AffordanceSet(std::initializer_list<Affordance> items) {
    for (auto a : items) insert(a);
  }

  void insert(Affordance a) { bits_ |= static_cast<std::uint8_t>(a); }
  bool has(Affordance a) const { return (bits_ & static_cast<std::uint8_t>(a)) != 0; }
  bool empty() const { return bits_ == 0; }
  /// Members in canonical order.
  std::vector<Affordance> items() const;
  bool operator==(const AffordanceSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Oriented box. `position` is the box center; local +x is the object's front.
struct SceneObject {
  int id = 0;
  std::string label;
  Vec3 position;
  double yaw = 0.0;
  Vec3 half_extents;
  AffordanceSet affordances;
  std::optional<double> support_height;

  bool has(Affordance a) const { return affordances.has(a); }
  /// "object_<id>-<label>", the mark name shown to the model.
  std::string mark_name() const;
  Vec2 facing() const { return heading(yaw); }
  Box3 box() const { return {position, yaw, half_extents}; }

  bool operator==(const SceneObject&) const = default;
};

struct Scene {
  std::vector<SceneObject> objects;
  std::vector<Segment2> walls;
  Rect2 floor_bounds;

  const SceneObject* find(int id) const;
  const SceneObject& at(int id) const;
  bool operator==(const Scene&) const = default;
};

/// Raised for malformed scenes. `object_id` is -1 when the problem is not tied to one object.
class SceneError : public std::runtime_error {
 public:
  SceneError(int object_id, std::string field, const std::string& message);

  int object_id() const { return object_id_; }
  const std::string& field() const { return field_; }

 private:
  int object_id_;
  std::string field_;
};

Footprint footprint_of(const SceneObject& obj);

Scene parse_scene(const nlohmann::json& doc);
Scene load_scene(const std::filesystem::path& path);
nlohmann::json scene_to_json(const Scene& scene);
/// Throws SceneError on the first invariant breach.
void validate_scene(const Scene& scene);

/// True iff the segment crosses no wall.
bool wall_free(const Scene& scene, const Segment2& s);

}  // namespace actsynth
