#include "actsynth/scene.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace actsynth {

namespace {

using nlohmann::json;

constexpr std::array<Affordance, 4> kAllAffordances{Affordance::sittable, Affordance::lieable,
                                                    Affordance::walk_obstacle,
                                                    Affordance::support_surface};

double number_field(const json& obj, const char* key, int id) {
  if (!obj.contains(key)) throw SceneError(id, key, "missing field");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw SceneError(id, key, "expected a number");
  return v.get<double>();
}

Vec3 vec3_field(const json& obj, const char* key, int id) {
  if (!obj.contains(key)) throw SceneError(id, key, "missing field");
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) throw SceneError(id, key, "expected [x, y, z]");
  for (const auto& e : v) {
    if (!e.is_number()) throw SceneError(id, key, "expected numeric components");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Vec2 point_of(const json& v, const char* field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw SceneError(-1, field, "expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

SceneObject parse_object(const json& j) {
  if (!j.is_object()) throw SceneError(-1, "objects", "entry is not an object");
  if (!j.contains("id") || !j.at("id").is_number_integer()) {
    throw SceneError(-1, "id", "missing or non-integer id");
  }
  SceneObject obj;
  obj.id = j.at("id").get<int>();
  if (!j.contains("label") || !j.at("label").is_string()) {
    throw SceneError(obj.id, "label", "missing or non-string label");
  }
  obj.label = j.at("label").get<std::string>();
  obj.position = vec3_field(j, "position", obj.id);
  obj.yaw = number_field(j, "yaw", obj.id);
  obj.half_extents = vec3_field(j, "half_extents", obj.id);
  if (j.contains("affordances")) {
    const auto& arr = j.at("affordances");
    if (!arr.is_array()) throw SceneError(obj.id, "affordances", "expected an array");
    for (const auto& a : arr) {
      if (!a.is_string()) throw SceneError(obj.id, "affordances", "expected strings");
      const auto parsed = affordance_from_string(a.get<std::string>());
      if (!parsed) {
        throw SceneError(obj.id, "affordances", "unknown affordance '" + a.get<std::string>() + "'");
      }
      obj.affordances.insert(*parsed);
    }
  }
  if (j.contains("support_height") && !j.at("support_height").is_null()) {
    obj.support_height = number_field(j, "support_height", obj.id);
  }
  return obj;
}

}  // namespace

std::string_view to_string(Affordance a) {
  switch (a) {
    case Affordance::sittable:
      return "sittable";
    case Affordance::lieable:
      return "lieable";
    case Affordance::walk_obstacle:
      return "walk_obstacle";
    case Affordance::support_surface:
      return "support_surface";
  }
  return "unknown";
}

std::optional<Affordance> affordance_from_string(std::string_view s) {
  for (auto a : kAllAffordances) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::vector<Affordance> AffordanceSet::items() const {
  std::vector<Affordance> out;
  for (auto a : kAllAffordances) {
    if (has(a)) out.push_back(a);
  }
  return out;
}

std::string SceneObject::mark_name() const { return "object_" + std::to_string(id) + "-" + label; }

const SceneObject* Scene::find(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const SceneObject& Scene::at(int id) const {
  if (const auto* o = find(id)) return *o;
  throw SceneError(id, "id", "no such object");
}

SceneError::SceneError(int object_id, std::string field, const std::string& message)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "scene error";
        if (object_id >= 0) os << " (object " << object_id << ")";
        os << " [" << field << "]: " << message;
        return os.str();
      }()),
      object_id_(object_id),
      field_(std::move(field)) {}

Footprint footprint_of(const SceneObject& obj) {
  return {obj.position.xy(), obj.yaw, {obj.half_extents.x, obj.half_extents.y}};
}

void validate_scene(const Scene& scene) {
  const Rect2& fb = scene.floor_bounds;
  if (!(fb.xmax > fb.xmin) || !(fb.ymax > fb.ymin)) {
    throw SceneError(-1, "floor_bounds", "empty rectangle");
  }
  std::set<int> seen;
  for (const auto& o : scene.objects) {
    if (!seen.insert(o.id).second) throw SceneError(o.id, "id", "duplicate id");
    if (!(o.half_extents.x > 0.0 && o.half_extents.y > 0.0 && o.half_extents.z > 0.0)) {
      throw SceneError(o.id, "half_extents", "must be strictly positive");
    }
    if (o.has(Affordance::lieable) && !o.has(Affordance::support_surface)) {
      throw SceneError(o.id, "affordances", "lieable requires support_surface");
    }
    if (o.has(Affordance::support_surface) != o.support_height.has_value()) {
      throw SceneError(o.id, "support_height", "present iff support_surface");
    }
    for (const auto& c : footprint_of(o).corners()) {
      if (!fb.contains(c, 1e-9)) throw SceneError(o.id, "position", "footprint leaves floor_bounds");
    }
  }
}

Scene parse_scene(const json& doc) {
  if (!doc.is_object()) throw SceneError(-1, "root", "expected a JSON object");
  Scene scene;
  if (!doc.contains("objects") || !doc.at("objects").is_array()) {
    throw SceneError(-1, "objects", "missing array");
  }
  for (const auto& j : doc.at("objects")) scene.objects.push_back(parse_object(j));
  if (doc.contains("walls")) {
    if (!doc.at("walls").is_array()) throw SceneError(-1, "walls", "expected an array");
    for (const auto& w : doc.at("walls")) {
      if (!w.is_array() || w.size() != 2) throw SceneError(-1, "walls", "expected [[x1,y1],[x2,y2]]");
      scene.walls.push_back({point_of(w[0], "walls"), point_of(w[1], "walls")});
    }
  }
  if (!doc.contains("floor_bounds")) throw SceneError(-1, "floor_bounds", "missing field");
  const auto& fb = doc.at("floor_bounds");
  if (!fb.is_array() || fb.size() != 4) {
    throw SceneError(-1, "floor_bounds", "expected [xmin, ymin, xmax, ymax]");
  }
  for (const auto& v : fb) {
    if (!v.is_number()) throw SceneError(-1, "floor_bounds", "expected numbers");
  }
  scene.floor_bounds = {fb[0].get<double>(), fb[1].get<double>(), fb[2].get<double>(), fb[3].get<double>()};
  validate_scene(scene);
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(-1, "path", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SceneError(-1, "json", e.what());
  }
  return parse_scene(doc);
}

json scene_to_json(const Scene& scene) {
  json objects = json::array();
  for (const auto& o : scene.objects) {
    json affs = json::array();
    for (auto a : o.affordances.items()) affs.push_back(std::string(to_string(a)));
    json j = {{"id", o.id},
              {"label", o.label},
              {"position", {o.position.x, o.position.y, o.position.z}},
              {"yaw", o.yaw},
              {"half_extents", {o.half_extents.x, o.half_extents.y, o.half_extents.z}},
              {"affordances", affs}};
    if (o.support_height) j["support_height"] = *o.support_height;
    objects.push_back(std::move(j));
  }
  json walls = json::array();
  for (const auto& w : scene.walls) walls.push_back({{w.a.x, w.a.y}, {w.b.x, w.b.y}});
  const auto& fb = scene.floor_bounds;
  return {{"objects", objects}, {"walls", walls}, {"floor_bounds", {fb.xmin, fb.ymin, fb.xmax, fb.ymax}}};
}

bool wall_free(const Scene& scene, const Segment2& s) {
  for (const auto& w : scene.walls) {
    if (segments_intersect(s, w)) return false;
  }
  return true;
}

}  // namespace actsynth
