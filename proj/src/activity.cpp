#include "actsynth/activity.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

namespace actsynth {

namespace {

using nlohmann::json;

void check_reference(const Description& d, int kf, const Scene& scene, std::vector<Violation>& out) {
  if (!d.reference) {
    if (d.pose != FundamentalPose::standing) {
      out.push_back({kf, d.subject, "reference", "sitting and lying require a positional reference"});
    }
    return;
  }
  const SceneObject* obj = scene.find(*d.reference);
  if (!obj) {
    out.push_back({kf, d.subject, "reference", "unknown object " + std::to_string(*d.reference)});
    return;
  }
  if (d.pose == FundamentalPose::sitting && !obj->has(Affordance::sittable)) {
    out.push_back({kf, d.subject, "affordance", obj->mark_name() + " is not sittable"});
  }
  if (d.pose == FundamentalPose::lying && !obj->has(Affordance::lieable)) {
    out.push_back({kf, d.subject, "affordance", obj->mark_name() + " is not lieable"});
  }
}

void check_target(const Description& d, int kf, const Activity& a, const Scene& scene, std::vector<Violation>& out) {
  if (const auto* o = std::get_if<ObjectTarget>(&d.interaction.target)) {
    if (!scene.find(o->object_id)) {
      out.push_back({kf, d.subject, "target", "unknown object " + std::to_string(o->object_id)});
    }
  } else if (const auto* c = std::get_if<CharacterTarget>(&d.interaction.target)) {
    if (c->character_id == d.subject) {
      out.push_back({kf, d.subject, "target", "a character cannot interact with itself"});
    } else if (!a.has_character(c->character_id)) {
      out.push_back({kf, d.subject, "target", "unknown character " + c->character_id});
    }
  }
}

json target_to_json(const InteractionTarget& t, const Scene* scene) {
  if (std::holds_alternative<NoTarget>(t)) return nullptr;
  return target_token(t, scene);
}

InteractionTarget target_from_token(const std::string& token) {
  if (token.empty() || token == "none") return NoTarget{};
  if (auto id = parse_object_token(token)) return ObjectTarget{*id};
  if (is_character_token(token)) return CharacterTarget{token};
  return PropTarget{token};
}

}  // namespace

std::string_view to_string(FundamentalPose p) {
  switch (p) {
    case FundamentalPose::standing:
      return "standing";
    case FundamentalPose::sitting:
      return "sitting";
    case FundamentalPose::lying:
      return "lying";
  }
  return "unknown";
}

std::optional<FundamentalPose> pose_from_string(std::string_view s) {
  if (s == "standing") return FundamentalPose::standing;
  if (s == "sitting") return FundamentalPose::sitting;
  if (s == "lying") return FundamentalPose::lying;
  return std::nullopt;
}

std::string_view to_string(ChangeKind k) {
  switch (k) {
    case ChangeKind::unchanged:
      return "unchanged";
    case ChangeKind::moved:
      return "moved";
    case ChangeKind::reposed:
      return "reposed";
    case ChangeKind::reinteracted:
      return "reinteracted";
  }
  return "unknown";
}

const Description* Keyframe::find(const std::string& subject) const {
  for (const auto& d : descriptions) {
    if (d.subject == subject) return &d;
  }
  return nullptr;
}

const Keyframe* Activity::keyframe(int index) const {
  for (const auto& k : keyframes) {
    if (k.index == index) return &k;
  }
  return nullptr;
}

bool Activity::has_character(const std::string& id) const {
  return std::any_of(characters.begin(), characters.end(), [&](const Character& c) { return c.id == id; });
}

std::vector<Violation> validate_activity(const Activity& activity, const Scene& scene, std::optional<int> first_index) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& c : activity.characters) {
    if (c.id.empty()) out.push_back({std::nullopt, c.id, "character", "empty character id"});
    if (!ids.insert(c.id).second) out.push_back({std::nullopt, c.id, "character", "duplicate character id"});
  }

  for (std::size_t i = 0; i < activity.keyframes.size(); ++i) {
    const Keyframe& kf = activity.keyframes[i];
    const int expected = i == 0 ? kf.index : activity.keyframes[i - 1].index + 1;
    if (i == 0 && first_index && kf.index != *first_index) {
      out.push_back({kf.index, "", "keyframe_index", "first keyframe index must be " + std::to_string(*first_index)});
    } else if (i == 0 && !first_index && kf.index != 0 && kf.index != 1) {
      out.push_back({kf.index, "", "keyframe_index", "first keyframe index must be 0 or 1"});
    } else if (kf.index != expected) {
      out.push_back({kf.index, "", "keyframe_index",
                     "expected keyframe " + std::to_string(expected) + ", got " + std::to_string(kf.index)});
    }

    std::map<std::string, int> seen;
    for (const auto& d : kf.descriptions) {
      ++seen[d.subject];
      if (!ids.count(d.subject)) {
        out.push_back({kf.index, d.subject, "subject", "subject is not a declared character"});
      }
      check_reference(d, kf.index, scene, out);
      check_target(d, kf.index, activity, scene, out);
    }
    for (const auto& c : activity.characters) {
      const auto it = seen.find(c.id);
      if (it == seen.end()) {
        out.push_back({kf.index, c.id, "completeness", "keyframe has no description for this character"});
      } else if (it->second > 1) {
        out.push_back({kf.index, c.id, "completeness", "character described more than once"});
      }
    }
  }
  return out;
}

std::string describe(const Violation& v) {
  std::string s = v.rule;
  if (v.keyframe) s += " (keyframe " + std::to_string(*v.keyframe) + ")";
  if (!v.character.empty()) s += " [" + v.character + "]";
  return s + ": " + v.detail;
}

std::vector<StateChange> diff_keyframes(const Keyframe& prev, const Keyframe& next) {
  std::set<std::string> a, b;
  for (const auto& d : prev.descriptions) a.insert(d.subject);
  for (const auto& d : next.descriptions) b.insert(d.subject);
  if (a != b || a.size() != prev.descriptions.size() || b.size() != next.descriptions.size()) {
    throw ActivityError("diff_keyframes: keyframes " + std::to_string(prev.index) + " and " +
                        std::to_string(next.index) + " describe different characters");
  }
  std::vector<StateChange> out;
  for (const auto& d : prev.descriptions) {
    const Description& n = *next.find(d.subject);
    StateChange change{d.subject, ChangeKind::unchanged};
    if (d.reference != n.reference) {
      change.kind = ChangeKind::moved;
    } else if (d.pose != n.pose) {
      change.kind = ChangeKind::reposed;
    } else if (d.interaction != n.interaction) {
      change.kind = ChangeKind::reinteracted;
    }
    out.push_back(change);
  }
  return out;
}

std::optional<int> parse_object_token(std::string_view token) {
  constexpr std::string_view prefix = "object_";
  if (token.substr(0, prefix.size()) != prefix) return std::nullopt;
  const char* begin = token.data() + prefix.size();
  const char* end = token.data() + token.size();
  int id = 0;
  const auto [ptr, ec] = std::from_chars(begin, end, id);
  if (ec != std::errc{} || ptr == begin) return std::nullopt;
  if (ptr != end && *ptr != '-' && *ptr != '_') return std::nullopt;
  return id;
}

bool is_character_token(std::string_view token) {
  constexpr std::string_view prefix = "character_";
  return token.size() > prefix.size() && token.substr(0, prefix.size()) == prefix;
}

std::string target_token(const InteractionTarget& t, const Scene* scene) {
  if (const auto* o = std::get_if<ObjectTarget>(&t)) {
    if (scene) {
      if (const auto* obj = scene->find(o->object_id)) return obj->mark_name();
    }
    return "object_" + std::to_string(o->object_id);
  }
  if (const auto* c = std::get_if<CharacterTarget>(&t)) return c->character_id;
  if (const auto* p = std::get_if<PropTarget>(&t)) return p->name;
  return "none";
}

std::string format_description(const Description& d, const Scene* scene) {
  const std::string ref = d.reference ? target_token(ObjectTarget{*d.reference}, scene) : "none";
  return "(" + d.subject + ", " + std::string(to_string(d.pose)) + ", " + ref + ", (" + d.interaction.verb + ", " +
         target_token(d.interaction.target, scene) + "))";
}

json description_to_json(const Description& d, const Scene* scene) {
  return {{"subject", d.subject},
          {"pose", std::string(to_string(d.pose))},
          {"reference", d.reference ? json(target_token(ObjectTarget{*d.reference}, scene)) : json(nullptr)},
          {"interaction", {{"verb", d.interaction.verb}, {"target", target_to_json(d.interaction.target, scene)}}}};
}

Description description_from_json(const json& j) {
  Description d;
  d.subject = j.at("subject").get<std::string>();
  const auto pose_name = j.at("pose").get<std::string>();
  const auto pose = pose_from_string(pose_name);
  if (!pose) throw ActivityError("unknown pose '" + pose_name + "'");
  d.pose = *pose;
  if (j.contains("reference") && !j.at("reference").is_null()) {
    const auto& r = j.at("reference");
    if (r.is_number_integer()) {
      d.reference = r.get<int>();
    } else {
      const auto id = parse_object_token(r.get<std::string>());
      if (!id) throw ActivityError("reference '" + r.get<std::string>() + "' is not an object token");
      d.reference = *id;
    }
  }
  if (j.contains("interaction")) {
    const auto& i = j.at("interaction");
    d.interaction.verb = i.value("verb", std::string{});
    if (i.contains("target") && !i.at("target").is_null()) {
      d.interaction.target = target_from_token(i.at("target").get<std::string>());
    }
  }
  return d;
}

json activity_to_json(const Activity& a, const Scene* scene) {
  json chars = json::array();
  for (const auto& c : a.characters) chars.push_back({{"id", c.id}, {"role", c.role}});
  json kfs = json::array();
  for (const auto& k : a.keyframes) {
    json descs = json::array();
    for (const auto& d : k.descriptions) descs.push_back(description_to_json(d, scene));
    kfs.push_back({{"index", k.index}, {"descriptions", descs}});
  }
  return {{"characters", chars}, {"keyframes", kfs}};
}

Activity activity_from_json(const json& j) {
  Activity a;
  try {
    for (const auto& c : j.at("characters")) {
      a.characters.push_back({c.at("id").get<std::string>(), c.value("role", std::string{})});
    }
    for (const auto& k : j.at("keyframes")) {
      Keyframe kf;
      kf.index = k.at("index").get<int>();
      for (const auto& d : k.at("descriptions")) kf.descriptions.push_back(description_from_json(d));
      a.keyframes.push_back(std::move(kf));
    }
  } catch (const json::exception& e) {
    throw ActivityError(std::string("malformed activity JSON: ") + e.what());
  }
  return a;
}

}  // namespace actsynth
