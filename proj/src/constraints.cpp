#include "actsynth/constraints.hpp"

#include <fstream>

#include "actsynth/backend.hpp"
#include "actsynth/response_parser.hpp"

namespace actsynth {

using nlohmann::json;

std::string_view to_string(ConstraintKind k) { return k == ConstraintKind::positional ? "positional" : "rotational"; }

std::string_view to_string(FacingRule f) {
  switch (f) {
    case FacingRule::none:
      return "none";
    case FacingRule::face_target:
      return "face_target";
    case FacingRule::mutual_face:
      return "mutual_face";
  }
  return "none";
}

std::optional<FacingRule> facing_from_string(std::string_view s) {
  if (s == "none") return FacingRule::none;
  if (s == "face_target") return FacingRule::face_target;
  if (s == "mutual_face") return FacingRule::mutual_face;
  return std::nullopt;
}

VerbTable VerbTable::builtin() {
  VerbTable t;
  t.set("talk to", {2.0, FacingRule::mutual_face});
  t.set("talk", {2.0, FacingRule::mutual_face});
  t.set("use", {0.5, FacingRule::face_target});
  t.set("read", {0.5, FacingRule::face_target});
  t.set("watch", {5.0, FacingRule::face_target});
  t.set("get", {0.6, FacingRule::face_target});
  t.set("open", {0.6, FacingRule::face_target});
  return t;
}

VerbTable VerbTable::from_json(const json& j) {
  VerbTable t;
  try {
    for (const auto& [verb, rule] : j.at("verbs").items()) {
      VerbRule r;
      if (rule.contains("D") && !rule.at("D").is_null()) {
        r.distance = rule.at("D").get<double>();
        if (*r.distance <= 0.0) throw std::invalid_argument("verb '" + verb + "': D must be positive");
      }
      const auto facing = rule.value("facing", std::string("face_target"));
      const auto f = facing_from_string(facing);
      if (!f) throw std::invalid_argument("verb '" + verb + "': unknown facing '" + facing + "'");
      r.facing = *f;
      t.set(verb, r);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed verb table: ") + e.what());
  }
  return t;
}

VerbTable VerbTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("verb table not found: " + path.string());
  return from_json(json::parse(in));
}

std::optional<VerbRule> VerbTable::lookup(const std::string& verb) const {
  if (auto it = rules_.find(verb); it != rules_.end()) return it->second;
  const auto space = verb.find(' ');
  if (space != std::string::npos) {
    if (auto it = rules_.find(verb.substr(0, space)); it != rules_.end()) return it->second;
  }
  return std::nullopt;
}

json VerbTable::to_json() const {
  json verbs = json::object();
  for (const auto& [verb, r] : rules_) {
    verbs[verb] = {{"D", r.distance ? json(*r.distance) : json(nullptr)}, {"facing", std::string(to_string(r.facing))}};
  }
  return {{"verbs", verbs}};
}

VerbResolver backend_verb_resolver(LlmBackend& backend) {
  return [&backend](const std::string& verb) -> std::optional<VerbRule> {
    PromptBundle p;
    p.system_text =
        "You convert a human interaction verb into placement constraints. Reply with one JSON object "
        "{\"D\": <meters>, \"facing\": \"face_target\" | \"mutual_face\"}.";
    p.user_parts.push_back(PromptPart::text("Verb: " + verb));
    try {
      const auto objects = extract_json_objects(backend.complete(p));
      if (objects.empty()) return std::nullopt;
      const auto& j = objects.back().second;
      VerbRule r;
      r.distance = j.at("D").get<double>();
      if (*r.distance <= 0.0) return std::nullopt;
      const auto f = facing_from_string(j.value("facing", std::string("face_target")));
      if (!f) return std::nullopt;
      r.facing = *f;
      return r;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
}

std::vector<InteractionConstraintSpec> compile_constraints(const Description& desc, const Scene& scene,
                                                           const VerbTable& table, const VerbResolver& resolver) {
  const auto& target = desc.interaction.target;
  const bool to_object = std::holds_alternative<ObjectTarget>(target);
  const bool to_character = std::holds_alternative<CharacterTarget>(target);
  if (!to_object && !to_character) return {};
  if (to_object && !scene.find(std::get<ObjectTarget>(target).object_id)) return {};

  std::optional<VerbRule> rule = table.lookup(desc.interaction.verb);
  if (!rule && resolver) rule = resolver(desc.interaction.verb);
  if (!rule) rule = VerbRule{kFallbackDistance, to_character ? FacingRule::mutual_face : FacingRule::face_target};

  FacingRule facing = rule->facing;
  if (facing == FacingRule::mutual_face && !to_character) facing = FacingRule::face_target;

  std::vector<InteractionConstraintSpec> out;
  if (rule->distance) {
    out.push_back({ConstraintKind::positional, desc.subject, target, *rule->distance, FacingRule::none});
  }
  if (facing != FacingRule::none) {
    out.push_back({ConstraintKind::rotational, desc.subject, target, 0.0, facing});
  }
  if (facing == FacingRule::mutual_face) {
    out.push_back({ConstraintKind::rotational, std::get<CharacterTarget>(target).character_id,
                   CharacterTarget{desc.subject}, 0.0, facing});
  }
  return out;
}

json constraint_to_json(const InteractionConstraintSpec& c) {
  json j = {{"kind", std::string(to_string(c.kind))}, {"subject", c.subject}, {"target", target_token(c.target)}};
  if (c.kind == ConstraintKind::positional) {
    j["threshold_D"] = c.threshold_d;
  } else {
    j["direction_pair"] = std::string(to_string(c.direction));
  }
  return j;
}

}  // namespace actsynth
