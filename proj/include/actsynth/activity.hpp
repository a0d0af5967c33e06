#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "actsynth/scene.hpp"

namespace actsynth {

enum class FundamentalPose { standing, sitting, lying };

std::string_view to_string(FundamentalPose p);
std::optional<FundamentalPose> pose_from_string(std::string_view s);

struct Character {
  std::string id;
  std::string role;
  bool operator==(const Character&) const = default;
};

/// Who or what an interaction is directed at.
struct NoTarget {
  bool operator==(const NoTarget&) const = default;
};
struct ObjectTarget {
  int object_id = 0;
  bool operator==(const ObjectTarget&) const = default;
};
struct CharacterTarget {
  std::string character_id;
  bool operator==(const CharacterTarget&) const = default;
};
/// A hand-held item absent from the scene model ("newspaper").
struct PropTarget {
  std::string name;
  bool operator==(const PropTarget&) const = default;
};
using InteractionTarget = std::variant<NoTarget, ObjectTarget, CharacterTarget, PropTarget>;

struct Interaction {
  std::string verb;
  InteractionTarget target;
  bool operator==(const Interaction&) const = default;
};

struct Description {
  std::string subject;
  FundamentalPose pose = FundamentalPose::standing;
  std::optional<int> reference;  // object id
  Interaction interaction;
  bool operator==(const Description&) const = default;
};

struct Keyframe {
  int index = 0;
  std::vector<Description> descriptions;

  const Description* find(const std::string& subject) const;
  bool operator==(const Keyframe&) const = default;
};

/// Keyframe indices are contiguous and start at 0 or 1.
struct Activity {
  std::vector<Character> characters;
  std::vector<Keyframe> keyframes;

  const Keyframe* keyframe(int index) const;
  bool has_character(const std::string& id) const;
  bool operator==(const Activity&) const = default;
};

struct Violation {
  std::optional<int> keyframe;
  std::string character;
  std::string rule;
  std::string detail;
};

/// `first_index` pins the first keyframe index; by default 0 and 1 are both accepted.
std::vector<Violation> validate_activity(const Activity& activity, const Scene& scene,
                                        std::optional<int> first_index = std::nullopt);

std::string describe(const Violation& v);

enum class ChangeKind { unchanged, moved, reposed, reinteracted };

std::string_view to_string(ChangeKind k);

struct StateChange {
  std::string character;
  ChangeKind kind = ChangeKind::unchanged;
  bool moved() const { return kind == ChangeKind::moved; }
};

class ActivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ActivityError when the two keyframes cover different characters.
std::vector<StateChange> diff_keyframes(const Keyframe& prev, const Keyframe& next);

/// Canonical token for a target: "object_0-sink", "character_1", "none", or the prop name.
std::string target_token(const InteractionTarget& t, const Scene* scene = nullptr);
/// Tuple form used in prompts: "(character_0, sitting, object_11-sofa, (read, newspaper))".
std::string format_description(const Description& d, const Scene* scene = nullptr);

nlohmann::json activity_to_json(const Activity& a, const Scene* scene = nullptr);
Activity activity_from_json(const nlohmann::json& j);
nlohmann::json description_to_json(const Description& d, const Scene* scene = nullptr);
Description description_from_json(const nlohmann::json& j);

/// Parses "object_7", "object_7-chair"; nullopt for anything else.
std::optional<int> parse_object_token(std::string_view token);
bool is_character_token(std::string_view token);

}  // namespace actsynth
