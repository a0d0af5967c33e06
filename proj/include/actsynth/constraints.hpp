#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actsynth/activity.hpp"

namespace actsynth {

class LlmBackend;

enum class ConstraintKind { positional, rotational };
enum class FacingRule { none, face_target, mutual_face };

std::string_view to_string(ConstraintKind k);
std::string_view to_string(FacingRule f);
std::optional<FacingRule> facing_from_string(std::string_view s);

/// One optimizer term derived from an interaction. Rotational specs ask the
/// subject's gaze to point at the target; positional specs bound the distance.
struct InteractionConstraintSpec {
  ConstraintKind kind = ConstraintKind::positional;
  std::string subject;
  InteractionTarget target;  // ObjectTarget or CharacterTarget
  double threshold_d = 0.0;  // positional only
  FacingRule direction = FacingRule::none;  // rotational only

  bool operator==(const InteractionConstraintSpec&) const = default;
};

struct VerbRule {
  std::optional<double> distance;
  FacingRule facing = FacingRule::face_target;
  bool operator==(const VerbRule&) const = default;
};

class VerbTable {
 public:
  VerbTable() = default;

  /// The shipped defaults (talk to, use, read, watch, get, open).
  static VerbTable builtin();
  static VerbTable from_json(const nlohmann::json& j);
  static VerbTable load(const std::filesystem::path& path);

  void set(const std::string& verb, VerbRule rule) { rules_[verb] = rule; }
  /// Exact verb first, then its first word ("get water" -> "get").
  std::optional<VerbRule> lookup(const std::string& verb) const;
  const std::map<std::string, VerbRule>& rules() const { return rules_; }

  nlohmann::json to_json() const;

 private:
  std::map<std::string, VerbRule> rules_;
};

constexpr double kFallbackDistance = 1.0;

/// Resolves a verb missing from the table; nullopt keeps the fallback.
using VerbResolver = std::function<std::optional<VerbRule>(const std::string& verb)>;

/// Asks the backend once per verb for {"D": meters, "facing": "face_target"|"mutual_face"}.
VerbResolver backend_verb_resolver(LlmBackend& backend);

/// At most three specs per description; none when the target is absent or a prop.
std::vector<InteractionConstraintSpec> compile_constraints(const Description& desc, const Scene& scene,
                                                           const VerbTable& table,
                                                           const VerbResolver& resolver = {});

nlohmann::json constraint_to_json(const InteractionConstraintSpec& c);

}  // namespace actsynth
