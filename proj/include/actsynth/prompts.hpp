#pragma once

#include <optional>
#include <string>
#include <vector>

#include "actsynth/activity.hpp"
#include "actsynth/areas.hpp"
#include "actsynth/views.hpp"

namespace actsynth {

struct PromptPart {
  enum class Kind { text, image };
  Kind kind = Kind::text;
  std::string content;  // text body or image reference

  static PromptPart text(std::string s) { return {Kind::text, std::move(s)}; }
  static PromptPart image(std::string ref) { return {Kind::image, std::move(ref)}; }
  bool operator==(const PromptPart&) const = default;
};

struct FewShotSample {
  std::vector<PromptPart> user_parts;
  std::string assistant_text;
  bool operator==(const FewShotSample&) const = default;
};

struct PromptBundle {
  std::string system_text;
  std::vector<PromptPart> user_parts;
  std::vector<FewShotSample> fewshot;
  bool operator==(const PromptBundle&) const = default;
};

/// What the activity request asks for beyond the scene itself.
struct GenerationDirectives {
  std::optional<int> character_count;
  /// Characters already decided (roles given by the user or by an earlier chunk).
  std::vector<Character> characters;
  int first_keyframe = 0;
  int keyframe_budget = 2;
  /// Keyframes generated by earlier queries, replayed as context.
  std::vector<Keyframe> history;
  /// States held fixed by the user in every keyframe.
  std::vector<Description> fixed;
};

/// Image reference used for a view in prompts ("view_<candidate index>.png").
std::string view_image_ref(const ViewObservation& v);

PromptBundle build_graph_prompt(const Scene& scene, const std::vector<Area>& areas,
                                const std::vector<ViewObservation>& views,
                                const std::vector<FewShotSample>& fewshot = {});

PromptBundle build_activity_prompt(const Scene& scene, const AreaSceneGraph& graph,
                                   const std::vector<ViewObservation>& views, const GenerationDirectives& directives,
                                   const std::vector<FewShotSample>& fewshot = {});

/// Canonical JSON form; the input of prompt_hash.
nlohmann::json prompt_to_json(const PromptBundle& p);
/// Stable 16-hex-digit FNV-1a hash of the canonical JSON.
std::string prompt_hash(const PromptBundle& p);

/// The "FIXED:" clause line for one held description.
std::string fixed_clause(const Description& d, const Scene& scene);

std::vector<FewShotSample> load_fewshot(const nlohmann::json& j);

}  // namespace actsynth
