#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsynth/activity.hpp"
#include "actsynth/areas.hpp"

namespace actsynth {

/// Malformed model output. `offset` is the byte position in the reply where the problem was found.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Reads the last scene-graph JSON block of the Task I answer. Edges the model
/// names are tagged mllm_reasoned; remaining components are joined with
/// mst_fallback edges.
AreaSceneGraph parse_graph_response(const std::string& text, const std::vector<Area>& areas);

struct ActivityParseOptions {
  /// Characters to use when the reply declares none (continuation chunks).
  std::vector<Character> characters_hint;
  /// Keyframe preceding this reply, for "state does not change" carry-over.
  std::optional<Keyframe> previous;
  /// Required index of the first keyframe; any of 0/1 when unset.
  std::optional<int> first_index;
  /// States held constant by the user; inserted into (or overriding) every keyframe.
  std::vector<Character> fixed_characters;
  std::vector<Description> fixed_descriptions;
};

struct ReasoningNote {
  int keyframe = 0;
  std::string character;
  std::string text;
};

struct ActivityParse {
  Activity activity;
  /// "Thoughts:" traces, kept for provenance only.
  std::vector<ReasoningNote> reasoning;
};

/// Parses character declarations and keyframe tuples. The result always passes
/// activity validation; any breach raises ParseError.
ActivityParse parse_activity_response(const std::string& text, const Scene& scene,
                                      const ActivityParseOptions& options = {});

/// Overload matching the plain (text, scene, characters) call.
inline ActivityParse parse_activity_response(const std::string& text, const Scene& scene,
                                             const std::vector<Character>& characters_hint) {
  ActivityParseOptions o;
  o.characters_hint = characters_hint;
  return parse_activity_response(text, scene, o);
}

/// One state tuple, e.g. "(character_u, sitting, object_11-sofa, (talk to, character_0))".
Description parse_description(const std::string& tuple, const Scene& scene);

/// Every top-level JSON object embedded in `text`, with its offset.
std::vector<std::pair<std::size_t, nlohmann::json>> extract_json_objects(const std::string& text);

}  // namespace actsynth
