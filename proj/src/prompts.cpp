#include "actsynth/prompts.hpp"

#include <algorithm>
#include <sstream>

#include "actsynth/hash.hpp"

namespace actsynth {

namespace {

constexpr const char* kPreamble =
    "You are a visual assistant interpreting 3D scenes containing multiple objects. Inputs provided to you: "
    "1. Scene areas (JSON), each including an \"objects\" list; 2. Multi-view scene images with unique object IDs "
    "labeled at object centers.";

constexpr const char* kGraphTask =
    "Task I. Build a Scene Graph:\n"
    "Step 1. List objects grouped by their areas clearly from all provided images.\n"
    "Step 2. Identify visual adjacencies between scene views based on objects appearing in multiple images from "
    "Step 1.\n"
    "Step 3. Construct a Scene Graph (JSON), using areas as nodes, with an additional \"adjacent\" attribute, and "
    "connect nodes (areas) explicitly if their adjacencies are confirmed by shared objects. Clearly state reasons "
    "for each connection using evidence from previous steps.";

constexpr const char* kGraphTaskNoViews =
    "Task I. Build a Scene Graph:\n"
    "Step 1. List objects grouped by their areas from the area descriptions.\n"
    "Step 2. Construct a Scene Graph (JSON), using areas as nodes, with an additional \"adjacent\" attribute, and "
    "connect nodes (areas) that are spatially adjacent. Clearly state reasons for each connection.";

constexpr const char* kGraphFormat =
    "End your answer with the complete scene graph as one JSON object whose keys are the area names.";

constexpr const char* kActivityTask =
    "Task II. Generate a Virtual Activity:\n"
    "Step 1. Decide the number of characters appropriate for the scene scale, and assign unique IDs and relevant "
    "roles (family/social/professional) based on scene context.\n"
    "Step 2. Activity creation (sequence of keyframes): Each keyframe is a list of all characters' states at that "
    "time. A character's state is defined as: (ID, pose, reference, interaction), with \"ID\" being the assigned "
    "character ID, \"pose\" being \"standing\", \"sitting\", or \"lying\", \"reference\" being the object for "
    "\"standing nearby\" or \"sitting on\" or \"lying on\", \"interaction\" being a tuple (type, interactee) where "
    "\"type\" is the action performed (e.g., \"talk to\", \"use\") and \"interactee\" is the character/object "
    "involved in interaction.\n"
    "Ensure continuous transitions between keyframes: Every change in a character's state triggers a new keyframe. "
    "When changing states, please clearly justify your reasoning. For movements to a new \"reference\" object, "
    "explicitly describe intermediate steps based on the scene graph and shared object adjacencies observed in the "
    "images.";

constexpr const char* kActivityFormat =
    "Provide explicit, structured answers following these guidelines. Declare characters as "
    "\"character_<n>: <role>\" separated by semicolons. Start every keyframe with \"keyframe <index>:\" and write "
    "one state tuple per character, e.g. (character_0, sitting, object_11-sofa, (read, newspaper)), optionally "
    "followed by \"Thoughts: ...\". Use \"none\" when there is no reference or interactee. A character whose state "
    "is unchanged may be written as (character_0's state does not change).";

std::string caption_for(const Scene& scene, std::size_t ordinal, const ViewObservation& v) {
  std::ostringstream os;
  os << "View " << ordinal << ":";
  for (std::size_t i = 0; i < v.surviving_marks.size(); ++i) {
    const SceneObject* obj = scene.find(v.surviving_marks[i]);
    os << (i ? ", " : " ") << (obj ? obj->mark_name() : "object_" + std::to_string(v.surviving_marks[i]));
  }
  return os.str();
}

std::vector<ViewObservation> in_candidate_order(std::vector<ViewObservation> views) {
  std::stable_sort(views.begin(), views.end(), [](const ViewObservation& a, const ViewObservation& b) {
    return a.candidate_index < b.candidate_index;
  });
  return views;
}

void append_views(std::vector<PromptPart>& parts, const Scene& scene, const std::vector<ViewObservation>& views) {
  const auto ordered = in_candidate_order(views);
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    parts.push_back(PromptPart::image(view_image_ref(ordered[i])));
    parts.push_back(PromptPart::text(caption_for(scene, i, ordered[i])));
  }
}

nlohmann::json parts_to_json(const std::vector<PromptPart>& parts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : parts) {
    arr.push_back({{"type", p.kind == PromptPart::Kind::text ? "text" : "image"}, {"content", p.content}});
  }
  return arr;
}

}  // namespace

std::string view_image_ref(const ViewObservation& v) {
  return "view_" + std::to_string(v.candidate_index) + ".png";
}

std::string fixed_clause(const Description& d, const Scene& scene) {
  return "FIXED: " + format_description(d, &scene);
}

PromptBundle build_graph_prompt(const Scene& scene, const std::vector<Area>& areas,
                                const std::vector<ViewObservation>& views, const std::vector<FewShotSample>& fewshot) {
  PromptBundle p;
  std::ostringstream sys;
  sys << kPreamble << "\n\nYou must explicitly perform the task below, following the exact steps:\n\n"
      << (views.empty() ? kGraphTaskNoViews : kGraphTask) << "\n\n"
      << kGraphFormat;
  p.system_text = sys.str();
  p.user_parts.push_back(PromptPart::text(areas_prompt_json(scene, areas)));
  append_views(p.user_parts, scene, views);
  p.fewshot = fewshot;
  return p;
}

PromptBundle build_activity_prompt(const Scene& scene, const AreaSceneGraph& graph,
                                   const std::vector<ViewObservation>& views, const GenerationDirectives& directives,
                                   const std::vector<FewShotSample>& fewshot) {
  PromptBundle p;
  std::ostringstream sys;
  sys << kPreamble << "\n\nYou must explicitly perform the task below, following the exact steps:\n\n"
      << kActivityTask << "\n\n"
      << kActivityFormat;
  p.system_text = sys.str();

  p.user_parts.push_back(PromptPart::text(graph_prompt_json(scene, graph)));
  append_views(p.user_parts, scene, views);

  std::ostringstream req;
  if (!directives.characters.empty()) {
    req << "Characters (keep these IDs and roles): ";
    for (std::size_t i = 0; i < directives.characters.size(); ++i) {
      req << (i ? "; " : "") << directives.characters[i].id << ": " << directives.characters[i].role;
    }
    req << ".\n";
    if (directives.character_count && *directives.character_count > static_cast<int>(directives.characters.size())) {
      req << "Add characters so that there are " << *directives.character_count << " in total.\n";
    }
  } else if (directives.character_count) {
    req << "Create exactly " << *directives.character_count << " characters.\n";
  }
  if (!directives.history.empty()) {
    req << "Keyframes generated so far:\n";
    for (const auto& kf : directives.history) {
      req << "keyframe " << kf.index << ":\n";
      for (const auto& d : kf.descriptions) req << format_description(d, &scene) << "\n";
    }
  }
  const int last = directives.first_keyframe + directives.keyframe_budget - 1;
  if (directives.keyframe_budget == 1) {
    req << "Generate exactly one keyframe: keyframe " << directives.first_keyframe << ".\n";
  } else {
    req << "Generate " << directives.keyframe_budget << " keyframes: keyframe " << directives.first_keyframe
        << " to keyframe " << last << ".\n";
  }
  if (!directives.fixed.empty()) {
    req << "The following states are fixed by the user. Keep each of them verbatim in every keyframe and make the "
           "other characters respond to them:\n";
    for (const auto& d : directives.fixed) req << fixed_clause(d, scene) << "\n";
  }
  p.user_parts.push_back(PromptPart::text(req.str()));
  p.fewshot = fewshot;
  return p;
}

nlohmann::json prompt_to_json(const PromptBundle& p) {
  nlohmann::json shots = nlohmann::json::array();
  for (const auto& s : p.fewshot) {
    shots.push_back({{"user", parts_to_json(s.user_parts)}, {"assistant", s.assistant_text}});
  }
  return {{"system", p.system_text}, {"user", parts_to_json(p.user_parts)}, {"fewshot", shots}};
}

std::string prompt_hash(const PromptBundle& p) { return to_hex(fnv1a64(prompt_to_json(p).dump())); }

std::vector<FewShotSample> load_fewshot(const nlohmann::json& j) {
  std::vector<FewShotSample> out;
  for (const auto& s : j) {
    FewShotSample sample;
    for (const auto& part : s.at("user")) {
      const auto type = part.at("type").get<std::string>();
      const auto content = part.at("content").get<std::string>();
      sample.user_parts.push_back(type == "image" ? PromptPart::image(content) : PromptPart::text(content));
    }
    sample.assistant_text = s.at("assistant").get<std::string>();
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace actsynth
