#include "actsynth/response_parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

namespace actsynth {

namespace {

using nlohmann::json;

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// End of the balanced object starting at `begin` (a '{'), or npos.
std::size_t match_brace(const std::string& text, std::size_t begin) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string::npos;
}

bool is_area_object(const json& j) {
  if (!j.is_object() || j.empty()) return false;
  return std::all_of(j.items().begin(), j.items().end(),
                     [](const auto& kv) { return kv.key().rfind("area_", 0) == 0; });
}

std::optional<int> parse_area_token(const std::string& token) {
  static const std::regex re(R"(area_(\d+))");
  std::smatch m;
  if (!std::regex_match(token, m, re)) return std::nullopt;
  return std::stoi(m[1].str());
}

struct Section {
  int index = 0;
  std::size_t begin = 0;  // first byte after the "keyframe N:" marker
  std::size_t end = 0;
};

Description parse_tuple(const std::smatch& m, std::size_t offset, const Scene& scene) {
  Description d;
  d.subject = m[1].str();
  const std::string pose = lower(m[2].str());
  const auto p = pose_from_string(pose);
  if (!p) throw ParseError("unknown pose '" + m[2].str() + "' for " + d.subject, offset);
  d.pose = *p;

  const std::string ref = trim(m[3].str());
  if (lower(ref) != "none") {
    const auto id = parse_object_token(ref);
    if (!id) throw ParseError("reference '" + ref + "' is not an object token", offset);
    if (!scene.find(*id)) throw ParseError("unknown object object_" + std::to_string(*id), offset);
    d.reference = *id;
  }

  d.interaction.verb = trim(m[4].str());
  if (d.interaction.verb.empty()) throw ParseError("empty interaction verb for " + d.subject, offset);
  const std::string target = trim(m[5].str());
  if (target.empty() || lower(target) == "none") {
    d.interaction.target = NoTarget{};
  } else if (target.rfind("object_", 0) == 0) {
    const auto id = parse_object_token(target);
    if (!id) throw ParseError("malformed object token '" + target + "'", offset);
    if (!scene.find(*id)) throw ParseError("unknown object object_" + std::to_string(*id), offset);
    d.interaction.target = ObjectTarget{*id};
  } else if (is_character_token(target)) {
    d.interaction.target = CharacterTarget{target};
  } else {
    d.interaction.target = PropTarget{target};
  }
  return d;
}

std::string thoughts_in(const std::string& text, std::size_t begin, std::size_t end) {
  const std::string chunk = text.substr(begin, end - begin);
  const auto at = chunk.find("Thoughts:");
  if (at == std::string::npos) return {};
  return trim(chunk.substr(at + 9));
}

}  // namespace

std::vector<std::pair<std::size_t, json>> extract_json_objects(const std::string& text) {
  std::vector<std::pair<std::size_t, json>> out;
  std::size_t i = 0;
  while ((i = text.find('{', i)) != std::string::npos) {
    const std::size_t close = match_brace(text, i);
    if (close == std::string::npos) {
      ++i;
      continue;
    }
    json doc = json::parse(text.begin() + static_cast<std::ptrdiff_t>(i),
                           text.begin() + static_cast<std::ptrdiff_t>(close) + 1, nullptr, false);
    if (doc.is_discarded()) {
      ++i;
      continue;
    }
    out.emplace_back(i, std::move(doc));
    i = close + 1;
  }
  return out;
}

AreaSceneGraph parse_graph_response(const std::string& text, const std::vector<Area>& areas) {
  // Prefer the Task I part of a combined answer.
  const auto task2 = text.find("Task II");
  const std::string head = task2 == std::string::npos ? text : text.substr(0, task2);
  std::optional<std::pair<std::size_t, json>> block;
  for (const std::string* scope : {&head, &text}) {
    for (auto& [off, doc] : extract_json_objects(*scope)) {
      if (is_area_object(doc)) block = {off, doc};
    }
    if (block) break;
  }
  if (!block) throw ParseError("no scene-graph JSON block found", text.size());
  const auto& [offset, doc] = *block;

  std::set<int> known;
  for (const auto& a : areas) known.insert(a.id);

  std::set<AreaEdge> edges;
  for (const auto& [key, node] : doc.items()) {
    const auto id = parse_area_token(key);
    if (!id || !known.count(*id)) throw ParseError("unknown area '" + key + "'", offset);
    if (!node.is_object()) throw ParseError("area '" + key + "' is not an object", offset);
    if (!node.contains("adjacent")) continue;
    const auto& adj = node.at("adjacent");
    if (!adj.is_array()) throw ParseError("'adjacent' of " + key + " is not a list", offset);
    for (const auto& other : adj) {
      if (!other.is_string()) throw ParseError("non-string adjacency entry in " + key, offset);
      const auto oid = parse_area_token(other.get<std::string>());
      if (!oid || !known.count(*oid)) throw ParseError("unknown area '" + other.get<std::string>() + "'", offset);
      if (*oid == *id) throw ParseError("self-adjacency on " + key, offset);
      edges.insert(make_edge(*id, *oid));
    }
  }

  AreaSceneGraph g;
  g.areas = areas;
  std::map<AreaEdge, EdgeProvenance> tagged;
  for (const auto& e : edges) tagged[e] = EdgeProvenance::mllm_reasoned;
  for (const auto& e : mst_fallback_edges(areas, edges)) tagged[e] = EdgeProvenance::mst_fallback;
  for (const auto& [e, p] : tagged) {
    g.edges.push_back(e);
    g.provenance.push_back(p);
  }
  return g;
}

namespace {

const std::regex& tuple_regex() {
  static const std::regex re(
      R"(\(\s*(character_[A-Za-z0-9]+)\s*,\s*([A-Za-z]+)\s*,\s*([^,()]+?)\s*,\s*\(\s*([^,()]+?)\s*,\s*([^()]*?)\s*\)\s*\))");
  return re;
}

}  // namespace

Description parse_description(const std::string& tuple, const Scene& scene) {
  std::smatch m;
  const std::string t = trim(tuple);
  if (!std::regex_match(t, m, tuple_regex())) throw ParseError("not a state tuple: " + tuple, 0);
  return parse_tuple(m, 0, scene);
}

ActivityParse parse_activity_response(const std::string& text, const Scene& scene,
                                      const ActivityParseOptions& options) {
  static const std::regex keyframe_re(R"(keyframe\s+(\d+)\s*:)", std::regex::icase);
  const std::regex& tuple_re = tuple_regex();
  static const std::regex carry_re(R"(\(\s*(character_[A-Za-z0-9]+)'s state does not change\s*\))",
                                   std::regex::icase);
  static const std::regex decl_re(R"((character_[A-Za-z0-9]+)\s*:\s*([^;.\n]+))");

  // Only look at the Task II part when both tasks share one reply.
  const auto task2 = text.find("Task II");
  const std::size_t base = task2 == std::string::npos ? 0 : task2;

  std::vector<Section> sections;
  for (auto it = std::sregex_iterator(text.begin() + static_cast<std::ptrdiff_t>(base), text.end(), keyframe_re);
       it != std::sregex_iterator(); ++it) {
    Section s;
    s.index = std::stoi((*it)[1].str());
    s.begin = base + static_cast<std::size_t>(it->position(0) + it->length(0));
    if (!sections.empty()) sections.back().end = base + static_cast<std::size_t>(it->position(0));
    sections.push_back(s);
  }
  if (sections.empty()) throw ParseError("no 'keyframe N:' section found", base);
  sections.back().end = text.size();

  ActivityParse result;
  Activity& activity = result.activity;

  const std::size_t prelude_end = sections.front().begin;
  const std::string prelude = text.substr(base, prelude_end - base);
  for (auto it = std::sregex_iterator(prelude.begin(), prelude.end(), decl_re); it != std::sregex_iterator(); ++it) {
    const std::string id = (*it)[1].str();
    if (activity.has_character(id)) continue;
    activity.characters.push_back({id, trim((*it)[2].str())});
  }
  if (activity.characters.empty()) activity.characters = options.characters_hint;
  if (activity.characters.empty()) throw ParseError("no character declarations and no character hint", base);
  for (const auto& c : options.fixed_characters) {
    if (!activity.has_character(c.id)) activity.characters.push_back(c);
  }

  std::optional<Keyframe> prev = options.previous;
  for (const auto& sec : sections) {
    Keyframe kf;
    kf.index = sec.index;
    const std::string body = text.substr(sec.begin, sec.end - sec.begin);

    struct Hit {
      std::size_t pos, len;
      std::optional<Description> desc;
      std::string carry;
    };
    std::vector<Hit> hits;
    for (auto it = std::sregex_iterator(body.begin(), body.end(), tuple_re); it != std::sregex_iterator(); ++it) {
      const std::size_t pos = static_cast<std::size_t>(it->position(0));
      hits.push_back({pos, static_cast<std::size_t>(it->length(0)), parse_tuple(*it, sec.begin + pos, scene), {}});
    }
    for (auto it = std::sregex_iterator(body.begin(), body.end(), carry_re); it != std::sregex_iterator(); ++it) {
      hits.push_back({static_cast<std::size_t>(it->position(0)), static_cast<std::size_t>(it->length(0)),
                      std::nullopt, (*it)[1].str()});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.pos < b.pos; });

    // Every "(character_" opener must belong to a recognized form.
    std::set<std::size_t> starts;
    for (const auto& h : hits) starts.insert(h.pos);
    for (std::size_t at = body.find("(character_"); at != std::string::npos; at = body.find("(character_", at + 1)) {
      if (!starts.count(at)) throw ParseError("unparseable state tuple", sec.begin + at);
    }

    for (std::size_t h = 0; h < hits.size(); ++h) {
      const std::size_t offset = sec.begin + hits[h].pos;
      Description d;
      if (hits[h].desc) {
        d = *hits[h].desc;
      } else {
        const Description* before = prev ? prev->find(hits[h].carry) : nullptr;
        if (!before) {
          throw ParseError(hits[h].carry + "'s state is carried over but no earlier keyframe describes it", offset);
        }
        d = *before;
      }
      const std::size_t note_end = h + 1 < hits.size() ? hits[h + 1].pos : body.size();
      const std::string note = thoughts_in(body, hits[h].pos + hits[h].len, note_end);
      if (!note.empty()) result.reasoning.push_back({kf.index, d.subject, note});
      kf.descriptions.push_back(std::move(d));
    }
    for (const auto& fixed : options.fixed_descriptions) {
      auto it = std::find_if(kf.descriptions.begin(), kf.descriptions.end(),
                             [&](const Description& d) { return d.subject == fixed.subject; });
      if (it == kf.descriptions.end()) {
        kf.descriptions.push_back(fixed);
      } else {
        *it = fixed;
      }
    }
    if (kf.descriptions.empty()) throw ParseError("keyframe " + std::to_string(kf.index) + " has no states", sec.begin);
    prev = kf;
    activity.keyframes.push_back(std::move(kf));
  }

  const auto violations = validate_activity(activity, scene, options.first_index);
  if (!violations.empty()) {
    std::string msg = "activity is invalid: " + describe(violations.front());
    if (violations.size() > 1) msg += " (+" + std::to_string(violations.size() - 1) + " more)";
    throw ParseError(msg, base);
  }
  return result;
}

}  // namespace actsynth
