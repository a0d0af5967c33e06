#include "actsynth/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include "actsynth/hash.hpp"

namespace actsynth {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return json::parse(in);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

class StageTimer {
 public:
  StageTimer(RunResult& r, std::string stage)
      : r_(r), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    r_.timings_ms[stage_] +=
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  RunResult& r_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

/// Runs `fn` as stage `name`; failures persist what exists and become StageError.
template <typename Fn>
void stage(RunResult& r, const RunConfig& cfg, const std::string& name, Fn&& fn) {
  try {
    StageTimer timer(r, name);
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    if (!cfg.output_dir.empty()) {
      try {
        persist(r, cfg.output_dir);
      } catch (const std::exception&) {
        // The original failure is the one worth reporting.
      }
    }
    throw StageError(name, e.what());
  }
  r.completed_stages.push_back(name);
}

std::vector<FewShotSample> fewshot_of(const RunConfig& cfg) {
  if (cfg.fewshot_path.empty()) return {};
  return load_fewshot(read_json(cfg.fewshot_path));
}

VerbTable verbs_of(const RunConfig& cfg) {
  return cfg.verbs_path.empty() ? VerbTable::builtin() : VerbTable::load(cfg.verbs_path);
}

std::uint64_t keyframe_seed(const RunSeeds& seeds, int index) {
  return derive_seed(seeds.placement, "keyframe:" + std::to_string(index));
}

std::string call(RunResult& r, LlmBackend& backend, const std::string& stage_name, const PromptBundle& prompt) {
  PromptRecord rec{stage_name, prompt, prompt_hash(prompt), {}};
  r.provenance.push_back(rec);
  r.provenance.back().response = backend.complete(prompt);
  return r.provenance.back().response;
}

void activity_stage(RunResult& r, const RunConfig& cfg, LlmBackend& backend,
                    const std::vector<Character>& known_characters) {
  const auto fewshot = fewshot_of(cfg);
  Activity act;
  act.characters = known_characters;
  for (const auto& c : r.fixed.characters) {
    if (!act.has_character(c.id)) act.characters.push_back(c);
  }
  int next = 0;
  int chunk = 0;
  while (static_cast<int>(act.keyframes.size()) < cfg.keyframe_count) {
    GenerationDirectives dir;
    dir.character_count = cfg.character_count;
    dir.characters = act.characters;
    dir.first_keyframe = next;
    dir.keyframe_budget = std::min(cfg.keyframes_per_query, cfg.keyframe_count - static_cast<int>(act.keyframes.size()));
    dir.history = act.keyframes;
    dir.fixed = r.fixed.descriptions;
    const auto prompt = build_activity_prompt(r.scene, r.graph, r.views.selected, dir, fewshot);
    const std::string reply = call(r, backend, "activity:" + std::to_string(chunk++), prompt);

    ActivityParseOptions opt;
    opt.characters_hint = act.characters;
    if (!act.keyframes.empty()) opt.previous = act.keyframes.back();
    opt.first_index = next;
    opt.fixed_characters = r.fixed.characters;
    opt.fixed_descriptions = r.fixed.descriptions;
    auto parsed = parse_activity_response(reply, r.scene, opt);

    if (act.keyframes.empty() && known_characters.empty()) {
      act.characters = parsed.activity.characters;
    } else {
      for (const auto& c : parsed.activity.characters) {
        if (!act.has_character(c.id)) throw ActivityError("reply introduces undeclared character " + c.id);
      }
    }
    for (auto& kf : parsed.activity.keyframes) {
      if (static_cast<int>(act.keyframes.size()) >= cfg.keyframe_count) break;
      act.keyframes.push_back(std::move(kf));
    }
    for (auto& n : parsed.reasoning) r.reasoning.push_back(std::move(n));
    next = act.keyframes.back().index + 1;
  }

  const auto violations = validate_activity(act, r.scene, 0);
  if (!violations.empty()) throw ActivityError("activity is invalid: " + describe(violations.front()));
  r.activity = std::move(act);
}

PlacementOptions placement_options(const RunConfig& cfg, LlmBackend* backend) {
  PlacementOptions opt;
  opt.verbs = verbs_of(cfg);
  if (cfg.resolve_unknown_verbs && backend) opt.resolver = backend_verb_resolver(*backend);
  return opt;
}

void placement_stage(RunResult& r, const RunConfig& cfg, LlmBackend* backend) {
  const auto opt = placement_options(cfg, backend);
  r.placements.clear();
  for (const auto& kf : r.activity.keyframes) {
    r.placements.push_back(
        optimize_keyframe(kf, r.scene, cfg.schedule, r.fixed.poses, keyframe_seed(r.seeds, kf.index), opt));
  }
}

void transition_stage(RunResult& r, const RunConfig& cfg) {
  const auto grid = build_grid(r.scene, cfg.grid_cell);
  r.trajectories.clear();
  for (std::size_t k = 1; k < r.activity.keyframes.size(); ++k) {
    const auto& a = r.activity.keyframes[k - 1];
    const auto& b = r.activity.keyframes[k];
    auto t = plan_transitions(a.index, b.index, r.placements[k - 1].poses, r.placements[k].poses,
                              diff_keyframes(a, b), grid);
    r.trajectories.insert(r.trajectories.end(), t.begin(), t.end());
  }
}

std::unique_ptr<LlmBackend> backend_from(const RunConfig& cfg) {
  BackendConfig bc = cfg.backend;
  if (bc.api_key.empty()) {
    if (const char* key = std::getenv(kApiKeyEnv)) bc.api_key = key;
  }
  if (const char* ep = std::getenv(kEndpointEnv); ep && bc.kind == BackendKind::http) bc.endpoint = ep;
  return make_backend(bc);
}

void finish(RunResult& r, const RunConfig& cfg, LlmBackend& backend, const std::vector<Character>& known) {
  stage(r, cfg, "activity", [&] { activity_stage(r, cfg, backend, known); });
  stage(r, cfg, "placement", [&] { placement_stage(r, cfg, &backend); });
  stage(r, cfg, "transitions", [&] { transition_stage(r, cfg); });
  if (!cfg.output_dir.empty()) persist(r, cfg.output_dir);
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    c.scene_path = resolve(base_dir, j.value("scene", std::string{}));
    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      const auto kind = b.value("kind", std::string("mock"));
      if (kind == "mock") {
        c.backend.kind = BackendKind::mock;
      } else if (kind == "http") {
        c.backend.kind = BackendKind::http;
      } else {
        throw std::invalid_argument("backend.kind must be 'mock' or 'http'");
      }
      c.backend.script_path = resolve(base_dir, b.value("script", std::string{}));
      c.backend.endpoint = b.value("endpoint", std::string{});
      c.backend.model_name = b.value("model", c.backend.model_name);
      c.backend.temperature = b.value("temperature", c.backend.temperature);
      c.backend.max_attempts = b.value("max_attempts", c.backend.max_attempts);
      c.backend.initial_backoff = std::chrono::milliseconds(b.value("initial_backoff_ms", 200));
      c.backend.timeout = std::chrono::seconds(b.value("timeout_s", 120));
    }
    if (j.contains("seeds")) {
      c.seeds.views = j.at("seeds").value("views", c.seeds.views);
      c.seeds.placement = j.at("seeds").value("placement", c.seeds.placement);
    }
    c.d_max = j.value("d_max", c.d_max);
    c.view_candidates = j.value("view_candidates", c.view_candidates);
    if (j.contains("views")) {
      const auto& v = j.at("views");
      c.views.eye_height = v.value("eye_height", c.views.eye_height);
      c.views.pitch = v.value("pitch", c.views.pitch);
      c.views.fov_h = v.value("fov_h", c.views.fov_h);
      c.views.image_aspect = v.value("image_aspect", c.views.image_aspect);
      c.views.clearance = v.value("clearance", c.views.clearance);
    }
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      c.views.filter.min_area_fraction = f.value("min_area_fraction", c.views.filter.min_area_fraction);
      c.views.filter.max_distance = f.value("max_distance", c.views.filter.max_distance);
      c.views.filter.max_out_of_view = f.value("max_out_of_view", c.views.filter.max_out_of_view);
      c.views.filter.max_occluded = f.value("max_occluded", c.views.filter.max_occluded);
    }
    if (j.contains("schedule")) c.schedule = AnnealSchedule::from_json(j.at("schedule"));
    c.keyframes_per_query = j.value("keyframes_per_query", c.keyframes_per_query);
    c.keyframe_count = j.value("keyframe_count", c.keyframe_count);
    if (j.contains("character_count") && !j.at("character_count").is_null()) {
      c.character_count = j.at("character_count").get<int>();
    }
    c.fewshot_path = resolve(base_dir, j.value("fewshot", std::string{}));
    c.verbs_path = resolve(base_dir, j.value("verbs", std::string{}));
    c.resolve_unknown_verbs = j.value("resolve_unknown_verbs", false);
    c.grid_cell = j.value("grid_cell", c.grid_cell);
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string{}));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed run config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  return from_json(read_json(path), path.parent_path());
}

json RunConfig::to_json() const {
  return {{"scene", scene_path.string()},
          {"backend",
           {{"kind", backend.kind == BackendKind::mock ? "mock" : "http"},
            {"script", backend.script_path.string()},
            {"endpoint", backend.endpoint},
            {"model", backend.model_name},
            {"temperature", backend.temperature}}},
          {"seeds", {{"views", seeds.views}, {"placement", seeds.placement}}},
          {"d_max", d_max},
          {"view_candidates", view_candidates},
          {"views",
           {{"eye_height", views.eye_height},
            {"pitch", views.pitch},
            {"fov_h", views.fov_h},
            {"image_aspect", views.image_aspect},
            {"clearance", views.clearance}}},
          {"filter",
           {{"min_area_fraction", views.filter.min_area_fraction},
            {"max_distance", views.filter.max_distance},
            {"max_out_of_view", views.filter.max_out_of_view},
            {"max_occluded", views.filter.max_occluded}}},
          {"schedule", schedule.to_json()},
          {"keyframes_per_query", keyframes_per_query},
          {"keyframe_count", keyframe_count},
          {"character_count", character_count ? json(*character_count) : json(nullptr)},
          {"fewshot", fewshot_path.string()},
          {"verbs", verbs_path.string()},
          {"resolve_unknown_verbs", resolve_unknown_verbs},
          {"grid_cell", grid_cell}};
}

void RunConfig::validate() const {
  if (scene_path.empty() || !fs::exists(scene_path)) {
    throw std::invalid_argument("scene file not found: " + scene_path.string());
  }
  if (backend.kind == BackendKind::mock && !fs::exists(backend.script_path)) {
    throw std::invalid_argument("mock script not found: " + backend.script_path.string());
  }
  if (backend.kind == BackendKind::http && backend.endpoint.empty() && !std::getenv(kEndpointEnv)) {
    throw std::invalid_argument("http backend needs an endpoint");
  }
  if (!fewshot_path.empty() && !fs::exists(fewshot_path)) {
    throw std::invalid_argument("fewshot file not found: " + fewshot_path.string());
  }
  if (!verbs_path.empty() && !fs::exists(verbs_path)) {
    throw std::invalid_argument("verb table not found: " + verbs_path.string());
  }
  if (!(d_max > 0.0)) throw std::invalid_argument("d_max must be positive");
  if (view_candidates < 1) throw std::invalid_argument("view_candidates must be at least 1");
  if (keyframes_per_query < 1) throw std::invalid_argument("keyframes_per_query must be at least 1");
  if (keyframe_count < 1) throw std::invalid_argument("keyframe_count must be at least 1");
  if (!(grid_cell > 0.0)) throw std::invalid_argument("grid_cell must be positive");
  if (!(views.fov_h > 0.0 && views.fov_h < kPi)) throw std::invalid_argument("fov_h must lie in (0, pi)");
  schedule.validate();
}

const KeyframePlacement* RunResult::placement(int keyframe) const {
  for (const auto& p : placements) {
    if (p.keyframe == keyframe) return &p;
  }
  return nullptr;
}

json RunResult::to_json() const {
  json prov = json::array();
  for (const auto& p : provenance) {
    prov.push_back({{"stage", p.stage}, {"prompt_hash", p.hash}, {"prompt", prompt_to_json(p.prompt)}, {"response", p.response}});
  }
  json notes = json::array();
  for (const auto& n : reasoning) notes.push_back({{"keyframe", n.keyframe}, {"character", n.character}, {"text", n.text}});
  json places = json::array();
  for (const auto& p : placements) places.push_back(placement_to_json(p));
  json traj = json::array();
  for (const auto& t : trajectories) traj.push_back(trajectory_to_json(t));
  json areas_j = json::array();
  for (const auto& a : areas) {
    areas_j.push_back({{"id", a.id}, {"name", a.name()}, {"object_ids", a.object_ids}, {"centroid", {a.centroid.x, a.centroid.y}}});
  }
  json fixed_j = json::array();
  for (const auto& d : fixed.descriptions) {
    json f = {{"description", format_description(d, &scene)}};
    if (auto it = fixed.poses.find(d.subject); it != fixed.poses.end()) f["pose"] = pose_to_json(it->second);
    fixed_j.push_back(f);
  }
  return {{"areas", areas_j},
          {"views", view_plan_to_json(views)},
          {"graph", graph_to_json(scene, graph)},
          {"activity", activity_to_json(activity, &scene)},
          {"reasoning", notes},
          {"placements", places},
          {"trajectories", traj},
          {"fixed", fixed_j},
          {"seeds", {{"views", seeds.views}, {"placement", seeds.placement}}},
          {"stages", completed_stages},
          {"provenance", prov}};
}

RunResult run_pipeline(const RunConfig& cfg, LlmBackend* backend, const FixedState& fixed) {
  RunResult r;
  r.seeds = cfg.seeds;
  r.fixed = fixed;
  std::unique_ptr<LlmBackend> owned;
  stage(r, cfg, "config", [&] {
    cfg.validate();
    if (!cfg.output_dir.empty()) fs::create_directories(cfg.output_dir);
    if (!backend) {
      owned = backend_from(cfg);
      backend = owned.get();
    }
  });
  stage(r, cfg, "load", [&] { r.scene = load_scene(cfg.scene_path); });
  stage(r, cfg, "cluster", [&] { r.areas = cluster_areas(r.scene, cfg.d_max); });
  stage(r, cfg, "views", [&] { r.views = plan_views(r.scene, cfg.view_candidates, cfg.seeds.views, cfg.views); });
  stage(r, cfg, "graph", [&] {
    const auto prompt = build_graph_prompt(r.scene, r.areas, r.views.selected, fewshot_of(cfg));
    r.graph = parse_graph_response(call(r, *backend, "graph", prompt), r.areas);
  });
  finish(r, cfg, *backend, {});
  return r;
}

RunResult regenerate_activity(const RunResult& base, const RunConfig& cfg, LlmBackend& backend,
                              const FixedState& fixed) {
  RunResult r;
  r.scene = base.scene;
  r.areas = base.areas;
  r.views = base.views;
  r.graph = base.graph;
  r.seeds = base.seeds;
  r.provenance = base.provenance;
  r.completed_stages = {"config", "load", "cluster", "views", "graph"};
  r.fixed = fixed;
  std::vector<Character> known;
  for (const auto& c : base.activity.characters) {
    const bool is_fixed = std::any_of(fixed.characters.begin(), fixed.characters.end(),
                                      [&](const Character& f) { return f.id == c.id; });
    if (!is_fixed) known.push_back(c);
  }
  finish(r, cfg, backend, known);
  return r;
}

std::vector<KeyframePlacement> replay_placements(const RunResult& result, const RunConfig& cfg) {
  const auto opt = placement_options(cfg, nullptr);
  std::vector<KeyframePlacement> out;
  for (const auto& kf : result.activity.keyframes) {
    out.push_back(optimize_keyframe(kf, result.scene, cfg.schedule, result.fixed.poses,
                                    keyframe_seed(result.seeds, kf.index), opt));
  }
  return out;
}

void persist(const RunResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  const json doc = r.to_json();
  write_json(dir / "result.json", doc);
  write_json(dir / "scene.json", scene_to_json(r.scene));
  for (const char* key : {"areas", "views", "graph", "activity", "placements", "trajectories", "provenance"}) {
    write_json(dir / (std::string(key) + ".json"), doc.at(key));
  }
  write_json(dir / "timings.json", r.timings_ms);
}

}  // namespace actsynth
