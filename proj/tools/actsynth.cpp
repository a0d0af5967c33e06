// Command-line front end: run, views, place, serve, export.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "actsynth/pipeline.hpp"
#include "actsynth/service.hpp"
#include "actsynth/topdown.hpp"

using namespace actsynth;
namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config;
  std::string scene;
  std::string out;
  std::string backend;
  std::string script;
  std::string endpoint;
  std::string model;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> view_seed;
  std::optional<std::uint64_t> placement_seed;
  std::optional<std::size_t> candidates;
  std::optional<int> kpq;
  std::optional<int> keyframes;
  std::optional<double> d_max;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "Run configuration JSON")->check(CLI::ExistingFile);
  app->add_option("--scene", o.scene, "Scene JSON")->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "Output path");
  app->add_option("--backend", o.backend, "mock or http")->check(CLI::IsMember({"mock", "http"}));
  app->add_option("--script", o.script, "Mock backend script");
  app->add_option("--endpoint", o.endpoint, "Chat-completions URL (or ACTSYNTH_ENDPOINT)");
  app->add_option("--model", o.model, "Model name sent to the http backend");
  app->add_option("--seed", o.seed, "Seed for both view sampling and placement");
  app->add_option("--view-seed", o.view_seed);
  app->add_option("--placement-seed", o.placement_seed);
  app->add_option("--candidates", o.candidates, "Candidate view count");
  app->add_option("--keyframes-per-query", o.kpq);
  app->add_option("--keyframes", o.keyframes, "Total keyframe count");
  app->add_option("--d-max", o.d_max, "Area clustering distance (m)");
}

RunConfig make_config(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (!o.scene.empty()) cfg.scene_path = o.scene;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.backend == "mock") cfg.backend.kind = BackendKind::mock;
  if (o.backend == "http") cfg.backend.kind = BackendKind::http;
  if (!o.script.empty()) cfg.backend.script_path = o.script;
  if (!o.endpoint.empty()) cfg.backend.endpoint = o.endpoint;
  if (!o.model.empty()) cfg.backend.model_name = o.model;
  if (o.seed) cfg.seeds.views = cfg.seeds.placement = *o.seed;
  if (o.view_seed) cfg.seeds.views = *o.view_seed;
  if (o.placement_seed) cfg.seeds.placement = *o.placement_seed;
  if (o.candidates) cfg.view_candidates = *o.candidates;
  if (o.kpq) cfg.keyframes_per_query = *o.kpq;
  if (o.keyframes) cfg.keyframe_count = *o.keyframes;
  if (o.d_max) cfg.d_max = *o.d_max;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_run(const Overrides& o) {
  const RunConfig cfg = make_config(o);
  const RunResult r = run_pipeline(cfg);
  std::cout << "areas: " << r.areas.size() << ", views: " << r.views.selected.size()
            << ", characters: " << r.activity.characters.size() << ", keyframes: " << r.activity.keyframes.size()
            << ", trajectories: " << r.trajectories.size() << "\n";
  for (const auto& p : r.placements) {
    for (const auto& g : p.groups) {
      std::cout << "keyframe " << p.keyframe << " group " << g.id << " cost " << g.cost << "\n";
    }
  }
  if (!cfg.output_dir.empty()) std::cout << "artifacts written to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_views(const Overrides& o, const std::string& svg) {
  const RunConfig cfg = make_config(o);
  const Scene scene = load_scene(cfg.scene_path);
  const ViewPlan plan = plan_views(scene, cfg.view_candidates, cfg.seeds.views, cfg.views);
  write_text(o.out, view_plan_to_json(plan).dump(2) + "\n");
  if (!svg.empty()) write_text(svg, export_views_svg(scene, plan));
  return 0;
}

int cmd_place(const Overrides& o, const std::string& activity_path, const std::string& schedule_path) {
  RunConfig cfg = make_config(o);
  if (!schedule_path.empty()) {
    std::ifstream in(schedule_path);
    if (!in) throw std::runtime_error("cannot open " + schedule_path);
    cfg.schedule = AnnealSchedule::from_json(nlohmann::json::parse(in));
  }
  std::ifstream in(activity_path);
  if (!in) throw std::runtime_error("cannot open " + activity_path);
  RunResult r;
  r.scene = load_scene(cfg.scene_path);
  r.activity = activity_from_json(nlohmann::json::parse(in));
  r.seeds = cfg.seeds;
  const auto violations = validate_activity(r.activity, r.scene);
  if (!violations.empty()) throw std::runtime_error("activity is invalid: " + describe(violations.front()));
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : replay_placements(r, cfg)) out.push_back(placement_to_json(p));
  write_text(cfg.output_dir.empty() ? o.out : cfg.output_dir.string(), out.dump(2) + "\n");
  return 0;
}

int cmd_export(const Overrides& o, int keyframe) {
  RunConfig cfg = make_config(o);
  const std::string out = o.out;
  cfg.output_dir.clear();
  const RunResult r = run_pipeline(cfg);
  write_text(out, export_topdown(r, keyframe));
  return 0;
}

int cmd_serve(const Overrides& o, const std::string& host, int port) {
  const RunConfig cfg = make_config(o);
  BackendConfig bc = cfg.backend;
  if (const char* key = std::getenv(kApiKeyEnv); key && bc.api_key.empty()) bc.api_key = key;
  if (const char* ep = std::getenv(kEndpointEnv); ep && bc.kind == BackendKind::http) bc.endpoint = ep;
  Service service(cfg, make_backend(bc));
  std::cout << "serving on http://" << host << ":" << port << std::endl;
  service.serve(host, port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-character activity synthesis in declarative indoor scenes"};
  app.require_subcommand(1);

  Overrides run_o, views_o, place_o, serve_o, export_o;
  auto* run = app.add_subcommand("run", "Full pipeline; writes artifacts to --out");
  add_common(run, run_o);

  auto* views = app.add_subcommand("views", "Plan views and write the selection as JSON");
  add_common(views, views_o);
  std::string views_svg;
  views->add_option("--svg", views_svg, "Also write a top-down SVG of the selected views");

  auto* place = app.add_subcommand("place", "Optimize poses for an activity JSON");
  add_common(place, place_o);
  std::string activity_path, schedule_path;
  place->add_option("--activity", activity_path, "Activity JSON")->required()->check(CLI::ExistingFile);
  place->add_option("--schedule", schedule_path, "Anneal schedule JSON")->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "HTTP service for the interactive client");
  add_common(serve, serve_o);
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  auto* exp = app.add_subcommand("export", "Run the pipeline and write one keyframe as SVG");
  add_common(exp, export_o);
  int keyframe = 0;
  exp->add_option("--keyframe", keyframe, "Keyframe index")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_o);
    if (*views) return cmd_views(views_o, views_svg);
    if (*place) return cmd_place(place_o, activity_path, schedule_path);
    if (*serve) return cmd_serve(serve_o, host, port);
    if (*exp) return cmd_export(export_o, keyframe);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
