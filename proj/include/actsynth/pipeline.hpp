#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsynth/areas.hpp"
#include "actsynth/backend.hpp"
#include "actsynth/path.hpp"
#include "actsynth/placement.hpp"
#include "actsynth/prompts.hpp"
#include "actsynth/response_parser.hpp"
#include "actsynth/views.hpp"

namespace actsynth {

struct RunSeeds {
  std::uint64_t views = 1;
  std::uint64_t placement = 1;
};

struct RunConfig {
  std::filesystem::path scene_path;
  BackendConfig backend;
  RunSeeds seeds;
  double d_max = kDefaultClusterDistance;
  std::size_t view_candidates = 200;
  ViewSamplingConfig views;
  AnnealSchedule schedule;
  int keyframes_per_query = 2;
  int keyframe_count = 3;
  std::optional<int> character_count;
  std::filesystem::path fewshot_path;  // optional
  std::filesystem::path verbs_path;    // optional; built-in table otherwise
  bool resolve_unknown_verbs = false;
  double grid_cell = kDefaultCellSize;
  std::filesystem::path output_dir;  // empty: nothing persisted

  /// Relative paths in `j` resolve against `base_dir`.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// Throws std::invalid_argument on out-of-range values or missing files.
  void validate() const;
};

/// User-held states for interactive regeneration.
struct FixedState {
  std::vector<Character> characters;
  std::vector<Description> descriptions;
  std::map<std::string, CharacterPose> poses;

  bool empty() const { return descriptions.empty(); }
};

struct PromptRecord {
  std::string stage;
  PromptBundle prompt;
  std::string hash;
  std::string response;
};

struct RunResult {
  Scene scene;
  std::vector<Area> areas;
  ViewPlan views;
  AreaSceneGraph graph;
  Activity activity;
  std::vector<ReasoningNote> reasoning;
  std::vector<KeyframePlacement> placements;
  std::vector<Trajectory> trajectories;
  std::vector<PromptRecord> provenance;
  RunSeeds seeds;
  FixedState fixed;
  std::vector<std::string> completed_stages;
  /// Wall-clock milliseconds per stage; excluded from to_json().
  std::map<std::string, double> timings_ms;

  const KeyframePlacement* placement(int keyframe) const;
  /// Deterministic document (no timings).
  nlohmann::json to_json() const;
};

/// A pipeline failure tagged with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& detail)
      : std::runtime_error("stage '" + stage + "' failed: " + detail), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// load -> cluster -> views -> graph -> activity -> placement -> transitions.
/// Uses `backend` when given, otherwise one built from cfg.backend.
RunResult run_pipeline(const RunConfig& cfg, LlmBackend* backend = nullptr, const FixedState& fixed = {});

/// Re-enters at the activity stage, keeping scene, views and graph of `base`.
RunResult regenerate_activity(const RunResult& base, const RunConfig& cfg, LlmBackend& backend,
                              const FixedState& fixed);

/// Re-optimizes every keyframe of result.activity from the stored seeds.
std::vector<KeyframePlacement> replay_placements(const RunResult& result, const RunConfig& cfg);

/// Writes result.json, timings.json and one file per artifact.
void persist(const RunResult& result, const std::filesystem::path& dir);

}  // namespace actsynth
