#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "actsynth/scene.hpp"

namespace actsynth {

struct Area {
  int id = 0;
  std::vector<int> object_ids;  // ascending
  Vec2 centroid;

  /// "area_<id>"
  std::string name() const { return "area_" + std::to_string(id); }
  bool operator==(const Area&) const = default;
};

using AreaEdge = std::pair<int, int>;  // (min id, max id)

enum class EdgeProvenance { mllm_reasoned, mst_fallback };

std::string_view to_string(EdgeProvenance p);

struct AreaSceneGraph {
  std::vector<Area> areas;
  std::vector<AreaEdge> edges;             // sorted, unique
  std::vector<EdgeProvenance> provenance;  // parallel to edges

  bool connected() const;
  bool operator==(const AreaSceneGraph&) const = default;
};

inline AreaEdge make_edge(int a, int b) { return a < b ? AreaEdge{a, b} : AreaEdge{b, a}; }

constexpr double kDefaultClusterDistance = 3.0;

/// Center-to-center segment between the two footprints crosses no wall.
bool pairwise_visible(const Scene& scene, const SceneObject& a, const SceneObject& b);

/// Connected components of the "near and mutually visible" object graph.
/// Area ids follow the ascending order of each area's smallest object id.
std::vector<Area> cluster_areas(const Scene& scene, double d_max = kDefaultClusterDistance);

/// Minimum additional edges (Kruskal over centroid distances) joining every
/// component of (areas, existing_edges). Ties go to the smaller (min, max) pair.
std::set<AreaEdge> mst_fallback_edges(const std::vector<Area>& areas, const std::set<AreaEdge>& existing_edges);

/// Serialization the model receives, e.g.
/// {"area_0" : {"objects": ["object_0-sink", ...]}, ...}
std::string areas_prompt_json(const Scene& scene, const std::vector<Area>& areas);
/// Same shape with an "adjacent" list per area.
std::string graph_prompt_json(const Scene& scene, const AreaSceneGraph& graph);

nlohmann::json graph_to_json(const Scene& scene, const AreaSceneGraph& graph);

}  // namespace actsynth
