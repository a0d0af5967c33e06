#include "actsynth/areas.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "actsynth/union_find.hpp"

namespace actsynth {

namespace {

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

void append_object_list(std::ostringstream& os, const Scene& scene, const Area& area) {
  os << "\"objects\": [";
  for (std::size_t i = 0; i < area.object_ids.size(); ++i) {
    if (i) os << ", ";
    os << quoted(scene.at(area.object_ids[i]).mark_name());
  }
  os << "]";
}

}  // namespace

std::string_view to_string(EdgeProvenance p) {
  return p == EdgeProvenance::mllm_reasoned ? "mllm_reasoned" : "mst_fallback";
}

bool AreaSceneGraph::connected() const {
  if (areas.size() <= 1) return true;
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < areas.size(); ++i) index[areas[i].id] = i;
  UnionFind uf(areas.size());
  for (const auto& [a, b] : edges) uf.unite(index.at(a), index.at(b));
  return uf.components() == 1;
}

bool pairwise_visible(const Scene& scene, const SceneObject& a, const SceneObject& b) {
  return wall_free(scene, {a.position.xy(), b.position.xy()});
}

std::vector<Area> cluster_areas(const Scene& scene, double d_max) {
  if (!(d_max > 0.0)) throw std::invalid_argument("cluster_areas: d_max must be positive");
  const auto& objs = scene.objects;
  const std::size_t n = objs.size();
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(objs[i].position.xy(), objs[j].position.xy()) <= d_max &&
          pairwise_visible(scene, objs[i], objs[j])) {
        uf.unite(i, j);
      }
    }
  }
  std::map<std::size_t, std::vector<int>> members;
  for (std::size_t i = 0; i < n; ++i) members[uf.find(i)].push_back(objs[i].id);

  std::vector<Area> areas;
  for (auto& [root, ids] : members) {
    std::sort(ids.begin(), ids.end());
    Area area;
    area.object_ids = ids;
    Vec2 sum;
    for (int id : ids) sum += scene.at(id).position.xy();
    area.centroid = sum / static_cast<double>(ids.size());
    areas.push_back(std::move(area));
  }
  std::sort(areas.begin(), areas.end(),
            [](const Area& a, const Area& b) { return a.object_ids.front() < b.object_ids.front(); });
  for (std::size_t i = 0; i < areas.size(); ++i) areas[i].id = static_cast<int>(i);
  return areas;
}

std::set<AreaEdge> mst_fallback_edges(const std::vector<Area>& areas, const std::set<AreaEdge>& existing_edges) {
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < areas.size(); ++i) index[areas[i].id] = i;
  UnionFind uf(areas.size());
  for (const auto& [a, b] : existing_edges) {
    const auto ia = index.find(a);
    const auto ib = index.find(b);
    if (ia != index.end() && ib != index.end()) uf.unite(ia->second, ib->second);
  }

  struct Candidate {
    double weight;
    AreaEdge edge;
    std::size_t i, j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    for (std::size_t j = i + 1; j < areas.size(); ++j) {
      candidates.push_back({distance(areas[i].centroid, areas[j].centroid),
                            make_edge(areas[i].id, areas[j].id), i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.weight, x.edge) < std::tie(y.weight, y.edge);
  });

  std::set<AreaEdge> added;
  for (const auto& c : candidates) {
    if (uf.components() <= 1) break;
    if (uf.unite(c.i, c.j)) added.insert(c.edge);
  }
  return added;
}

std::string areas_prompt_json(const Scene& scene, const std::vector<Area>& areas) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < areas.size(); ++i) {
    if (i) os << ", ";
    os << quoted(areas[i].name()) << " : {";
    append_object_list(os, scene, areas[i]);
    os << "}";
  }
  os << "}";
  return os.str();
}

std::string graph_prompt_json(const Scene& scene, const AreaSceneGraph& graph) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < graph.areas.size(); ++i) {
    const Area& area = graph.areas[i];
    if (i) os << ", ";
    os << quoted(area.name()) << " : {";
    append_object_list(os, scene, area);
    os << ", \"adjacent\": [";
    bool first = true;
    for (const auto& [a, b] : graph.edges) {
      if (a != area.id && b != area.id) continue;
      if (!first) os << ", ";
      first = false;
      os << quoted("area_" + std::to_string(a == area.id ? b : a));
    }
    os << "]}";
  }
  os << "}";
  return os.str();
}

nlohmann::json graph_to_json(const Scene& scene, const AreaSceneGraph& graph) {
  nlohmann::json areas = nlohmann::json::array();
  for (const auto& a : graph.areas) {
    nlohmann::json names = nlohmann::json::array();
    for (int id : a.object_ids) names.push_back(scene.at(id).mark_name());
    areas.push_back({{"id", a.id},
                     {"name", a.name()},
                     {"object_ids", a.object_ids},
                     {"objects", names},
                     {"centroid", {a.centroid.x, a.centroid.y}}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    edges.push_back({{"a", graph.edges[i].first},
                     {"b", graph.edges[i].second},
                     {"provenance", std::string(to_string(graph.provenance[i]))}});
  }
  return {{"areas", areas}, {"edges", edges}};
}

}  // namespace actsynth
