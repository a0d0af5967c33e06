#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "actsynth/areas.hpp"
#include "actsynth/union_find.hpp"
#include "test_util.hpp"

using namespace actsynth;
using namespace actsynth::test;

namespace {

Scene points_scene(const std::vector<Vec2>& pts) {
  Scene s;
  s.floor_bounds = {-50, -50, 50, 50};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.objects.push_back(box(int(i), "thing", {pts[i].x, pts[i].y, 0.2}, {0.1, 0.1, 0.2}));
  }
  return s;
}

double tree_weight(const std::vector<Area>& areas, const std::set<AreaEdge>& edges) {
  double w = 0;
  for (auto [a, b] : edges) w += distance(areas[a].centroid, areas[b].centroid);
  return w;
}

bool connects(std::size_t n, const std::set<AreaEdge>& edges) {
  std::vector<int> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = int(i);
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto [a, b] : edges) {
      const int m = std::min(comp[a], comp[b]);
      if (comp[a] != m || comp[b] != m) {
        comp[a] = comp[b] = m;
        changed = true;
      }
    }
  }
  return std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
}

// Brute force: cheapest edge subset of size (#components - 1) that connects everything.
double brute_force_fallback(const std::vector<Area>& areas, const std::set<AreaEdge>& existing, std::size_t k) {
  std::vector<AreaEdge> all;
  for (std::size_t i = 0; i < areas.size(); ++i)
    for (std::size_t j = i + 1; j < areas.size(); ++j) all.push_back({int(i), int(j)});
  double best = 1e300;
  const std::size_t m = all.size();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (std::size_t(__builtin_popcount(mask)) != k) continue;
    std::set<AreaEdge> e = existing;
    std::set<AreaEdge> added;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        e.insert(all[i]);
        added.insert(all[i]);
      }
    if (connects(areas.size(), e)) best = std::min(best, tree_weight(areas, added));
  }
  return best;
}

}  // namespace

TEST_CASE("pairwise visibility") {
  Scene s = points_scene({{0, 0}, {2, 0}});
  CHECK(pairwise_visible(s, s.objects[0], s.objects[1]));
  s.walls = {{{1, -1}, {1, 1}}};
  CHECK_FALSE(pairwise_visible(s, s.objects[0], s.objects[1]));
  s.walls = {{{0, 0.5}, {2, 0.5}}};
  CHECK(pairwise_visible(s, s.objects[0], s.objects[1]));
}

TEST_CASE("clustering examples") {
  CHECK(cluster_areas(points_scene({{0, 0}, {1, 0}, {0, 1}}), 3.0).size() == 1);
  const double eps = 1e-6;
  CHECK(cluster_areas(points_scene({{0, 0}, {3.0 + eps, 0}}), 3.0).size() == 2);
  CHECK(cluster_areas(points_scene({{0, 0}, {3.0, 0}}), 3.0).size() == 1);
  CHECK(cluster_areas(Scene{}, 3.0).empty());
}

TEST_CASE("apartment clusters into kitchen, bedroom and living areas") {
  const auto areas = cluster_areas(apartment());
  REQUIRE(areas.size() == 3);
  CHECK(areas[0].object_ids == std::vector<int>{0, 1, 2});
  CHECK(areas[1].object_ids == std::vector<int>{3, 5});
  CHECK(areas[2].object_ids == std::vector<int>{4, 6, 7, 8, 9, 10, 11});
  CHECK(areas_prompt_json(apartment(), areas) ==
        R"({"area_0" : {"objects": ["object_0-sink", "object_1-stove", "object_2-cooktop"]}, )"
        R"("area_1" : {"objects": ["object_3-bookshelf", "object_5-bed"]}, )"
        R"("area_2" : {"objects": ["object_4-tea_table", "object_6-chair", "object_7-chair", "object_8-table", )"
        R"("object_9-standing_lamp", "object_10-tv", "object_11-sofa"]}})");
}

TEST_CASE("clustering is a partition, permutation invariant, with mean centroids") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts(12);
    for (auto& p : pts) p = {u(rng), u(rng)};
    Scene s = points_scene(pts);
    s.walls = {{{u(rng), u(rng)}, {u(rng), u(rng)}}};
    const auto areas = cluster_areas(s, 4.0);
    std::multiset<int> seen;
    for (const auto& a : areas) {
      Vec2 c{0, 0};
      for (int id : a.object_ids) {
        seen.insert(id);
        c += footprint_of(s.at(id)).center;
      }
      c = c / double(a.object_ids.size());
      CHECK(a.centroid.x == doctest::Approx(c.x));
      CHECK(a.centroid.y == doctest::Approx(c.y));
    }
    CHECK(seen.size() == 12);
    CHECK(std::set<int>(seen.begin(), seen.end()).size() == 12);

    Scene shuffled = s;
    std::shuffle(shuffled.objects.begin(), shuffled.objects.end(), rng);
    const auto again = cluster_areas(shuffled, 4.0);
    REQUIRE(again.size() == areas.size());
    for (std::size_t i = 0; i < areas.size(); ++i) CHECK(again[i].object_ids == areas[i].object_ids);
  }
  Scene s = points_scene({{-40, -40}, {0, 0}, {40, 40}});
  CHECK(cluster_areas(s, 1e9).size() == 1);
}

TEST_CASE("mst fallback examples") {
  std::vector<Area> areas{{0, {0}, {0, 0}}, {1, {1}, {1, 0}}, {2, {2}, {5, 0}}};
  CHECK(mst_fallback_edges(areas, {}) == std::set<AreaEdge>{{0, 1}, {1, 2}});
  CHECK(mst_fallback_edges(areas, {{0, 1}, {1, 2}}).empty());
  CHECK(mst_fallback_edges(areas, {{0, 1}}) == std::set<AreaEdge>{{1, 2}});
  CHECK(mst_fallback_edges(areas, {{1, 2}}) == std::set<AreaEdge>{{0, 1}});
}

TEST_CASE("mst fallback matches brute force") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 4;
    std::vector<Area> areas;
    for (int i = 0; i < n; ++i) areas.push_back({i, {i}, {u(rng), u(rng)}});
    std::set<AreaEdge> existing;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (u(rng) < 1.5) existing.insert({i, j});
    UnionFind uf(n);
    for (auto [a, b] : existing) uf.unite(a, b);
    std::set<std::size_t> roots;
    for (int i = 0; i < n; ++i) roots.insert(uf.find(i));
    const auto added = mst_fallback_edges(areas, existing);
    CHECK(added.size() == roots.size() - 1);
    std::set<AreaEdge> all = existing;
    all.insert(added.begin(), added.end());
    CHECK(connects(n, all));
    CHECK(tree_weight(areas, added) == doctest::Approx(brute_force_fallback(areas, existing, roots.size() - 1)));
  }
}
