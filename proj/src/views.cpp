#include "actsynth/views.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "actsynth/union_find.hpp"

namespace actsynth {

namespace {

constexpr double kNearPlane = 1e-3;

struct CameraFrame {
  Vec3 origin, forward, right, up;
  double tan_h, tan_v;
};

CameraFrame frame_of(const CameraView& v) {
  CameraFrame f;
  f.origin = v.position;
  f.forward = v.forward();
  f.right = {std::sin(v.yaw), -std::cos(v.yaw), 0.0};
  f.up = cross(f.right, f.forward);
  f.tan_h = std::tan(v.fov_h / 2.0);
  f.tan_v = f.tan_h / v.image_aspect;
  return f;
}

std::size_t count_shared(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

bool free_camera_spot(const Scene& scene, Vec2 p, double clearance) {
  for (const auto& o : scene.objects) {
    if (footprint_of(o).distance_to(p) < clearance) return false;
  }
  for (const auto& w : scene.walls) {
    if (point_segment_distance(p, w) < clearance) return false;
  }
  return true;
}

std::string join_ids(const std::vector<int>& ids) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? ", " : "") << ids[i];
  return os.str();
}

}  // namespace

Vec3 CameraView::forward() const {
  return {std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch)};
}

UncoverableError::UncoverableError(std::vector<int> missing)
    : ViewPlanningError("no candidate view covers object ids: " + join_ids(missing)), missing_(std::move(missing)) {}

std::vector<Mark> project_marks(const Scene& scene, const CameraView& view) {
  const CameraFrame cam = frame_of(view);
  std::vector<Mark> marks;
  for (const auto& obj : scene.objects) {
    const Vec3 to_center = obj.position - cam.origin;
    if (dot(to_center, cam.forward) <= kNearPlane) continue;

    const Box3 box = obj.box();
    const auto corners = box.corners();
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (const auto& c : corners) {
      const Vec3 d = c - cam.origin;
      const double z = std::max(dot(d, cam.forward), kNearPlane);
      const double u = dot(d, cam.right) / (z * cam.tan_h);
      const double v = dot(d, cam.up) / (z * cam.tan_v);
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    const double full = (umax - umin) * (vmax - vmin);
    const double cu = std::max(0.0, std::min(umax, 1.0) - std::max(umin, -1.0));
    const double cv = std::max(0.0, std::min(vmax, 1.0) - std::max(vmin, -1.0));
    const double clipped = cu * cv;

    Mark m;
    m.object_id = obj.id;
    m.area_fraction = std::clamp(clipped / 4.0, 0.0, 1.0);
    m.distance = norm(to_center);
    m.out_of_view_fraction = full > 0.0 ? std::clamp(1.0 - clipped / full, 0.0, 1.0) : 1.0;

    std::array<Vec3, 9> samples{};
    samples[0] = obj.position;
    std::copy(corners.begin(), corners.end(), samples.begin() + 1);
    int blocked = 0;
    for (const auto& s : samples) {
      bool hit = !wall_free(scene, {cam.origin.xy(), s.xy()});
      for (const auto& other : scene.objects) {
        if (hit) break;
        if (other.id == obj.id) continue;
        hit = other.box().blocks_segment(cam.origin, s, 1e-9, 1.0 - 1e-9);
      }
      if (hit) ++blocked;
    }
    m.occluded_fraction = blocked / 9.0;
    marks.push_back(m);
  }
  return marks;
}

std::vector<int> filter_marks(const std::vector<Mark>& marks, const FilterConfig& cfg) {
  std::vector<int> kept;
  for (const auto& m : marks) {
    if (m.area_fraction >= cfg.min_area_fraction && m.distance <= cfg.max_distance &&
        m.out_of_view_fraction <= cfg.max_out_of_view && m.occluded_fraction <= cfg.max_occluded) {
      kept.push_back(m.object_id);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<ViewObservation> sample_candidate_views(const Scene& scene, std::size_t n, std::uint64_t rng_seed,
                                                    const ViewSamplingConfig& cfg) {
  if (n == 0) throw std::invalid_argument("sample_candidate_views: n must be >= 1");
  std::mt19937_64 rng(rng_seed);
  const Rect2& fb = scene.floor_bounds;
  std::uniform_real_distribution<double> ux(fb.xmin, fb.xmax);
  std::uniform_real_distribution<double> uy(fb.ymin, fb.ymax);
  std::uniform_real_distribution<double> uyaw(0.0, 2.0 * kPi);
  constexpr int kMaxAttempts = 10000;

  std::vector<ViewObservation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 p;
    bool found = false;
    for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
      p = {ux(rng), uy(rng)};
      found = free_camera_spot(scene, p, cfg.clearance);
    }
    if (!found) throw ViewPlanningError("no free floor space for camera placement");
    ViewObservation obs;
    obs.candidate_index = i;
    obs.view = {{p.x, p.y, cfg.eye_height}, uyaw(rng), cfg.pitch, cfg.fov_h, cfg.image_aspect};
    obs.surviving_marks = filter_marks(project_marks(scene, obs.view), cfg.filter);
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<ViewObservation> greedy_cover(const std::vector<ViewObservation>& candidates,
                                          const std::set<int>& universe) {
  std::set<int> uncovered = universe;
  {
    std::set<int> reachable;
    for (const auto& c : candidates) reachable.insert(c.surviving_marks.begin(), c.surviving_marks.end());
    std::vector<int> missing;
    for (int id : universe) {
      if (!reachable.count(id)) missing.push_back(id);
    }
    if (!missing.empty()) throw UncoverableError(std::move(missing));
  }

  std::vector<ViewObservation> chosen;
  std::vector<bool> used(candidates.size(), false);
  while (!uncovered.empty()) {
    std::size_t best = candidates.size();
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = 0;
      for (int id : candidates[i].surviving_marks) gain += uncovered.count(id);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    used[best] = true;
    for (int id : candidates[best].surviving_marks) uncovered.erase(id);
    chosen.push_back(candidates[best]);
  }
  return chosen;
}

bool views_adjacent(const ViewObservation& a, const ViewObservation& b) {
  return count_shared(a.surviving_marks, b.surviving_marks) > 0;
}

std::vector<std::pair<std::size_t, std::size_t>> view_adjacency(const std::vector<ViewObservation>& views) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < views.size(); ++i) {
    for (std::size_t j = i + 1; j < views.size(); ++j) {
      if (views_adjacent(views[i], views[j])) edges.emplace_back(i, j);
    }
  }
  return edges;
}

std::vector<std::vector<std::size_t>> view_components(const std::vector<ViewObservation>& views) {
  UnionFind uf(views.size());
  for (const auto& [i, j] : view_adjacency(views)) uf.unite(i, j);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < views.size(); ++i) groups[uf.find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end());
  return out;
}

ConnectivityResult augment_connectivity(const std::vector<ViewObservation>& cover,
                                        const std::vector<ViewObservation>& candidates) {
  std::vector<ViewObservation> selected = cover;
  std::set<std::size_t> in_selection;
  for (const auto& v : selected) in_selection.insert(v.candidate_index);

  while (true) {
    const auto comps = view_components(selected);
    if (comps.size() <= 1) break;
    std::vector<std::size_t> comp_of(selected.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
      for (std::size_t pos : comps[c]) comp_of[pos] = c;
    }

    // Single-candidate bridge: most components joined, then most shared objects.
    std::size_t best = candidates.size();
    std::size_t best_joined = 1;
    std::size_t best_shared = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (in_selection.count(candidates[i].candidate_index)) continue;
      std::set<std::size_t> touched;
      std::size_t shared = 0;
      for (std::size_t pos = 0; pos < selected.size(); ++pos) {
        const std::size_t s = count_shared(candidates[i].surviving_marks, selected[pos].surviving_marks);
        if (s > 0) {
          touched.insert(comp_of[pos]);
          shared += s;
        }
      }
      if (touched.size() > best_joined || (touched.size() == best_joined && best_joined > 1 && shared > best_shared)) {
        best = i;
        best_joined = touched.size();
        best_shared = shared;
      }
    }
    if (best < candidates.size()) {
      in_selection.insert(candidates[best].candidate_index);
      selected.push_back(candidates[best]);
      continue;
    }

    // No single view bridges two components: look for the shortest chain of
    // unselected candidates that does.
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!in_selection.count(candidates[i].candidate_index)) pool.push_back(i);
    }
    std::vector<std::size_t> best_chain;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      // BFS over pool nodes that touch component c.
      std::map<std::size_t, std::size_t> parent;  // pool candidate -> predecessor (or itself)
      std::deque<std::size_t> queue;
      for (std::size_t i : pool) {
        for (std::size_t pos : comps[c]) {
          if (views_adjacent(candidates[i], selected[pos])) {
            parent[i] = i;
            queue.push_back(i);
            break;
          }
        }
      }
      std::vector<std::size_t> found;
      while (!queue.empty() && found.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        for (std::size_t pos = 0; pos < selected.size(); ++pos) {
          if (comp_of[pos] != c && views_adjacent(candidates[cur], selected[pos])) {
            for (std::size_t k = cur;; k = parent[k]) {
              found.push_back(k);
              if (parent[k] == k) break;
            }
            break;
          }
        }
        if (!found.empty()) break;
        for (std::size_t nxt : pool) {
          if (parent.count(nxt) || !views_adjacent(candidates[cur], candidates[nxt])) continue;
          parent[nxt] = cur;
          queue.push_back(nxt);
        }
      }
      if (!found.empty() && (best_chain.empty() || found.size() < best_chain.size())) best_chain = found;
    }
    if (best_chain.empty()) break;
    std::sort(best_chain.begin(), best_chain.end());
    for (std::size_t i : best_chain) {
      in_selection.insert(candidates[i].candidate_index);
      selected.push_back(candidates[i]);
    }
  }

  ConnectivityResult result;
  const auto comps = view_components(selected);
  if (comps.size() > 1) {
    for (const auto& comp : comps) {
      std::vector<std::size_t> ids;
      for (std::size_t pos : comp) ids.push_back(selected[pos].candidate_index);
      result.components.push_back(std::move(ids));
    }
  }
  result.views = std::move(selected);
  return result;
}

ViewPlan plan_views(const Scene& scene, std::size_t candidates, std::uint64_t rng_seed,
                    const ViewSamplingConfig& cfg) {
  const auto pool = sample_candidate_views(scene, candidates, rng_seed, cfg);
  std::set<int> universe;
  for (const auto& o : scene.objects) universe.insert(o.id);
  const auto cover = greedy_cover(pool, universe);
  auto connected = augment_connectivity(cover, pool);

  ViewPlan plan;
  plan.candidate_count = pool.size();
  plan.selected = std::move(connected.views);
  plan.adjacency = view_adjacency(plan.selected);
  plan.residual_components = std::move(connected.components);
  return plan;
}

nlohmann::json view_to_json(const ViewObservation& v) {
  return {{"candidate_index", v.candidate_index},
          {"position", {v.view.position.x, v.view.position.y, v.view.position.z}},
          {"yaw", v.view.yaw},
          {"pitch", v.view.pitch},
          {"fov_h", v.view.fov_h},
          {"image_aspect", v.view.image_aspect},
          {"marks", v.surviving_marks}};
}

nlohmann::json view_plan_to_json(const ViewPlan& plan) {
  nlohmann::json views = nlohmann::json::array();
  for (const auto& v : plan.selected) views.push_back(view_to_json(v));
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : plan.adjacency) edges.push_back({a, b});
  return {{"candidate_count", plan.candidate_count},
          {"views", views},
          {"adjacency", edges},
          {"residual_components", plan.residual_components}};
}

}  // namespace actsynth
