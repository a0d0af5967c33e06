#include "actsynth/placement.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "actsynth/hash.hpp"
#include "actsynth/union_find.hpp"

namespace actsynth {

namespace {

using nlohmann::json;

constexpr int kSampleAttempts = 10000;
constexpr double kSeatTolerance = 1e-9;

double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

bool crosses_wall(const std::vector<Segment2>& walls, const Segment2& s) {
  return std::any_of(walls.begin(), walls.end(), [&](const Segment2& w) { return segments_intersect(s, w); });
}

/// Penetration of a circle of radius r into a footprint.
double circle_depth(const Footprint& f, Vec2 p, double r) {
  if (!f.contains(p)) return std::max(0.0, r - f.distance_to(p));
  const Vec2 l = f.to_local(p);
  return r + std::min(f.half_extents.x - std::abs(l.x), f.half_extents.y - std::abs(l.y));
}

Rect2 footprint_bounds(const Footprint& f) {
  Rect2 r{1e300, 1e300, -1e300, -1e300};
  for (const auto& c : f.corners()) {
    r.xmin = std::min(r.xmin, c.x);
    r.ymin = std::min(r.ymin, c.y);
    r.xmax = std::max(r.xmax, c.x);
    r.ymax = std::max(r.ymax, c.y);
  }
  return r;
}

Rect2 intersect(const Rect2& a, const Rect2& b) {
  return {std::max(a.xmin, b.xmin), std::max(a.ymin, b.ymin), std::min(a.xmax, b.xmax), std::min(a.ymax, b.ymax)};
}

/// Region a floor-plane sample is drawn from.
Rect2 sampling_box(const FreeSpace& fs) {
  switch (fs.kind) {
    case FreeSpaceKind::standing_ring:
      return intersect(footprint_bounds(fs.reference_footprint.inflated(fs.ring_outer)), fs.bounds);
    case FreeSpaceKind::lying_surface:
      return footprint_bounds(fs.surface);
    default:
      return fs.bounds;
  }
}

Vec2 sample_floor(const FreeSpace& fs, std::mt19937_64& rng, const std::string& who) {
  if (fs.kind == FreeSpaceKind::lying_surface) {
    std::uniform_real_distribution<double> ux(-fs.surface.half_extents.x, fs.surface.half_extents.x);
    std::uniform_real_distribution<double> uy(-fs.surface.half_extents.y, fs.surface.half_extents.y);
    const double lx = ux(rng);
    return fs.surface.to_world({lx, uy(rng)});
  }
  const Rect2 box = sampling_box(fs);
  if (box.width() > 0.0 && box.height() > 0.0) {
    std::uniform_real_distribution<double> ux(box.xmin, box.xmax);
    std::uniform_real_distribution<double> uy(box.ymin, box.ymax);
    for (int i = 0; i < kSampleAttempts; ++i) {
      const double x = ux(rng);
      const Vec2 p{x, uy(rng)};
      if (fs.contains(p)) return p;
    }
  }
  throw PlacementError("empty free space for " + who);
}

double pose_height(const FreeSpace& fs) {
  return fs.kind == FreeSpaceKind::lying_surface ? fs.surface_height : 0.0;
}

std::set<int> occupied_points(const ActivityGroup& g, std::size_t self) {
  std::set<int> out;
  const GroupMember& m = g.members[self];
  if (!m.space || m.space->kind != FreeSpaceKind::sitting_points) return out;
  std::vector<Vec2> fixed_positions = g.external_capsules;
  for (std::size_t i = 0; i < g.members.size(); ++i) {
    if (i == self) continue;
    const GroupMember& o = g.members[i];
    if (o.fixed) {
      fixed_positions.push_back(o.pose.position.xy());
    } else if (o.pose.sitting_point_index && o.desc.pose == FundamentalPose::sitting &&
               o.desc.reference == m.desc.reference) {
      out.insert(*o.pose.sitting_point_index);
    }
  }
  const auto& pts = m.space->sitting_points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    for (const auto& f : fixed_positions) {
      if (distance(pts[k].position.xy(), f) < kCapsuleRadius) out.insert(static_cast<int>(k));
    }
  }
  return out;
}

void place_initial(ActivityGroup& g, std::size_t i, std::mt19937_64& rng) {
  GroupMember& m = g.members[i];
  const FreeSpace& fs = *m.space;
  m.pose = CharacterPose{};
  m.pose.fundamental = m.desc.pose;
  if (fs.kind == FreeSpaceKind::sitting_points) {
    const auto taken = occupied_points(g, i);
    std::vector<int> free;
    for (int k = 0; k < static_cast<int>(fs.sitting_points.size()); ++k) {
      if (!taken.count(k)) free.push_back(k);
    }
    if (free.empty()) throw PlacementError("no free sitting point for " + m.desc.subject);
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    const int k = free[pick(rng)];
    m.pose.position = fs.sitting_points[static_cast<std::size_t>(k)].position;
    m.pose.sitting_point_index = k;
    return;
  }
  const Vec2 p = sample_floor(fs, rng, m.desc.subject);
  m.pose.position = {p.x, p.y, pose_height(fs)};
}

}  // namespace

std::string_view to_string(FreeSpaceKind k) {
  switch (k) {
    case FreeSpaceKind::standing_ring:
      return "standing_ring";
    case FreeSpaceKind::open_floor:
      return "open_floor";
    case FreeSpaceKind::sitting_points:
      return "sitting_points";
    case FreeSpaceKind::lying_surface:
      return "lying_surface";
  }
  return "unknown";
}

bool FreeSpace::contains(Vec2 p) const {
  switch (kind) {
    case FreeSpaceKind::standing_ring: {
      if (!bounds.contains(p)) return false;
      const double d = reference_footprint.distance_to(p);
      if (d <= ring_inner || d > ring_outer) return false;
      if (std::any_of(obstacles.begin(), obstacles.end(), [&](const Footprint& f) { return f.contains(p); })) {
        return false;
      }
      return !crosses_wall(walls, {p, reference_footprint.closest_point(p)});
    }
    case FreeSpaceKind::open_floor:
      return bounds.contains(p) &&
             std::none_of(obstacles.begin(), obstacles.end(), [&](const Footprint& f) { return f.contains(p); });
    case FreeSpaceKind::lying_surface:
      return surface.contains(p, 1e-12);
    case FreeSpaceKind::sitting_points:
      return std::any_of(sitting_points.begin(), sitting_points.end(),
                         [&](const SittingPoint& s) { return distance(s.position.xy(), p) <= kSeatTolerance; });
  }
  return false;
}

bool FreeSpace::contains(const CharacterPose& pose) const {
  if (std::abs(pose.head_yaw) > kPi / 2.0 + 1e-12) return false;
  switch (kind) {
    case FreeSpaceKind::sitting_points: {
      if (pose.fundamental != FundamentalPose::sitting || !pose.sitting_point_index) return false;
      const int k = *pose.sitting_point_index;
      if (k < 0 || k >= static_cast<int>(sitting_points.size())) return false;
      const Vec3& s = sitting_points[static_cast<std::size_t>(k)].position;
      return norm(s - pose.position) <= kSeatTolerance;
    }
    case FreeSpaceKind::lying_surface:
      return pose.fundamental == FundamentalPose::lying && pose.head_yaw == 0.0 &&
             pose.position.z == surface_height && contains(pose.position.xy());
    default:
      return pose.fundamental == FundamentalPose::standing && pose.position.z == 0.0 && contains(pose.position.xy());
  }
}

double FreeSpace::frame_yaw(const CharacterPose& pose) const {
  switch (kind) {
    case FreeSpaceKind::standing_ring: {
      const Vec2 to_ref = reference_footprint.center - pose.position.xy();
      return norm(to_ref) > 0.0 ? angle_of(to_ref) : reference_footprint.yaw;
    }
    case FreeSpaceKind::sitting_points:
      if (pose.sitting_point_index && *pose.sitting_point_index >= 0 &&
          *pose.sitting_point_index < static_cast<int>(sitting_points.size())) {
        return angle_of(sitting_points[static_cast<std::size_t>(*pose.sitting_point_index)].forward);
      }
      return 0.0;
    case FreeSpaceKind::lying_surface:
      return surface.yaw;
    case FreeSpaceKind::open_floor:
      return 0.0;
  }
  return 0.0;
}

std::vector<SittingPoint> generate_sitting_points(const SceneObject& obj) {
  if (!obj.has(Affordance::sittable)) throw PlacementError(obj.mark_name() + " is not sittable");
  const Footprint f = footprint_of(obj);
  const double height = obj.support_height.value_or(obj.position.z + obj.half_extents.z);
  const auto axis_offsets = [](double half) {
    std::vector<double> out;
    const double usable = 2.0 * half - 2.0 * kSittingInset;
    if (usable < 0.0) return out;
    const int n = static_cast<int>(std::floor(usable / kSittingGridSpacing + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) out.push_back((i - (n - 1) / 2.0) * kSittingGridSpacing);
    return out;
  };
  const auto xs = axis_offsets(f.half_extents.x);
  const auto ys = axis_offsets(f.half_extents.y);

  std::vector<SittingPoint> out;
  if (xs.empty() || ys.empty()) {
    out.push_back({{f.center.x, f.center.y, height}, obj.facing()});
    return out;
  }
  for (double lx : xs) {
    for (double ly : ys) {
      // Open edges: front (+x) and both sides; the back (-x) is the backrest.
      const double front = f.half_extents.x - lx;
      const double left = f.half_extents.y - ly;
      const double right = f.half_extents.y + ly;
      Vec2 normal{1.0, 0.0};
      if (left < front - 1e-9 && left <= right) {
        normal = {0.0, 1.0};
      } else if (right < front - 1e-9 && right < left) {
        normal = {0.0, -1.0};
      }
      const Vec2 p = f.to_world({lx, ly});
      out.push_back({{p.x, p.y, height}, rotate(normal, f.yaw)});
    }
  }
  return out;
}

FreeSpace free_space_for(const Description& desc, const Scene& scene) {
  FreeSpace fs;
  fs.walls = scene.walls;
  fs.bounds = scene.floor_bounds;
  fs.reference = desc.reference;
  const SceneObject* ref = desc.reference ? scene.find(*desc.reference) : nullptr;
  if (desc.reference && !ref) throw PlacementError("unknown reference object " + std::to_string(*desc.reference));
  for (const auto& o : scene.objects) {
    if (o.has(Affordance::walk_obstacle) && (!ref || o.id != ref->id)) fs.obstacles.push_back(footprint_of(o));
  }

  switch (desc.pose) {
    case FundamentalPose::standing: {
      if (!ref) {
        fs.kind = FreeSpaceKind::open_floor;
        return fs;
      }
      fs.kind = FreeSpaceKind::standing_ring;
      fs.reference_footprint = footprint_of(*ref);
      // Probe the ring on a coarse grid so an enclosed reference fails early.
      const Rect2 box = sampling_box(fs);
      for (double x = box.xmin; x <= box.xmax; x += 0.05) {
        for (double y = box.ymin; y <= box.ymax; y += 0.05) {
          if (fs.contains(Vec2{x, y})) return fs;
        }
      }
      throw PlacementError("empty free space near " + ref->mark_name());
    }
    case FundamentalPose::sitting: {
      if (!ref) throw PlacementError(desc.subject + ": sitting requires a reference");
      if (!ref->has(Affordance::sittable)) throw PlacementError(ref->mark_name() + " is not sittable");
      fs.kind = FreeSpaceKind::sitting_points;
      fs.reference_footprint = footprint_of(*ref);
      fs.sitting_points = generate_sitting_points(*ref);
      return fs;
    }
    case FundamentalPose::lying: {
      if (!ref) throw PlacementError(desc.subject + ": lying requires a reference");
      if (!ref->has(Affordance::lieable)) throw PlacementError(ref->mark_name() + " is not lieable");
      if (!ref->support_height) throw PlacementError(ref->mark_name() + " has no support surface");
      fs.kind = FreeSpaceKind::lying_surface;
      fs.reference_footprint = footprint_of(*ref);
      fs.surface = fs.reference_footprint;
      fs.surface_height = *ref->support_height;
      return fs;
    }
  }
  return fs;
}

double positional_cost(double dist, double d_threshold) {
  if (!(d_threshold > 0.0)) throw std::invalid_argument("positional_cost: D must be positive");
  return std::max(1.0 - std::exp(d_threshold - dist), 0.0);
}

double positional_cost(Vec2 a, Vec2 b, double d_threshold) { return positional_cost(distance(a, b), d_threshold); }

double rotational_cost(Vec2 x, Vec2 y) {
  const double nx = norm(x);
  const double ny = norm(y);
  if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("rotational_cost: zero vector");
  const double c = std::clamp(dot(x, y) / (nx * ny), -1.0, 1.0);
  return (1.0 - c) / 2.0;
}

double collision_cost(double depth) { return depth > 0.0 ? 1.0 - std::exp(-depth / kCollisionDepthScale) : 0.0; }

void AnnealSchedule::validate() const {
  if (!(t0 > 0.0)) throw std::invalid_argument("schedule: t0 must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("schedule: gamma must lie in (0, 1)");
  if (iters < 0) throw std::invalid_argument("schedule: iters must be non-negative");
  if (!(sigma_translation > 0.0 && sigma_body > 0.0 && sigma_head > 0.0)) {
    throw std::invalid_argument("schedule: proposal sigmas must be positive");
  }
}

json AnnealSchedule::to_json() const {
  return {{"t0", t0},
          {"gamma", gamma},
          {"iters", iters},
          {"proposal_sigmas", {{"translation", sigma_translation}, {"body_yaw", sigma_body}, {"head_yaw", sigma_head}}}};
}

AnnealSchedule AnnealSchedule::from_json(const json& j) {
  AnnealSchedule s;
  s.t0 = j.value("t0", s.t0);
  s.gamma = j.value("gamma", s.gamma);
  s.iters = j.value("iters", s.iters);
  if (j.contains("proposal_sigmas")) {
    const auto& p = j.at("proposal_sigmas");
    s.sigma_translation = p.value("translation", s.sigma_translation);
    s.sigma_body = p.value("body_yaw", s.sigma_body);
    s.sigma_head = p.value("head_yaw", s.sigma_head);
  }
  s.validate();
  return s;
}

const GroupMember* ActivityGroup::member(const std::string& id) const {
  for (const auto& m : members) {
    if (m.desc.subject == id) return &m;
  }
  return nullptr;
}

std::vector<ActivityGroup> build_groups(const Keyframe& keyframe,
                                        const std::vector<std::vector<InteractionConstraintSpec>>& specs,
                                        const Scene& scene, const std::map<std::string, CharacterPose>& fixed) {
  const auto& descs = keyframe.descriptions;
  if (specs.size() != descs.size()) throw std::invalid_argument("build_groups: one spec list per description");

  UnionFind uf(descs.size());
  const auto index_of = [&](const std::string& id) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < descs.size(); ++i) {
      if (descs[i].subject == id) return i;
    }
    return std::nullopt;
  };
  for (std::size_t i = 0; i < descs.size(); ++i) {
    if (const auto* c = std::get_if<CharacterTarget>(&descs[i].interaction.target)) {
      if (auto j = index_of(c->character_id)) uf.unite(i, *j);
    }
    for (std::size_t j = i + 1; j < descs.size(); ++j) {
      if (descs[i].reference && descs[i].reference == descs[j].reference) uf.unite(i, j);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < descs.size(); ++i) components[uf.find(i)].push_back(i);

  std::vector<ActivityGroup> groups;
  for (const auto& [root, idx] : components) {
    ActivityGroup g;
    g.scene = &scene;
    for (std::size_t i : idx) {
      GroupMember m;
      m.desc = descs[i];
      if (auto it = fixed.find(m.desc.subject); it != fixed.end()) {
        m.fixed = true;
        m.pose = it->second;
      } else {
        m.space = free_space_for(m.desc, scene);
        m.pose.fundamental = m.desc.pose;
      }
      g.members.push_back(std::move(m));
    }
    std::sort(g.members.begin(), g.members.end(),
              [](const GroupMember& a, const GroupMember& b) { return a.desc.subject < b.desc.subject; });
    g.id = g.members.front().desc.subject;

    for (std::size_t i : idx) {
      for (const auto& s : specs[i]) {
        const GroupMember* subject = g.member(s.subject);
        if (!subject) continue;
        bool target_fixed = false;
        if (const auto* c = std::get_if<CharacterTarget>(&s.target)) {
          const GroupMember* t = g.member(c->character_id);
          if (!t) continue;
          target_fixed = t->fixed;
        }
        // Constants cannot respond to a cost term.
        if (s.kind == ConstraintKind::rotational && subject->fixed) continue;
        if (subject->fixed && (target_fixed || std::holds_alternative<ObjectTarget>(s.target))) continue;
        if (std::find(g.specs.begin(), g.specs.end(), s) == g.specs.end()) g.specs.push_back(s);
      }
    }
    for (const auto& [id, pose] : fixed) {
      if (!g.member(id)) g.external_capsules.push_back(pose.position.xy());
    }
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end(), [](const ActivityGroup& a, const ActivityGroup& b) { return a.id < b.id; });
  return groups;
}

Vec2 gaze_direction(const CharacterPose& pose, const FreeSpace* space) {
  const double frame = space ? space->frame_yaw(pose) : 0.0;
  return heading(frame + pose.body_yaw + pose.head_yaw);
}

std::vector<CostTerm> cost_terms(const ActivityGroup& g) {
  std::vector<CostTerm> terms;
  const auto position_of = [&](const InteractionTarget& t) -> std::optional<Vec2> {
    if (const auto* o = std::get_if<ObjectTarget>(&t)) {
      if (const auto* obj = g.scene->find(o->object_id)) return footprint_of(*obj).center;
      return std::nullopt;
    }
    if (const auto* c = std::get_if<CharacterTarget>(&t)) {
      if (const auto* m = g.member(c->character_id)) return m->pose.position.xy();
    }
    return std::nullopt;
  };

  for (const auto& s : g.specs) {
    const GroupMember* m = g.member(s.subject);
    const auto target = position_of(s.target);
    if (!m || !target) continue;
    const Vec2 p = m->pose.position.xy();
    const std::string label = std::string(to_string(s.kind)) + ":" + s.subject + "->" + target_token(s.target);
    if (s.kind == ConstraintKind::positional) {
      double d = distance(p, *target);
      if (const auto* o = std::get_if<ObjectTarget>(&s.target)) d = footprint_of(g.scene->at(o->object_id)).distance_to(p);
      terms.push_back({label, positional_cost(d, s.threshold_d)});
    } else {
      const Vec2 to_target = *target - p;
      const double c = norm(to_target) > 0.0
                           ? rotational_cost(gaze_direction(m->pose, m->space ? &*m->space : nullptr), to_target)
                           : 0.5;
      terms.push_back({label, c});
    }
  }

  for (std::size_t i = 0; i < g.members.size(); ++i) {
    const GroupMember& m = g.members[i];
    if (m.fixed) continue;
    const Vec2 p = m.pose.position.xy();
    const FreeSpace& fs = *m.space;

    terms.push_back({"reference:" + m.desc.subject, fs.contains(m.pose) ? 0.0 : 1.0});

    double depth = 0.0;
    for (const auto& o : g.scene->objects) {
      if (!o.has(Affordance::walk_obstacle) || (m.desc.reference && o.id == *m.desc.reference)) continue;
      depth += circle_depth(footprint_of(o), p, kCapsuleRadius);
    }
    for (const auto& w : g.scene->walls) depth += std::max(0.0, kCapsuleRadius - point_segment_distance(p, w));
    for (const auto& c : g.external_capsules) depth += std::max(0.0, 2.0 * kCapsuleRadius - distance(p, c));
    terms.push_back({"collision:" + m.desc.subject, collision_cost(depth)});
  }

  for (std::size_t i = 0; i < g.members.size(); ++i) {
    for (std::size_t j = i + 1; j < g.members.size(); ++j) {
      if (g.members[i].fixed && g.members[j].fixed) continue;
      const double d = distance(g.members[i].pose.position.xy(), g.members[j].pose.position.xy());
      terms.push_back({"collision:" + g.members[i].desc.subject + "|" + g.members[j].desc.subject,
                       collision_cost(std::max(0.0, 2.0 * kCapsuleRadius - d))});
    }
  }
  return terms;
}

double group_cost(const ActivityGroup& g) {
  const auto terms = cost_terms(g);
  if (terms.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : terms) sum += t.cost;
  return sum / static_cast<double>(terms.size());
}

CharacterPose propose_move(const CharacterPose& pose, const FreeSpace& fs, const AnnealSchedule& sigmas,
                           std::mt19937_64& rng, const std::set<int>& occupied) {
  CharacterPose next = pose;
  std::uniform_int_distribution<int> move(0, 2);
  switch (move(rng)) {
    case 0: {
      if (fs.kind == FreeSpaceKind::sitting_points) {
        std::vector<int> options;
        std::vector<double> weights;
        const Vec2 here = pose.position.xy();
        for (int k = 0; k < static_cast<int>(fs.sitting_points.size()); ++k) {
          if (pose.sitting_point_index == k || occupied.count(k)) continue;
          options.push_back(k);
          weights.push_back(
              std::exp(-distance(here, fs.sitting_points[static_cast<std::size_t>(k)].position.xy()) /
                       sigmas.sigma_translation));
        }
        if (options.empty()) return next;
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        const int k = options[pick(rng)];
        next.sitting_point_index = k;
        next.position = fs.sitting_points[static_cast<std::size_t>(k)].position;
        return next;
      }
      std::normal_distribution<double> step(0.0, sigmas.sigma_translation);
      for (int attempt = 0; attempt < kTranslationRetries; ++attempt) {
        const double dx = step(rng);
        const Vec2 p = pose.position.xy() + Vec2{dx, step(rng)};
        if (fs.contains(p)) {
          next.position = {p.x, p.y, pose.position.z};
          return next;
        }
      }
      return next;
    }
    case 1: {
      std::normal_distribution<double> step(0.0, sigmas.sigma_body);
      next.body_yaw = wrap_angle(pose.body_yaw + step(rng));
      return next;
    }
    default: {
      if (pose.fundamental == FundamentalPose::lying) return next;
      std::normal_distribution<double> step(0.0, sigmas.sigma_head);
      next.head_yaw = std::clamp(pose.head_yaw + step(rng), -kPi / 2.0, kPi / 2.0);
      return next;
    }
  }
}

bool metropolis_accept(double c_old, double c_new, double t, std::mt19937_64& rng) {
  if (!(t > 0.0)) throw std::invalid_argument("metropolis_accept: temperature must be positive");
  if (c_new <= c_old) return true;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < std::exp((c_old - c_new) / t);
}

GroupResult optimize_group(ActivityGroup group, const AnnealSchedule& schedule, std::uint64_t seed) {
  schedule.validate();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> movable;
  for (std::size_t i = 0; i < group.members.size(); ++i) {
    if (group.members[i].fixed) continue;
    movable.push_back(i);
    place_initial(group, i, rng);
  }

  double cost = group_cost(group);
  GroupResult result;
  result.id = group.id;
  result.seed = seed;
  for (const auto& m : group.members) result.members.push_back(m.desc.subject);

  std::vector<CharacterPose> best_poses;
  for (const auto& m : group.members) best_poses.push_back(m.pose);
  double best = cost;
  result.best_history.reserve(static_cast<std::size_t>(schedule.iters) + 1);
  result.best_history.push_back(best);

  if (!movable.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, movable.size() - 1);
    double t = schedule.t0;
    for (int k = 0; k < schedule.iters; ++k, t *= schedule.gamma) {
      const std::size_t i = movable[pick(rng)];
      GroupMember& m = group.members[i];
      const CharacterPose old = m.pose;
      m.pose = propose_move(old, *m.space, schedule, rng, occupied_points(group, i));
      const double next = group_cost(group);
      if (metropolis_accept(cost, next, t, rng)) {
        cost = next;
        if (cost < best) {
          best = cost;
          for (std::size_t j = 0; j < group.members.size(); ++j) best_poses[j] = group.members[j].pose;
        }
      } else {
        m.pose = old;
      }
      result.best_history.push_back(best);
    }
  }

  for (std::size_t j = 0; j < group.members.size(); ++j) group.members[j].pose = best_poses[j];
  result.cost = best;
  result.group = std::move(group);
  return result;
}

std::uint64_t group_seed(std::uint64_t keyframe_seed, const std::string& group_id) {
  return derive_seed(keyframe_seed, "group:" + group_id);
}

KeyframePlacement optimize_keyframe(const Keyframe& keyframe, const Scene& scene, const AnnealSchedule& schedule,
                                    const std::map<std::string, CharacterPose>& fixed, std::uint64_t rng_seed,
                                    const PlacementOptions& options) {
  schedule.validate();
  std::vector<std::vector<InteractionConstraintSpec>> specs;
  for (const auto& d : keyframe.descriptions) {
    specs.push_back(compile_constraints(d, scene, options.verbs, options.resolver));
  }
  auto groups = build_groups(keyframe, specs, scene, fixed);

  KeyframePlacement out;
  out.keyframe = keyframe.index;
  if (options.parallel && groups.size() > 1) {
    std::vector<std::future<GroupResult>> jobs;
    for (auto& g : groups) {
      const auto seed = group_seed(rng_seed, g.id);
      jobs.push_back(std::async(std::launch::async, optimize_group, std::move(g), schedule, seed));
    }
    for (auto& j : jobs) out.groups.push_back(j.get());
  } else {
    for (auto& g : groups) {
      const auto seed = group_seed(rng_seed, g.id);
      out.groups.push_back(optimize_group(std::move(g), schedule, seed));
    }
  }

  for (const auto& r : out.groups) {
    for (const auto& m : r.group.members) {
      out.poses[m.desc.subject] = m.pose;
      out.group_costs[m.desc.subject] = r.cost;
    }
  }
  return out;
}

json pose_to_json(const CharacterPose& p) {
  json j = {{"position", {p.position.x, p.position.y, p.position.z}},
            {"body_yaw", p.body_yaw},
            {"head_yaw", p.head_yaw},
            {"fundamental", std::string(to_string(p.fundamental))}};
  if (p.sitting_point_index) j["sitting_point_index"] = *p.sitting_point_index;
  return j;
}

CharacterPose pose_from_json(const json& j) {
  CharacterPose p;
  try {
    const auto& pos = j.at("position");
    p.position = {pos.at(0).get<double>(), pos.at(1).get<double>(), pos.size() > 2 ? pos.at(2).get<double>() : 0.0};
    p.body_yaw = j.value("body_yaw", 0.0);
    p.head_yaw = j.value("head_yaw", 0.0);
    const auto f = pose_from_string(j.value("fundamental", std::string("standing")));
    if (!f) throw PlacementError("unknown fundamental pose");
    p.fundamental = *f;
    if (j.contains("sitting_point_index") && !j.at("sitting_point_index").is_null()) {
      p.sitting_point_index = j.at("sitting_point_index").get<int>();
    }
  } catch (const json::exception& e) {
    throw PlacementError(std::string("malformed pose JSON: ") + e.what());
  }
  if (std::abs(p.head_yaw) > kPi / 2.0) throw PlacementError("head_yaw outside [-pi/2, pi/2]");
  return p;
}

json placement_to_json(const KeyframePlacement& p) {
  json chars = json::object();
  for (const auto& [id, pose] : p.poses) {
    json j = pose_to_json(pose);
    j["final_group_cost"] = p.group_costs.at(id);
    chars[id] = j;
  }
  json groups = json::array();
  for (const auto& g : p.groups) {
    groups.push_back({{"id", g.id}, {"members", g.members}, {"seed", to_hex(g.seed)}, {"cost", g.cost}});
  }
  return {{"keyframe", p.keyframe}, {"characters", chars}, {"groups", groups}};
}

}  // namespace actsynth
