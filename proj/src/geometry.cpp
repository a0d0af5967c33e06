#include "actsynth/geometry.hpp"

#include <algorithm>
#include <limits>

namespace actsynth {

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(const Segment2& s, const Segment2& t) {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

double point_segment_distance(Vec2 p, const Segment2& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + d * t);
}

std::array<Vec2, 4> Footprint::corners() const {
  const Vec2 h = half_extents;
  return {to_world({h.x, h.y}), to_world({-h.x, h.y}), to_world({-h.x, -h.y}), to_world({h.x, -h.y})};
}

bool Footprint::contains(Vec2 p, double eps) const {
  const Vec2 l = to_local(p);
  return std::abs(l.x) <= half_extents.x + eps && std::abs(l.y) <= half_extents.y + eps;
}

Vec2 Footprint::closest_point(Vec2 p) const {
  const Vec2 l = to_local(p);
  return to_world({std::clamp(l.x, -half_extents.x, half_extents.x),
                   std::clamp(l.y, -half_extents.y, half_extents.y)});
}

double Footprint::distance_to(Vec2 p) const {
  const Vec2 l = to_local(p);
  const double dx = std::max(std::abs(l.x) - half_extents.x, 0.0);
  const double dy = std::max(std::abs(l.y) - half_extents.y, 0.0);
  return std::hypot(dx, dy);
}

bool Footprint::intersects(const Segment2& s) const {
  if (contains(s.a) || contains(s.b)) return true;
  const auto c = corners();
  for (std::size_t i = 0; i < 4; ++i) {
    if (segments_intersect(s, {c[i], c[(i + 1) % 4]})) return true;
  }
  return false;
}

std::array<Vec3, 8> Box3::corners() const {
  std::array<Vec3, 8> out{};
  std::size_t k = 0;
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) {
        const Vec2 w = rotate({sx * half_extents.x, sy * half_extents.y}, yaw);
        out[k++] = {center.x + w.x, center.y + w.y, center.z + sz * half_extents.z};
      }
    }
  }
  return out;
}

bool Box3::blocks_segment(const Vec3& from, const Vec3& to, double t_lo, double t_hi) const {
  // Slab test in the box frame.
  const Vec2 o2 = rotate(from.xy() - center.xy(), -yaw);
  const Vec2 d2 = rotate(to.xy() - from.xy(), -yaw);
  const std::array<double, 3> origin{o2.x, o2.y, from.z - center.z};
  const std::array<double, 3> dir{d2.x, d2.y, to.z - from.z};
  const std::array<double, 3> half{half_extents.x, half_extents.y, half_extents.z};
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 3; ++i) {
    if (dir[i] == 0.0) {
      if (std::abs(origin[i]) > half[i]) return false;
      continue;
    }
    double t1 = (-half[i] - origin[i]) / dir[i];
    double t2 = (half[i] - origin[i]) / dir[i];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return false;
  }
  return tmax > t_lo && tmin < t_hi;
}

}  // namespace actsynth
