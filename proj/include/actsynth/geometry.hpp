#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace actsynth {

constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec2 xy() const { return {x, y}; }
  bool operator==(const Vec3&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Unit vector at `angle` radians, counter-clockwise from +x.
inline Vec2 heading(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Maps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Segment2 {
  Vec2 a;
  Vec2 b;
  bool operator==(const Segment2&) const = default;
};

struct Rect2 {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(Vec2 p, double eps = 0.0) const {
    return p.x >= xmin - eps && p.x <= xmax + eps && p.y >= ymin - eps && p.y <= ymax + eps;
  }
  bool operator==(const Rect2&) const = default;
};

/// Endpoint contact and collinear overlap count as intersecting.
bool segments_intersect(const Segment2& a, const Segment2& b);

double point_segment_distance(Vec2 p, const Segment2& s);

/// Oriented rectangle on the floor plane. Local +x is the facing direction.
struct Footprint {
  Vec2 center;
  double yaw = 0.0;
  Vec2 half_extents;

  Vec2 to_local(Vec2 p) const { return rotate(p - center, -yaw); }
  Vec2 to_world(Vec2 local) const { return center + rotate(local, yaw); }
  std::array<Vec2, 4> corners() const;
  bool contains(Vec2 p, double eps = 0.0) const;
  /// Euclidean distance from p to the rectangle; zero inside.
  double distance_to(Vec2 p) const;
  Vec2 closest_point(Vec2 p) const;
  /// Same rectangle grown by `margin` on every side.
  Footprint inflated(double margin) const {
    return {center, yaw, {half_extents.x + margin, half_extents.y + margin}};
  }
  /// True iff the segment touches the rectangle (boundary included).
  bool intersects(const Segment2& s) const;
  bool operator==(const Footprint&) const = default;
};

/// Yaw-rotated 3D box; z is up.
struct Box3 {
  Vec3 center;
  double yaw = 0.0;
  Vec3 half_extents;

  std::array<Vec3, 8> corners() const;
  /// Does the segment from `from` to `to` pass through the box for a parameter in (t_lo, t_hi)?
  bool blocks_segment(const Vec3& from, const Vec3& to, double t_lo, double t_hi) const;
};

}  // namespace actsynth
