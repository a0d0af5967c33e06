#include "actsynth/topdown.hpp"

#include <iomanip>
#include <sstream>

namespace actsynth {

namespace {

constexpr double kScale = 60.0;  // px per meter
constexpr double kMargin = 20.0;

class Canvas {
 public:
  explicit Canvas(const Rect2& bounds) : b_(bounds) {
    os_ << std::fixed << std::setprecision(2);
    const double w = b_.width() * kScale + 2 * kMargin;
    const double h = b_.height() * kScale + 2 * kMargin;
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
        << w << " " << h << "\">\n";
    os_ << "<rect class=\"floor\" x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << b_.width() * kScale
        << "\" height=\"" << b_.height() * kScale << "\" fill=\"#f7f5f0\" stroke=\"#999\"/>\n";
  }

  double x(double wx) const { return kMargin + (wx - b_.xmin) * kScale; }
  double y(double wy) const { return kMargin + (b_.ymax - wy) * kScale; }
  std::string pt(Vec2 p) const {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << x(p.x) << "," << y(p.y);
    return s.str();
  }

  std::ostringstream& out() { return os_; }

  void line(Vec2 a, Vec2 b, const std::string& cls, const std::string& style) {
    os_ << "<line class=\"" << cls << "\" x1=\"" << x(a.x) << "\" y1=\"" << y(a.y) << "\" x2=\"" << x(b.x)
        << "\" y2=\"" << y(b.y) << "\" " << style << "/>\n";
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  Rect2 b_;
  std::ostringstream os_;
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

void draw_scene(Canvas& c, const Scene& scene) {
  for (const auto& w : scene.walls) c.line(w.a, w.b, "wall", "stroke=\"#333\" stroke-width=\"4\"");
  for (const auto& o : scene.objects) {
    const Footprint f = footprint_of(o);
    auto& os = c.out();
    os << "<g class=\"object\" data-id=\"" << o.id << "\"><polygon points=\"";
    const auto corners = f.corners();
    for (std::size_t i = 0; i < corners.size(); ++i) os << (i ? " " : "") << c.pt(corners[i]);
    os << "\" fill=\"#d8cfc0\" stroke=\"#7a6a55\"/><text x=\"" << c.x(f.center.x) << "\" y=\"" << c.y(f.center.y)
       << "\" font-size=\"10\" text-anchor=\"middle\">" << escape(o.mark_name()) << "</text></g>\n";
  }
}

}  // namespace

std::string export_topdown(const RunResult& result, int keyframe) {
  const Keyframe* kf = result.activity.keyframe(keyframe);
  if (!kf) throw std::out_of_range("keyframe " + std::to_string(keyframe) + " is not part of the activity");

  Canvas c(result.scene.floor_bounds);
  draw_scene(c, result.scene);

  for (const auto& t : result.trajectories) {
    if (t.to_keyframe != keyframe) continue;
    auto& os = c.out();
    os << "<polyline class=\"trajectory\" data-character=\"" << escape(t.character) << "\" points=\"";
    for (std::size_t i = 0; i < t.waypoints.size(); ++i) os << (i ? " " : "") << c.pt(t.waypoints[i]);
    os << "\" fill=\"none\" stroke=\"#2b7bb9\" stroke-dasharray=\"4 3\"/>\n";
  }

  if (const KeyframePlacement* p = result.placement(keyframe)) {
    for (const auto& [id, pose] : p->poses) {
      const Description* d = kf->find(id);
      std::optional<FreeSpace> fs;
      if (d) {
        try {
          fs = free_space_for(*d, result.scene);
        } catch (const PlacementError&) {
        }
      }
      const double frame = fs ? fs->frame_yaw(pose) : 0.0;
      const Vec2 at = pose.position.xy();
      const Vec2 body = at + heading(frame + pose.body_yaw) * 0.45;
      const Vec2 head = at + heading(frame + pose.body_yaw + pose.head_yaw) * 0.3;
      const bool user = result.fixed.poses.count(id) > 0;
      auto& os = c.out();
      os << "<g class=\"character" << (user ? " user" : "") << "\" data-id=\"" << escape(id) << "\">";
      os << "<circle cx=\"" << c.x(at.x) << "\" cy=\"" << c.y(at.y) << "\" r=\"" << kCapsuleRadius * kScale
         << "\" fill=\"" << (user ? "#e9a23b" : "#6cb06c") << "\" fill-opacity=\"0.6\" stroke=\"#222\"/>";
      os << "<line class=\"body\" x1=\"" << c.x(at.x) << "\" y1=\"" << c.y(at.y) << "\" x2=\"" << c.x(body.x)
         << "\" y2=\"" << c.y(body.y) << "\" stroke=\"#222\" stroke-width=\"2\"/>";
      os << "<line class=\"head\" x1=\"" << c.x(at.x) << "\" y1=\"" << c.y(at.y) << "\" x2=\"" << c.x(head.x)
         << "\" y2=\"" << c.y(head.y) << "\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>";
      os << "<text x=\"" << c.x(at.x) << "\" y=\"" << c.y(at.y) - kCapsuleRadius * kScale - 3
         << "\" font-size=\"10\" text-anchor=\"middle\">" << escape(id) << "</text></g>\n";
    }
  }
  return c.finish();
}

std::string export_views_svg(const Scene& scene, const ViewPlan& plan) {
  Canvas c(scene.floor_bounds);
  draw_scene(c, scene);
  for (const auto& v : plan.selected) {
    const Vec2 at = v.view.position.xy();
    const double half = v.view.fov_h / 2.0;
    c.line(at, at + heading(v.view.yaw - half) * 1.5, "frustum", "stroke=\"#8e44ad\"");
    c.line(at, at + heading(v.view.yaw + half) * 1.5, "frustum", "stroke=\"#8e44ad\"");
    for (int id : v.surviving_marks) {
      if (const auto* o = scene.find(id)) {
        c.line(at, o->position.xy(), "mark", "stroke=\"#8e44ad\" stroke-opacity=\"0.3\"");
      }
    }
    c.out() << "<circle class=\"camera\" data-candidate=\"" << v.candidate_index << "\" cx=\"" << c.x(at.x)
            << "\" cy=\"" << c.y(at.y) << "\" r=\"5\" fill=\"#8e44ad\"/>\n";
  }
  return c.finish();
}

}  // namespace actsynth
