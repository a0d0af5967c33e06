#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "actsynth/scene.hpp"

namespace actsynth {

struct CameraView {
  Vec3 position;
  double yaw = 0.0;
  double pitch = 0.0;
  double fov_h = kPi / 2.0;
  double image_aspect = 4.0 / 3.0;  // width / height

  Vec3 forward() const;
  bool operator==(const CameraView&) const = default;
};

/// Geometric stand-in for a Set-of-Mark label on a rendered view.
struct Mark {
  int object_id = 0;
  double area_fraction = 0.0;
  double distance = 0.0;
  double out_of_view_fraction = 0.0;
  double occluded_fraction = 0.0;
};

struct FilterConfig {
  double min_area_fraction = 0.04;
  double max_distance = 10.0;
  double max_out_of_view = 0.20;
  double max_occluded = 0.5;
};

struct ViewObservation {
  std::size_t candidate_index = 0;
  CameraView view;
  std::vector<int> surviving_marks;  // ascending object ids

  bool operator==(const ViewObservation&) const = default;
};

struct ViewSamplingConfig {
  double eye_height = 1.6;
  double pitch = -0.2;
  double fov_h = kPi / 2.0;
  double image_aspect = 4.0 / 3.0;
  /// Minimum distance from object footprints and walls for a camera position.
  double clearance = 0.2;
  FilterConfig filter;
};

class ViewPlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by greedy_cover; carries the object ids no candidate sees.
class UncoverableError : public ViewPlanningError {
 public:
  explicit UncoverableError(std::vector<int> missing);
  const std::vector<int>& missing() const { return missing_; }

 private:
  std::vector<int> missing_;
};

/// One mark per object whose center lies in front of the camera.
std::vector<Mark> project_marks(const Scene& scene, const CameraView& view);

std::vector<int> filter_marks(const std::vector<Mark>& marks, const FilterConfig& cfg = {});

std::vector<ViewObservation> sample_candidate_views(const Scene& scene, std::size_t n, std::uint64_t rng_seed,
                                                    const ViewSamplingConfig& cfg = {});

/// Greedy set cover; ties go to the earlier candidate.
std::vector<ViewObservation> greedy_cover(const std::vector<ViewObservation>& candidates,
                                          const std::set<int>& universe);

struct ConnectivityResult {
  std::vector<ViewObservation> views;
  /// Components (candidate indices) still disconnected; empty or a single entry when connected.
  std::vector<std::vector<std::size_t>> components;

  bool connected() const { return components.size() <= 1; }
};

/// Adds bridging candidates until the shared-mark view graph is connected or no
/// bridge exists.
ConnectivityResult augment_connectivity(const std::vector<ViewObservation>& cover,
                                        const std::vector<ViewObservation>& candidates);

bool views_adjacent(const ViewObservation& a, const ViewObservation& b);
/// Index pairs (into `views`) sharing at least one mark.
std::vector<std::pair<std::size_t, std::size_t>> view_adjacency(const std::vector<ViewObservation>& views);
/// Connected components of the view graph, as positions into `views`.
std::vector<std::vector<std::size_t>> view_components(const std::vector<ViewObservation>& views);

struct ViewPlan {
  std::size_t candidate_count = 0;
  std::vector<ViewObservation> selected;
  std::vector<std::pair<std::size_t, std::size_t>> adjacency;
  std::vector<std::vector<std::size_t>> residual_components;
};

/// sample -> cover all scene objects -> connect.
ViewPlan plan_views(const Scene& scene, std::size_t candidates, std::uint64_t rng_seed,
                    const ViewSamplingConfig& cfg = {});

nlohmann::json view_to_json(const ViewObservation& v);
nlohmann::json view_plan_to_json(const ViewPlan& plan);

}  // namespace actsynth
