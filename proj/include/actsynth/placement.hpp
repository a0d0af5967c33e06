#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsynth/activity.hpp"
#include "actsynth/constraints.hpp"

namespace actsynth {

constexpr double kStandingRingWidth = 0.8;
constexpr double kCapsuleRadius = 0.3;
constexpr double kCollisionDepthScale = 0.05;
constexpr double kSittingGridSpacing = 0.3;
constexpr double kSittingInset = 0.15;
constexpr int kTranslationRetries = 20;

/// body_yaw is relative to the pose frame (see FreeSpace::frame_yaw); head_yaw
/// is relative to the body and stays within [-pi/2, pi/2].
struct CharacterPose {
  Vec3 position;
  double body_yaw = 0.0;
  double head_yaw = 0.0;
  FundamentalPose fundamental = FundamentalPose::standing;
  std::optional<int> sitting_point_index;

  bool operator==(const CharacterPose&) const = default;
};

struct SittingPoint {
  Vec3 position;  // hip position
  Vec2 forward;   // unit
  bool operator==(const SittingPoint&) const = default;
};

enum class FreeSpaceKind { standing_ring, open_floor, sitting_points, lying_surface };

std::string_view to_string(FreeSpaceKind k);

struct FreeSpace {
  FreeSpaceKind kind = FreeSpaceKind::open_floor;
  std::optional<int> reference;
  Footprint reference_footprint;
  /// Ring bounds measured from the reference footprint boundary.
  double ring_inner = 0.0;
  double ring_outer = kStandingRingWidth;
  std::vector<SittingPoint> sitting_points;
  Footprint surface;  // lying
  double surface_height = 0.0;
  /// Static footprints a standing character may not stand inside.
  std::vector<Footprint> obstacles;
  std::vector<Segment2> walls;
  Rect2 bounds;

  /// Floor-plane membership for standing and lying; sitting uses point indices.
  bool contains(Vec2 p) const;
  bool contains(const CharacterPose& pose) const;
  /// World yaw that body_yaw is measured from.
  double frame_yaw(const CharacterPose& pose) const;
};

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws PlacementError when the reference lacks the affordance or the space is empty.
FreeSpace free_space_for(const Description& desc, const Scene& scene);

/// Seat grid at kSittingGridSpacing, inset kSittingInset; the backrest is the
/// local -x edge. Falls back to the seat center when no grid point fits.
std::vector<SittingPoint> generate_sitting_points(const SceneObject& obj);

/// max(1 - e^(D - d), 0) with d the floor-plane distance.
double positional_cost(Vec2 a, Vec2 b, double d_threshold);
double positional_cost(double dist, double d_threshold);
/// (1 - cos(x, y)) / 2. Throws std::invalid_argument for a zero vector.
double rotational_cost(Vec2 x, Vec2 y);
/// 1 - e^(-depth / kCollisionDepthScale).
double collision_cost(double depth);

struct AnnealSchedule {
  double t0 = 1.0;
  double gamma = 0.995;
  int iters = 1000;
  double sigma_translation = 0.2;
  double sigma_body = 15.0 * kPi / 180.0;
  double sigma_head = 15.0 * kPi / 180.0;

  void validate() const;
  nlohmann::json to_json() const;
  static AnnealSchedule from_json(const nlohmann::json& j);
};

struct GroupMember {
  Description desc;
  std::optional<FreeSpace> space;  // absent for fixed members
  CharacterPose pose;
  bool fixed = false;
};

struct ActivityGroup {
  std::string id;  // smallest member id
  std::vector<GroupMember> members;
  std::vector<InteractionConstraintSpec> specs;
  /// Fixed characters outside the group, treated as static capsules.
  std::vector<Vec2> external_capsules;
  const Scene* scene = nullptr;

  const GroupMember* member(const std::string& id) const;
};

/// Groups characters linked by a character-directed interaction or a shared
/// positional reference. `specs` is parallel to keyframe.descriptions.
std::vector<ActivityGroup> build_groups(const Keyframe& keyframe,
                                        const std::vector<std::vector<InteractionConstraintSpec>>& specs,
                                        const Scene& scene, const std::map<std::string, CharacterPose>& fixed = {});

struct CostTerm {
  std::string label;
  double cost = 0.0;
};

std::vector<CostTerm> cost_terms(const ActivityGroup& group);
/// Mean of cost_terms; 0 when the group has no terms.
double group_cost(const ActivityGroup& group);

/// Direction the character looks in, world frame.
Vec2 gaze_direction(const CharacterPose& pose, const FreeSpace* space);

/// `occupied` lists sitting-point indices held by others on the same seat.
CharacterPose propose_move(const CharacterPose& pose, const FreeSpace& fs, const AnnealSchedule& sigmas,
                           std::mt19937_64& rng, const std::set<int>& occupied = {});

bool metropolis_accept(double c_old, double c_new, double t, std::mt19937_64& rng);

struct GroupResult {
  std::string id;
  std::vector<std::string> members;
  std::uint64_t seed = 0;
  double cost = 0.0;
  /// Best cost after each iteration (index 0 is the initial state).
  std::vector<double> best_history;
  ActivityGroup group;  // holding the best poses
};

/// Initializes non-fixed members uniformly in their free space, then anneals.
GroupResult optimize_group(ActivityGroup group, const AnnealSchedule& schedule, std::uint64_t seed);

struct KeyframePlacement {
  int keyframe = 0;
  std::map<std::string, CharacterPose> poses;
  std::map<std::string, double> group_costs;  // per character
  std::vector<GroupResult> groups;
};

struct PlacementOptions {
  VerbTable verbs = VerbTable::builtin();
  VerbResolver resolver;
  bool parallel = true;
};

KeyframePlacement optimize_keyframe(const Keyframe& keyframe, const Scene& scene, const AnnealSchedule& schedule,
                                    const std::map<std::string, CharacterPose>& fixed, std::uint64_t rng_seed,
                                    const PlacementOptions& options = {});

/// Per-group seed derived from the keyframe seed and the group id.
std::uint64_t group_seed(std::uint64_t keyframe_seed, const std::string& group_id);

nlohmann::json pose_to_json(const CharacterPose& p);
CharacterPose pose_from_json(const nlohmann::json& j);
nlohmann::json placement_to_json(const KeyframePlacement& p);

}  // namespace actsynth
