#include <doctest.h>

#include <random>

#include "actsynth/placement.hpp"
#include "golden.hpp"
#include "test_util.hpp"
#include "toy.hpp"

using namespace actsynth;
using namespace actsynth::test;

namespace {

using P = FundamentalPose;

Scene table_room() {
  Scene s;
  s.floor_bounds = {0, 0, 6, 6};
  s.objects = {box(0, "table", {3, 3, 0.375}, {0.5, 0.5, 0.375}, {Affordance::walk_obstacle, Affordance::support_surface}),
               box(1, "stool", {1, 1, 0.2}, {0.1, 0.1, 0.2}, {Affordance::sittable, Affordance::support_surface}),
               box(2, "sofa", {3, 5, 0.4}, {0.4, 1.0, 0.4},
                   {Affordance::sittable, Affordance::walk_obstacle, Affordance::support_surface}, -kPi / 2),
               box(3, "chair", {1, 4, 0.225}, {0.25, 0.25, 0.225},
                   {Affordance::sittable, Affordance::walk_obstacle, Affordance::support_surface}, kPi / 2)};
  return s;
}

std::vector<std::vector<InteractionConstraintSpec>> specs_for(const Keyframe& k, const Scene& s) {
  std::vector<std::vector<InteractionConstraintSpec>> out;
  for (const auto& d : k.descriptions) out.push_back(compile_constraints(d, s, VerbTable::builtin()));
  return out;
}

}  // namespace

TEST_CASE("positional cost") {
  CHECK(positional_cost(1.5, 0.5) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(positional_cost(2.0, 2.0) == 0.0);
  CHECK(positional_cost(1.0, 2.0) == 0.0);
  CHECK(positional_cost(Vec2{0, 0}, Vec2{3, 4}, 4.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK_THROWS(positional_cost(1.0, 0.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double d = u(rng) + 0.01;
    const double a = u(rng);
    const double b = a + u(rng) + 1e-3;
    const double ca = positional_cost(a, d);
    const double cb = positional_cost(b, d);
    CHECK((ca >= 0.0 && ca <= 1.0));
    CHECK((ca == 0.0) == (a <= d));
    if (a > d) CHECK(cb > ca);
  }
  CHECK(positional_cost(1e6, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("rotational cost") {
  CHECK(rotational_cost({1, 0}, {1, 0}) == 0.0);
  CHECK(rotational_cost({1, 0}, {-1, 0}) == 1.0);
  CHECK(rotational_cost({1, 0}, {0, 1}) == 0.5);
  CHECK_THROWS_AS(rotational_cost({0, 0}, {0, 1}), std::invalid_argument);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec2 x = heading(ang(rng));
    const Vec2 y = heading(ang(rng));
    const double c = rotational_cost(x, y);
    CHECK((c >= 0.0 && c <= 1.0));
    CHECK(c == doctest::Approx(rotational_cost(y, x)));
    CHECK(c == doctest::Approx(rotational_cost(x * scale(rng), y * scale(rng))));
  }
}

TEST_CASE("collision mapping") {
  CHECK(collision_cost(0.0) == 0.0);
  CHECK(collision_cost(0.6) > 0.9);
  CHECK(collision_cost(0.05) == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("standing ring membership matches a geometric oracle") {
  const Scene s = table_room();
  const FreeSpace fs = free_space_for(state("c", P::standing, 0, "use", ObjectTarget{0}), s);
  CHECK(fs.kind == FreeSpaceKind::standing_ring);
  CHECK(fs.ring_outer - fs.ring_inner == doctest::Approx(0.8));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.5, 4.5);
  int inside = 0;
  for (int i = 0; i < 5000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    // Axis-aligned 1 x 1 table centered at (3, 3): distance to the square by hand.
    const double dx = std::max(std::abs(p.x - 3.0) - 0.5, 0.0);
    const double dy = std::max(std::abs(p.y - 3.0) - 0.5, 0.0);
    const double d = std::hypot(dx, dy);
    const bool expect = d > 0.0 && d <= 0.8;
    CHECK(fs.contains(p) == expect);
    inside += expect;
  }
  CHECK(inside > 0);
}

TEST_CASE("free space errors and lying surface") {
  const Scene a = apartment();
  CHECK_THROWS_AS(free_space_for(state("c", P::sitting, 10, "watch", NoTarget{}), a), PlacementError);
  CHECK_THROWS_AS(free_space_for(state("c", P::lying, 6, "sleep", NoTarget{}), a), PlacementError);
  const FreeSpace bed = free_space_for(state("c", P::lying, 5, "sleep", NoTarget{}), a);
  CHECK(bed.kind == FreeSpaceKind::lying_surface);
  CHECK(bed.surface == footprint_of(a.at(5)));
  CHECK(bed.surface_height == 0.5);

  // Walls flush with the reference cut off every ring point.
  Scene boxed = table_room();
  boxed.walls = {{{2.5, 2.5}, {3.5, 2.5}}, {{3.5, 2.5}, {3.5, 3.5}}, {{3.5, 3.5}, {2.5, 3.5}}, {{2.5, 3.5}, {2.5, 2.5}}};
  CHECK_THROWS_AS(free_space_for(state("c", P::standing, 0, "use", ObjectTarget{0}), boxed), PlacementError);
}

TEST_CASE("sitting points") {
  const Scene s = table_room();
  const auto chair = generate_sitting_points(s.at(3));
  CHECK(chair.size() >= 1);
  CHECK(chair.size() <= 4);
  for (const auto& p : chair) {
    CHECK(p.forward.x == doctest::Approx(s.at(3).facing().x).epsilon(1e-9));
    CHECK(p.forward.y == doctest::Approx(s.at(3).facing().y).epsilon(1e-9));
    CHECK(p.position.z == doctest::Approx(0.45));
  }

  const auto sofa = generate_sitting_points(s.at(2));
  // 2.0 x 0.8 seat: floor((2.0 - 0.3) / 0.3) + 1 by floor((0.8 - 0.3) / 0.3) + 1.
  const std::size_t expect = std::size_t(std::floor((2.0 - 0.3) / 0.3) + 1) * std::size_t(std::floor((0.8 - 0.3) / 0.3) + 1);
  CHECK(sofa.size() == expect);
  CHECK(sofa.size() >= 4);
  double min_gap = 1e9;
  for (std::size_t i = 0; i < sofa.size(); ++i)
    for (std::size_t j = i + 1; j < sofa.size(); ++j)
      min_gap = std::min(min_gap, distance(sofa[i].position.xy(), sofa[j].position.xy()));
  CHECK(min_gap == doctest::Approx(0.3));
  const Footprint f = footprint_of(s.at(2));
  for (const auto& p : sofa) {
    const Vec2 l = f.to_local(p.position.xy());
    CHECK(std::abs(l.x) <= 0.4 - 0.15 + 1e-9);
    CHECK(std::abs(l.y) <= 1.0 - 0.15 + 1e-9);
  }

  const auto stool = generate_sitting_points(s.at(1));
  REQUIRE(stool.size() == 1);
  CHECK(stool[0].position.xy() == Vec2{1, 1});
  CHECK(stool[0].forward.x == doctest::Approx(1.0));
}

TEST_CASE("group formation") {
  const Scene a = apartment();
  const Activity g = golden_activity();
  const auto talk = build_groups(g.keyframes[2], specs_for(g.keyframes[2], a), a);
  REQUIRE(talk.size() == 1);
  CHECK(talk[0].members.size() == 2);

  Keyframe sofa{0,
                {state("character_0", P::sitting, 11, "read", PropTarget{"book"}),
                 state("character_1", P::sitting, 11, "watch", ObjectTarget{10})}};
  CHECK(build_groups(sofa, specs_for(sofa, a), a).size() == 1);

  Keyframe three{0,
                 {state("character_0", P::standing, 0, "use", ObjectTarget{0}),
                  state("character_1", P::sitting, 6, "use", ObjectTarget{8}),
                  state("character_2", P::lying, 5, "sleep", NoTarget{})}};
  const auto singles = build_groups(three, specs_for(three, a), a);
  CHECK(singles.size() == 3);
  for (const auto& grp : singles) CHECK(grp.members.size() == 1);
}

TEST_CASE("group cost examples") {
  const Scene room = toy_room();
  ActivityGroup grp = toy_group(room);
  REQUIRE(cost_terms(grp).size() == 9);
  grp.members[0].pose.position = {1.5, 2, 0};
  grp.members[1].pose.position = {2.5, 2, 0};
  grp.members[0].pose.body_yaw = 0.0;
  grp.members[1].pose.body_yaw = kPi;
  CHECK(group_cost(grp) == doctest::Approx(0.0).epsilon(1e-12));

  grp.members[1].pose.position = grp.members[0].pose.position;
  const auto terms = cost_terms(grp);
  const auto pair = std::find_if(terms.begin(), terms.end(), [](const CostTerm& t) { return t.label.find('|') != std::string::npos; });
  REQUIRE(pair != terms.end());
  CHECK(pair->cost > 0.9);

  // Random poses agree with the independently written objective.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 500; ++i) {
    const Vec2 a{u(rng), u(rng)};
    const Vec2 b{u(rng), u(rng)};
    const double ya = ang(rng);
    const double yb = ang(rng);
    grp.members[0].pose.position = {a.x, a.y, 0};
    grp.members[1].pose.position = {b.x, b.y, 0};
    grp.members[0].pose.body_yaw = ya;
    grp.members[1].pose.body_yaw = yb;
    grp.members[0].pose.head_yaw = grp.members[1].pose.head_yaw = 0.0;
    const double ra = (1.0 - std::cos(std::atan2(b.y - a.y, b.x - a.x) - ya)) / 2.0;
    const double rb = (1.0 - std::cos(std::atan2(a.y - b.y, a.x - b.x) - yb)) / 2.0;
    CHECK(group_cost(grp) == doctest::Approx(toy_oracle_cost(a, b, ra, rb)).epsilon(1e-9));
  }
}

TEST_CASE("proposal moves") {
  const Scene a = apartment();
  AnnealSchedule sched;
  std::mt19937_64 rng(5);

  const FreeSpace bed = free_space_for(state("c", P::lying, 5, "sleep", NoTarget{}), a);
  CharacterPose lying{{1.5, 6.0, 0.5}, 0.0, 0.0, P::lying, std::nullopt};
  for (int i = 0; i < 300; ++i) {
    const CharacterPose next = propose_move(lying, bed, sched, rng);
    CHECK(next.head_yaw == 0.0);
    CHECK(bed.contains(next));
  }

  SceneObject stool = table_room().at(1);
  Scene one = table_room();
  const FreeSpace seat = free_space_for(state("c", P::sitting, 1, "read", PropTarget{"book"}), one);
  REQUIRE(seat.sitting_points.size() == 1);
  CharacterPose sit{seat.sitting_points[0].position, 0.0, 0.0, P::sitting, 0};
  for (int i = 0; i < 300; ++i) {
    const CharacterPose next = propose_move(sit, seat, sched, rng);
    CHECK(next.position == sit.position);
    CHECK(next.sitting_point_index == 0);
    CHECK(std::abs(next.head_yaw) <= kPi / 2);
  }

  const FreeSpace ring = free_space_for(state("c", P::standing, 0, "use", ObjectTarget{0}), table_room());
  CharacterPose stand{{3, 2.2, 0}, 0.0, 0.0, P::standing, std::nullopt};
  std::mt19937_64 r1(77), r2(77);
  for (int i = 0; i < 50; ++i) {
    const CharacterPose x = propose_move(stand, ring, sched, r1);
    CHECK(x == propose_move(stand, ring, sched, r2));
    CHECK(ring.contains(x));
    stand = x;
  }

  const FreeSpace sofa = free_space_for(state("c", P::sitting, 11, "read", PropTarget{"book"}), a);
  std::set<int> occupied;
  for (std::size_t i = 1; i < sofa.sitting_points.size(); ++i) occupied.insert(int(i));
  CharacterPose s0{sofa.sitting_points[0].position, 0.0, 0.0, P::sitting, 0};
  for (int i = 0; i < 100; ++i) CHECK(propose_move(s0, sofa, sched, rng, occupied).sitting_point_index == 0);
}

TEST_CASE("metropolis acceptance") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    CHECK(metropolis_accept(1.0, 0.5, 0.1, rng));
    CHECK(metropolis_accept(1.0, 1.0, 0.1, rng));
  }
  int acc = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) acc += metropolis_accept(1.0, 2.0, 1.0, rng);
  const double p = std::exp(-1.0);
  CHECK(std::abs(double(acc) / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
  acc = 0;
  for (int i = 0; i < n; ++i) acc += metropolis_accept(0.0, 1.0, 1e-3, rng);
  CHECK(acc == 0);
  CHECK_THROWS(metropolis_accept(0.0, 1.0, 0.0, rng));
}

TEST_CASE("schedule validation and json") {
  AnnealSchedule s;
  CHECK_NOTHROW(s.validate());
  CHECK(AnnealSchedule::from_json(s.to_json()).to_json() == s.to_json());
  s.gamma = 1.0;
  CHECK_THROWS(s.validate());
  s = {};
  s.t0 = 0.0;
  CHECK_THROWS(s.validate());
}

TEST_CASE("single character near the lamp reaches zero cost") {
  const Scene a = apartment();
  Keyframe k{0, {state("character_0", P::standing, 9, "stand", NoTarget{})}};
  const auto r = optimize_keyframe(k, a, AnnealSchedule{}, {}, 1);
  CHECK(r.groups.at(0).cost == 0.0);
}

TEST_CASE("talking toy converges") {
  const Scene room = toy_room();
  GroupResult r = optimize_group(toy_group(room), AnnealSchedule{}, 12);
  CHECK(r.cost < 0.05);
  for (std::size_t i = 1; i < r.best_history.size(); ++i) CHECK(r.best_history[i] <= r.best_history[i - 1]);
  CHECK(r.best_history.size() == std::size_t(AnnealSchedule{}.iters) + 1);
  const auto& m0 = r.group.members[0];
  const auto& m1 = r.group.members[1];
  const Vec2 ab = m1.pose.position.xy() - m0.pose.position.xy();
  CHECK(norm(ab) <= 2.0);
  const double fifteen = 15.0 * kPi / 180.0;
  CHECK(std::acos(std::clamp(dot(gaze_direction(m0.pose, &*m0.space), ab) / norm(ab), -1.0, 1.0)) <= fifteen);
  CHECK(std::acos(std::clamp(dot(gaze_direction(m1.pose, &*m1.space), ab * -1.0) / norm(ab), -1.0, 1.0)) <= fifteen);
  CHECK(r.cost == doctest::Approx(group_cost(r.group)));
}

TEST_CASE("keyframe optimization is deterministic, order independent and in free space") {
  const Scene a = apartment();
  const Keyframe k{0,
                   {state("character_0", P::standing, 0, "get water", ObjectTarget{0}),
                    state("character_1", P::sitting, 6, "talk to", CharacterTarget{"character_2"}),
                    state("character_2", P::sitting, 7, "talk to", CharacterTarget{"character_1"}),
                    state("character_3", P::lying, 5, "sleep", NoTarget{})}};
  PlacementOptions seq;
  seq.parallel = false;
  const auto p1 = optimize_keyframe(k, a, AnnealSchedule{}, {}, 99);
  const auto p2 = optimize_keyframe(k, a, AnnealSchedule{}, {}, 99, seq);
  CHECK(placement_to_json(p1) == placement_to_json(p2));
  CHECK(p1.groups.size() == 3);
  for (const auto& d : k.descriptions) {
    const FreeSpace fs = free_space_for(d, a);
    CHECK(fs.contains(p1.poses.at(d.subject)));
  }
  // Each group on its own with its own seed gives the same result.
  for (const auto& grp : p1.groups) {
    Keyframe sub{0, {}};
    for (const auto& d : k.descriptions)
      if (std::count(grp.members.begin(), grp.members.end(), d.subject)) sub.descriptions.push_back(d);
    const auto alone = optimize_keyframe(sub, a, AnnealSchedule{}, {}, 99);
    for (const auto& id : grp.members) CHECK(alone.poses.at(id) == p1.poses.at(id));
  }
  for (const auto& [id, pose] : p1.poses) CHECK(pose_from_json(pose_to_json(pose)) == pose);
}

TEST_CASE("fixed user on the sofa and a co-seated character") {
  const Scene a = apartment();
  const auto points = generate_sitting_points(a.at(11));
  CharacterPose user{points[4].position, 0.0, 0.0, P::sitting, 4};
  const Keyframe k{0,
                   {state("character_0", P::sitting, 11, "talk to", CharacterTarget{"character_u"}),
                    state("character_u", P::sitting, 11, "talk to", CharacterTarget{"character_0"})}};
  const auto r = optimize_keyframe(k, a, AnnealSchedule{}, {{"character_u", user}}, 3);
  CHECK(r.poses.at("character_u") == user);
  const CharacterPose& c0 = r.poses.at("character_0");
  REQUIRE(c0.sitting_point_index);
  CHECK(*c0.sitting_point_index != 4);
  CHECK(distance(c0.position.xy(), user.position.xy()) >= 2 * kCapsuleRadius);
}
