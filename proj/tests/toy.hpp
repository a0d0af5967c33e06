#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "actsynth/placement.hpp"
#include "golden.hpp"

namespace actsynth::test {

// Two characters standing in an empty 4 x 4 m room, talking to each other.
inline Scene toy_room() {
  Scene s;
  s.floor_bounds = {0, 0, 4, 4};
  s.walls = {{{0, 0}, {4, 0}}, {{4, 0}, {4, 4}}, {{4, 4}, {0, 4}}, {{0, 4}, {0, 0}}};
  return s;
}

inline Keyframe toy_keyframe() {
  return {0,
          {state("character_0", FundamentalPose::standing, std::nullopt, "talk to", CharacterTarget{"character_1"}),
           state("character_1", FundamentalPose::standing, std::nullopt, "talk to", CharacterTarget{"character_0"})}};
}

inline ActivityGroup toy_group(const Scene& scene) {
  const Keyframe k = toy_keyframe();
  std::vector<std::vector<InteractionConstraintSpec>> specs;
  for (const auto& d : k.descriptions) specs.push_back(compile_constraints(d, scene, VerbTable::builtin()));
  return build_groups(k, specs, scene).at(0);
}

// Best cost over a 5 degree yaw grid for a character looking along direction `phi`.
inline double best_grid_facing(double phi) {
  const double step = 5.0 * kPi / 180.0;
  const double delta = std::remainder(phi, step);
  return (1.0 - std::cos(delta)) / 2.0;
}

inline double wall_depth(Vec2 p) {
  return std::max(0.0, 0.3 - p.x) + std::max(0.0, 0.3 - (4.0 - p.x)) + std::max(0.0, 0.3 - p.y) +
         std::max(0.0, 0.3 - (4.0 - p.y));
}

// Written from the cost definitions: one positional max(1 - e^(D - d), 0) per
// description with D = 2, two facing terms (1 - cos)/2, two zero reference terms,
// two static collision terms and one pair collision term, each collision
// 1 - e^(-depth / 0.05); mean of 9.
inline double toy_oracle_cost(Vec2 a, Vec2 b, double yaw_cost_a, double yaw_cost_b) {
  const double d = std::hypot(a.x - b.x, a.y - b.y);
  const double pos = std::max(1.0 - std::exp(2.0 - d), 0.0);
  const auto coll = [](double depth) { return 1.0 - std::exp(-depth / 0.05); };
  const double sum = 2.0 * pos + yaw_cost_a + yaw_cost_b + coll(wall_depth(a)) + coll(wall_depth(b)) +
                     coll(std::max(0.0, 0.6 - d));
  return sum / 9.0;
}

// Dense search: both positions on a 0.1 m lattice, yaw on a 5 degree lattice.
inline double toy_grid_search() {
  double best = std::numeric_limits<double>::infinity();
  for (int ai = 0; ai <= 40; ++ai)
    for (int aj = 0; aj <= 40; ++aj)
      for (int bi = 0; bi <= 40; ++bi)
        for (int bj = 0; bj <= 40; ++bj) {
          if (ai == bi && aj == bj) continue;
          const Vec2 a{ai * 0.1, aj * 0.1};
          const Vec2 b{bi * 0.1, bj * 0.1};
          const double phi = std::atan2(b.y - a.y, b.x - a.x);
          const double c = toy_oracle_cost(a, b, best_grid_facing(phi), best_grid_facing(phi + kPi));
          best = std::min(best, c);
        }
  return best;
}

}  // namespace actsynth::test
