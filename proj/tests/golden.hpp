#pragma once

#include "actsynth/activity.hpp"

namespace actsynth::test {

inline Description state(std::string subject, FundamentalPose pose, std::optional<int> ref, std::string verb,
                         InteractionTarget target) {
  return {std::move(subject), pose, ref, {std::move(verb), std::move(target)}};
}

// Hand-transcribed from the few-shot sample the golden replies reproduce.
inline Activity golden_activity() {
  using P = FundamentalPose;
  const auto c0_sofa = state("character_0", P::sitting, 11, "read", PropTarget{"newspaper"});
  Activity a;
  a.characters = {{"character_0", "Husband"}, {"character_1", "Wife"}};
  a.keyframes = {
      {0, {c0_sofa, state("character_1", P::lying, 5, "sleep", NoTarget{})}},
      {1, {c0_sofa, state("character_1", P::standing, 0, "get water", ObjectTarget{0})}},
      {2,
       {state("character_0", P::sitting, 6, "talk to", CharacterTarget{"character_1"}),
        state("character_1", P::sitting, 7, "talk to", CharacterTarget{"character_0"})}},
  };
  return a;
}

}  // namespace actsynth::test
