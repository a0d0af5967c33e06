#include <doctest.h>

#include "actsynth/activity.hpp"
#include "golden.hpp"
#include "test_util.hpp"

using namespace actsynth;
using namespace actsynth::test;

TEST_CASE("golden activity is valid against the apartment") {
  CHECK(validate_activity(golden_activity(), apartment()).empty());
  CHECK(validate_activity(golden_activity(), apartment(), 0).empty());
  CHECK(validate_activity(golden_activity(), apartment(), 1).size() == 1);
}

TEST_CASE("sitting on the tv is one affordance violation") {
  Activity a = golden_activity();
  a.keyframes[0].descriptions[0].reference = 10;
  const auto v = validate_activity(a, apartment());
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "affordance");
  CHECK(v[0].keyframe == 0);
  CHECK(v[0].character == "character_0");
}

TEST_CASE("missing character is one completeness violation") {
  Activity a = golden_activity();
  a.keyframes[1].descriptions.pop_back();
  const auto v = validate_activity(a, apartment());
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "completeness");
  CHECK(describe(v[0]).find("character_1") != std::string::npos);
}

TEST_CASE("other breaches") {
  const Scene s = apartment();
  Activity a = golden_activity();
  SUBCASE("self interaction") {
    a.keyframes[2].descriptions[0].interaction.target = CharacterTarget{"character_0"};
    CHECK(validate_activity(a, s).size() == 1);
  }
  SUBCASE("unknown object") {
    a.keyframes[1].descriptions[1].interaction.target = ObjectTarget{99};
    CHECK(validate_activity(a, s).size() == 1);
  }
  SUBCASE("non-contiguous keyframes") {
    a.keyframes[2].index = 3;
    CHECK_FALSE(validate_activity(a, s).empty());
  }
  SUBCASE("sitting without reference") {
    a.keyframes[0].descriptions[0].reference.reset();
    CHECK(validate_activity(a, s).size() == 1);
  }
  SUBCASE("standing without reference is allowed") {
    a.keyframes[1].descriptions[1].reference.reset();
    CHECK(validate_activity(a, s).empty());
  }
}

TEST_CASE("keyframe diffs") {
  const Activity a = golden_activity();
  for (const auto& c : diff_keyframes(a.keyframes[0], a.keyframes[0])) CHECK(c.kind == ChangeKind::unchanged);
  const auto d12 = diff_keyframes(a.keyframes[1], a.keyframes[2]);
  REQUIRE(d12.size() == 2);
  CHECK(d12[0].moved());
  CHECK(d12[1].moved());
  const auto d01 = diff_keyframes(a.keyframes[0], a.keyframes[1]);
  CHECK(d01[0].kind == ChangeKind::unchanged);
  CHECK(d01[1].kind == ChangeKind::moved);

  Keyframe k = a.keyframes[0];
  k.descriptions[0].interaction.verb = "watch";
  CHECK(diff_keyframes(a.keyframes[0], k)[0].kind == ChangeKind::reinteracted);
  k = a.keyframes[0];
  k.descriptions[0].pose = FundamentalPose::lying;
  CHECK(diff_keyframes(a.keyframes[0], k)[0].kind == ChangeKind::reposed);

  Keyframe missing = a.keyframes[0];
  missing.descriptions.pop_back();
  CHECK_THROWS_AS(diff_keyframes(a.keyframes[0], missing), ActivityError);
}

TEST_CASE("serialization round trip") {
  const Scene s = apartment();
  const Activity a = golden_activity();
  CHECK(activity_from_json(activity_to_json(a)) == a);
  CHECK(activity_from_json(activity_to_json(a, &s)) == a);
  CHECK(format_description(a.keyframes[0].descriptions[0], &s) == "(character_0, sitting, object_11-sofa, (read, newspaper))");
  CHECK(format_description(a.keyframes[0].descriptions[1], &s) == "(character_1, lying, object_5-bed, (sleep, none))");
  CHECK(parse_object_token("object_7-chair") == 7);
  CHECK(parse_object_token("object_7") == 7);
  CHECK_FALSE(parse_object_token("character_1"));
}
