#include <gtest/gtest.h>

#include "bpt/concrete_scenario.hpp"
#include "bpt/error.hpp"
#include "bpt/scenario_lang.hpp"
#include "bpt/scenario_library.hpp"
#include "support/test_support.hpp"

namespace bpt {
namespace {

constexpr const char* kMinimal = R"(map straight(n_lanes = 1, length = 100, lane_width = 3.5)
ego car on "lane0" offset = 10 speed = 5
behavior car FollowLane(target_speed = 5)
predict car at 20
)";

// Position of the diagnostic for `src`, or {0, 0} if it parses.
std::pair<std::size_t, std::size_t> error_at(const std::string& src) {
  try {
    parse(src);
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  return {0, 0};
}

std::string error_message(const std::string& src) {
  try {
    parse(src);
  } catch (const ParseError& e) {
    return e.message();
  }
  return "";
}

TEST(Parse, MinimalProgramHasNoFeatures) {
  const ScenarioProgram p = parse(kMinimal);
  EXPECT_TRUE(p.features().empty());
  EXPECT_EQ(p.agents.size(), 1u);
  EXPECT_TRUE(p.agents[0].is_ego);
  EXPECT_EQ(p.predict.target, "car");
}

TEST(Parse, RangeParamBecomesFeature) {
  const ScenarioProgram p = parse(std::string("param s = Range(2, 6)\n") + kMinimal);
  ASSERT_EQ(p.features().size(), 1u);
  EXPECT_EQ(p.features()[0].name, "s");
  EXPECT_EQ(p.features()[0].interval_length(), 4.0);
}

TEST(Parse, ReversedRangeIsRejected) {
  EXPECT_EQ(error_message(std::string("param s = Range(6, 2)\n") + kMinimal),
            "Range requires lo < hi");
  EXPECT_EQ(error_at(std::string("param s = Range(6, 2)\n") + kMinimal).first, 1u);
}

TEST(Parse, DiagnosticsCarryLineAndColumn) {
  // Third line; the unknown lane string starts at column 12.
  const std::string bad = R"(map straight(n_lanes = 1, length = 100, lane_width = 3.5)
param s = Range(2, 6)
ego car on "lane7" offset = 10 speed = s
behavior car FollowLane(target_speed = 5)
predict car at 20
)";
  EXPECT_EQ(error_at(bad), (std::pair<std::size_t, std::size_t>{3, 12}));
}

TEST(Parse, ErrorClasses) {
  const std::string map = "map straight(n_lanes = 1, length = 100, lane_width = 3.5)\n";
  const std::string ego = "ego car on \"lane0\" offset = 10 speed = 5\n";
  const std::string beh = "behavior car FollowLane(target_speed = 5)\n";
  const std::string pred = "predict car at 20\n";
  // lexical
  EXPECT_EQ(error_at(map + ego + beh + pred + "@\n").first, 5u);
  EXPECT_EQ(error_at(map + ego + beh + pred + "$x\n").first, 5u);
  // syntax
  EXPECT_NE(error_message(map + "ego car on \"lane0\" offset 10 speed = 5\n" + beh + pred).find("syntax error"),
            std::string::npos);
  // unknown identifier
  EXPECT_NE(error_message(map + "ego car on \"lane0\" offset = q speed = 5\n" + beh + pred)
                .find("unknown identifier"),
            std::string::npos);
  // type mismatch
  EXPECT_NE(error_message(map + "ego car on \"lane0\" offset = left speed = 5\n" + beh + pred)
                .find("type mismatch"),
            std::string::npos);
  // duplicate feature
  EXPECT_NE(error_message("param a = Range(1, 2)\nparam a = Range(1, 2)\n" + map + ego + beh + pred)
                .find("duplicate feature"),
            std::string::npos);
  // missing ego / predict
  EXPECT_NE(error_message(map + "agent car on \"lane0\" offset = 10 speed = 5\n" + beh + pred)
                .find("missing ego"),
            std::string::npos);
  EXPECT_NE(error_message(map + ego + beh).find("missing predict"), std::string::npos);
  // timepoint below the history length
  EXPECT_NE(error_message(map + ego + beh + "predict car at 19\n").find(">= 20"), std::string::npos);
  EXPECT_NE(error_message(map + ego + beh + "predict car at Range(20, 40)\n").find("timepoint"),
            std::string::npos);
}

TEST(Parse, StringsMustBeUtf8) {
  const std::string rest = "map straight(n_lanes = 1, length = 100, lane_width = 3.5)\n"
                           "ego car on \"lane0\" offset = 10 speed = 5\n"
                           "behavior car FollowLane(target_speed = 5)\npredict car at 20\n";
  EXPECT_EQ(error_at("scenario \"caf\xC3\xA9\"\n" + rest), (std::pair<std::size_t, std::size_t>{0, 0}));
  EXPECT_EQ(error_at("scenario \"y\xA2" "eld\"\n" + rest), (std::pair<std::size_t, std::size_t>{1, 10}));
  // Overlong encoding of '/' and a lone surrogate.
  EXPECT_EQ(error_at("scenario \"\xC0\xAF\"\n" + rest).first, 1u);
  EXPECT_EQ(error_at("scenario \"\xED\xA0\x80\"\n" + rest).first, 1u);
  EXPECT_EQ(error_at("scenario \"\xE2\x82\"\n" + rest).first, 1u);
}

TEST(Parse, MapSizesAreBounded) {
  const std::string rest = "ego car on \"lane0\" offset = 10 speed = 5\n"
                           "behavior car FollowLane(target_speed = 5)\npredict car at 20\n";
  EXPECT_NE(error_message("map straight(n_lanes = 65, length = 100, lane_width = 3.5)\n" + rest).find("exceeds"),
            std::string::npos);
  EXPECT_NE(error_message("map straight(n_lanes = 1, length = 20000, lane_width = 3.5)\n" + rest).find("exceeds"),
            std::string::npos);
  EXPECT_NE(error_message("map straight(n_lanes = 1, length = 100, lane_width = 101)\n" + rest).find("exceeds"),
            std::string::npos);
  EXPECT_EQ(error_message("map straight(n_lanes = 64, length = 10000, lane_width = 100)\n" + rest), "");
}

TEST(FeatureSpace, ConstantsExcluded) {
  const ScenarioProgram p = parse(std::string(R"(param a = Range(2, 6)
param timepoint = Choice(20, 40, 60, 80)
param w = Constant(3.5)
map straight(n_lanes = 1, length = 100, lane_width = 3.5)
ego car on "lane0" offset = 10 speed = a
behavior car FollowLane(target_speed = w)
predict car at timepoint
)"));
  ASSERT_EQ(p.features().size(), 2u);
  EXPECT_EQ(p.features()[0].name, "a");
  EXPECT_EQ(p.features()[1].name, "timepoint");
  EXPECT_FALSE(p.features()[1].interval_length());
}

TEST(FeatureSpace, InlineDistributionIsHoisted) {
  const ScenarioProgram p = parse(R"(map straight(n_lanes = 1, length = 100, lane_width = 3.5)
ego car on "lane0" offset = 50 + Range(-30, -10) speed = 5
behavior car FollowLane(target_speed = 5)
predict car at 20
)");
  ASSERT_EQ(p.features().size(), 1u);
  EXPECT_EQ(p.features()[0].name, "agent0.init.offset");
  EXPECT_EQ(p.features()[0].interval_length(), 20.0);
}

TEST(FeatureSpace, StableUnderReparsing) {
  for (const auto& f : test::library_files()) {
    const std::string src = test::read_file(f);
    const auto a = parse(src);
    const auto b = parse(src);
    ASSERT_EQ(a.features().size(), b.features().size());
    for (std::size_t i = 0; i < a.features().size(); ++i) {
      EXPECT_EQ(a.features()[i].name, b.features()[i].name);
    }
    EXPECT_EQ(a.id(), b.id());
    EXPECT_EQ(feature_space(a).size(), a.features().size());
  }
}

TEST(RoundTrip, PrettyPrintReparsesToSameAst) {
  for (const auto& f : test::library_files()) {
    const ScenarioProgram p = parse(test::read_file(f));
    const ScenarioProgram q = parse(pretty_print(p));
    EXPECT_EQ(to_json(p).dump(), to_json(q).dump()) << f;
    EXPECT_EQ(p.id(), q.id());
    EXPECT_EQ(pretty_print(q), pretty_print(p));
  }
}

class Concretize : public ::testing::Test {
 protected:
  ScenarioProgram program = parse(R"(map straight(n_lanes = 1, length = 200, lane_width = 3.5)
param gap = Range(0.5, 20)
ego car on "lane0" offset = 10 speed = 5
agent adv on "lane0" offset = 10 + gap speed = 5
behavior car FollowLane(target_speed = 5)
behavior adv FollowLane(target_speed = 5)
require initial_dist(car, adv) > 2
predict adv at 20
)");
};

TEST_F(Concretize, AcceptsFarApart) {
  const auto r = concretize(program, {{"gap", 10.0}}, 1);
  ASSERT_TRUE(r.accepted());
  EXPECT_DOUBLE_EQ(r.scenario->find_agent("adv")->arc_offset, 20.0);
  EXPECT_EQ(r.scenario->seed, 1u);
}

TEST_F(Concretize, RejectsTooClose) {
  const auto r = concretize(program, {{"gap", 1.0}}, 1);
  EXPECT_FALSE(r.accepted());
  EXPECT_EQ(r.violated_requirement, std::optional<std::size_t>(0));
}

TEST_F(Concretize, AssignmentErrors) {
  EXPECT_THROW(concretize(program, {}, 1), AssignmentError);
  EXPECT_THROW(concretize(program, {{"gap", 10.0}, {"extra", 1.0}}, 1), AssignmentError);
  EXPECT_THROW(concretize(program, {{"gap", 25.0}}, 1), AssignmentError);
  EXPECT_THROW(concretize(program, {{"gap", std::string("left")}}, 1), AssignmentError);
}

TEST_F(Concretize, SeedNeverChangesResolution) {
  const auto a = concretize(program, {{"gap", 7.25}}, 1);
  const auto b = concretize(program, {{"gap", 7.25}}, 999);
  auto ja = to_json(*a.scenario);
  auto jb = to_json(*b.scenario);
  ja.erase("seed");
  jb.erase("seed");
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(ConcreteJson, StableKeyOrder) {
  const ScenarioProgram p = parse(test::kTwoCarSource);
  const auto r = concretize(p, {{"gap", 12.0}, {"speed", 5.0}}, 3);
  const std::string once = to_json(*r.scenario).dump();
  EXPECT_EQ(once, to_json(*concretize(p, {{"speed", 5.0}, {"gap", 12.0}}, 3).scenario).dump());
  EXPECT_NE(once.find("\"assignment\""), std::string::npos);
}

TEST(Lang, FnvKnownVectors) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Lang, ParserSurvivesDeepNesting) {
  std::string expr(5000, '(');
  expr += "1";
  expr += std::string(5000, ')');
  const std::string src = std::string("param a = ") + expr + "\n" + kMinimal;
  EXPECT_THROW(parse(src), ParseError);
}

}  // namespace
}  // namespace bpt
