#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bpt/concrete_scenario.hpp"
#include "bpt/error.hpp"
#include "bpt/kinematic_sim.hpp"
#include "bpt/samplers.hpp"
#include "bpt/scenario_library.hpp"
#include "support/test_support.hpp"

namespace bpt {
namespace {

using lang::StepKind;

ResolvedStep follow(double v) {
  ResolvedStep s;
  s.kind = StepKind::kFollowLane;
  s.target_speed = v;
  return s;
}

ResolvedAgent agent(std::string name, LaneId lane, double arc, double speed,
                    std::vector<ResolvedStep> behavior, bool ego = false) {
  ResolvedAgent a;
  a.name = std::move(name);
  a.is_ego = ego;
  a.lane = std::move(lane);
  a.arc_offset = arc;
  a.speed = speed;
  a.behavior = std::move(behavior);
  return a;
}

ConcreteScenario scenario(RoadNetwork net, std::vector<ResolvedAgent> agents, int timepoint = 20) {
  ConcreteScenario cs;
  cs.program_id = "test";
  cs.network = std::make_shared<const RoadNetwork>(std::move(net));
  cs.agents = std::move(agents);
  cs.target = cs.agents.front().name;
  cs.timepoint = timepoint;
  return cs;
}

TEST(Simulate, ConstantSpeedAdvancesHalfMeterPerStep) {
  const auto cs = scenario(build_straight_road(1, 200, 3.5), {agent("car", "lane0", 10, 5, {follow(5)}, true)});
  const Trace tr = simulate(cs, 100);
  ASSERT_EQ(tr.length(), 100u);
  EXPECT_EQ(tr.dt, 0.1);
  for (std::size_t t = 0; t < tr.length(); ++t) {
    const auto& s = tr.steps[t][0];
    EXPECT_NEAR(s.position.x(), 10 + 0.5 * static_cast<double>(t), 1e-6);
    EXPECT_NEAR(s.position.y(), 0, 1e-6);
    EXPECT_NEAR(s.speed, 5, 1e-12);
  }
}

TEST(Simulate, PreconditionOnLength) {
  const auto cs = scenario(build_straight_road(1, 200, 3.5), {agent("car", "lane0", 10, 5, {follow(5)}, true)}, 40);
  EXPECT_THROW(simulate(cs, 54), InvalidArgument);
  EXPECT_NO_THROW(simulate(cs, 55));
}

TEST(Simulate, LeavingTheMapIsAnError) {
  const auto cs = scenario(build_straight_road(1, 30, 3.5), {agent("car", "lane0", 10, 8, {follow(8)}, true)});
  try {
    simulate(cs, 60);
    FAIL() << "expected SimulationError";
  } catch (const SimulationError& e) {
    EXPECT_EQ(e.agent(), "car");
    // 20 m of lane left at 0.8 m per step.
    EXPECT_GE(e.step(), 20u);
    EXPECT_LE(e.step(), 30u);
  }
}

TEST(Simulate, ExhaustedBehaviorHoldsLastTargetSpeed) {
  ResolvedStep brief = follow(4);
  brief.duration = 1.0;
  const auto cs = scenario(build_straight_road(1, 300, 3.5), {agent("car", "lane0", 10, 2, {brief}, true)});
  const Trace tr = simulate(cs, 80);
  EXPECT_NEAR(tr.steps.back()[0].speed, 4.0, 1e-9);
  EXPECT_EQ(tr.steps.back()[0].behavior_step_index, 1u);
}

TEST(Simulate, ZeroOffsetStaysOnCenterline) {
  const RoadNetwork net = build_straight_road(2, 300, 3.5);
  for (double v : {2.0, 5.0, 9.0}) {
    const auto cs = scenario(net, {agent("car", "lane1", 0, v, {follow(v)}, true)});
    const Trace tr = simulate(cs, 100);
    for (const auto& snap : tr.steps) {
      EXPECT_LT(std::abs(project_to_lane(net, "lane1", snap[0].position).lateral_offset), 1e-6);
    }
  }
}

std::vector<double> lateral_profile(double v) {
  const RoadNetwork net = build_straight_road(1, 300, 3.5);
  auto a = agent("car", "lane0", 0, v, {follow(v)}, true);
  a.lateral_offset = 0.5;
  const Trace tr = simulate(scenario(net, {a}), 100);
  std::vector<double> lat;
  for (const auto& snap : tr.steps) lat.push_back(std::abs(project_to_lane(net, "lane0", snap[0].position).lateral_offset));
  return lat;
}

TEST(Simulate, HalfMeterOffsetConverges) {
  for (double v : {3.0, 5.0, 8.0}) {
    const auto lat = lateral_profile(v);
    EXPECT_NEAR(lat.front(), 0.5, 1e-12);
    EXPECT_LT(lat.back(), 0.05) << v;
  }
}

// Pure pursuit steering a unicycle is an underdamped second-order loop
// (damping 1/sqrt(2) after linearization), so the offset crosses the
// centerline and comes back by a few centimetres. Kept as stated; it fails.
TEST(Simulate, HalfMeterOffsetDecreasesMonotonically) {
  for (double v : {3.0, 5.0, 8.0}) {
    const auto lat = lateral_profile(v);
    std::size_t first_rise = 0;
    for (std::size_t t = 11; t < lat.size() && first_rise == 0; ++t) {
      if (lat[t] > lat[t - 1] + 1e-12) first_rise = t;
    }
    EXPECT_EQ(first_rise, 0u) << "v " << v << ": |lateral| rises at step " << first_rise << " to "
                              << lat[first_rise] << ", peak after crossing "
                              << *std::max_element(lat.begin() + static_cast<long>(first_rise), lat.end());
  }
}

// Every trace of every library program, a few samples each.
std::vector<Trace> library_traces() {
  std::vector<Trace> out;
  for (const auto& f : test::library_files()) {
    const ScenarioProgram p = load_program(f);
    UniformSampler s(p.features(), 4);
    for (int i = 0; i < 4; ++i) {
      const auto cr = concretize(p, s.propose(), static_cast<std::uint64_t>(i));
      if (cr.accepted()) out.push_back(simulate(*cr.scenario, 100));
    }
  }
  return out;
}

TEST(Simulate, PhysicalBoundsOnLibrary) {
  for (const Trace& tr : library_traces()) {
    for (std::size_t t = 0; t < tr.length(); ++t) {
      for (std::size_t a = 0; a < tr.agent_names.size(); ++a) {
        const auto& s = tr.steps[t][a];
        ASSERT_GE(s.speed, 0.0);
        ASSERT_GT(s.heading, -std::numbers::pi);
        ASSERT_LE(s.heading, std::numbers::pi);
        if (t > 0) {
          ASSERT_LE(std::abs(s.speed - tr.steps[t - 1][a].speed), 0.6 + 1e-9);
        }
      }
    }
  }
}

TEST(Simulate, BitIdenticalTwice) {
  for (const auto& f : test::library_files()) {
    const ScenarioProgram p = load_program(f);
    UniformSampler s(p.features(), 9);
    const auto cr = concretize(p, s.propose(), 1);
    if (!cr.accepted()) continue;
    std::ostringstream a, b;
    write_trace_csv(simulate(*cr.scenario, 100), a);
    write_trace_csv(simulate(*cr.scenario, 100), b);
    EXPECT_EQ(a.str(), b.str()) << f;
  }
}

TEST(Simulate, StopAndWaitHoldsWhileOtherInsideRadius) {
  const RoadNetwork net = build_intersection(4, 60, 3.5);
  ResolvedStep wait;
  wait.kind = StepKind::kStopAndWait;
  wait.clear_radius = 10;
  ResolvedStep turn;
  turn.kind = StepKind::kTurnAtIntersection;
  turn.maneuver = Maneuver::kRight;
  turn.target_speed = 4;
  ResolvedStep cross = follow(3);
  const double in_len = net.lane("south_in").length();
  const auto cs = scenario(net, {agent("car", "south_in", in_len - 12, 3, {wait, turn}, true),
                                 agent("other", "west_in", net.lane("west_in").length() - 12, 3, {cross})});
  const Trace tr = simulate(cs, 150);
  const std::size_t ego = tr.agent_index("car"), other = tr.agent_index("other");

  std::optional<std::size_t> stopped_at;
  for (std::size_t t = 0; t < tr.length(); ++t) {
    if (tr.steps[t][ego].speed == 0.0) {
      stopped_at = t;
      break;
    }
  }
  ASSERT_TRUE(stopped_at);
  // Step-through: while the ego is still waiting and the other car is inside
  // the radius, the next step has the ego at rest.
  std::size_t held = 0;
  for (std::size_t t = *stopped_at; t + 1 < tr.length(); ++t) {
    if (tr.steps[t][ego].behavior_step_index != 0) break;
    const double d = (tr.steps[t][ego].position - tr.steps[t][other].position).norm();
    if (d >= 10.0) continue;
    EXPECT_EQ(tr.steps[t + 1][ego].speed, 0.0) << "step " << t;
    ++held;
  }
  EXPECT_GT(held, 0u);
  EXPECT_GT(tr.steps.back()[ego].speed, 1.0);
  EXPECT_GE(tr.steps.back()[ego].behavior_step_index, 1u);
}

Trace handmade(const std::vector<std::vector<Vec2d>>& paths) {
  Trace tr;
  for (std::size_t a = 0; a < paths.size(); ++a) tr.agent_names.push_back("a" + std::to_string(a));
  for (std::size_t t = 0; t < paths[0].size(); ++t) {
    std::vector<AgentState> snap;
    for (const auto& p : paths) snap.push_back(AgentState{p[t], 0.0, 0.0, "", 0});
    tr.steps.push_back(snap);
  }
  return tr;
}

TEST(CollisionCheck, Examples) {
  auto c = collision_check(handmade({{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}}), 2.0);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->step, 0u);
  EXPECT_FALSE(collision_check(handmade({{{0, 0}, {0, 0}}, {{11, 0}, {11, 0}}}), 2.0));
  EXPECT_THROW(collision_check(handmade({{{0, 0}}}), 0.0), InvalidArgument);
}

TEST(CollisionCheck, CrossingPathsMatchBruteForce) {
  // a0 drives along +x, a1 along +y offset so they pass 0.5 m apart at step 37.
  std::vector<Vec2d> p0, p1;
  for (int t = 0; t < 80; ++t) {
    p0.emplace_back(-37.0 + t, 0.0);
    p1.emplace_back(0.5, -37.0 + t);
  }
  const Trace tr = handmade({p0, p1});
  std::optional<std::size_t> first;
  for (std::size_t t = 0; t < tr.length() && !first; ++t) {
    if ((p0[t] - p1[t]).norm() < 1.0) first = t;
  }
  ASSERT_EQ(first, std::optional<std::size_t>(37));
  const auto c = collision_check(tr, 1.0);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->step, *first);
  EXPECT_EQ(c->first, "a0");
  EXPECT_EQ(c->second, "a1");
}

class Windowing : public ::testing::Test {
 protected:
  void SetUp() override {
    ResolvedStep slow = follow(6);
    cs = scenario(build_straight_road(2, 400, 3.5),
                  {agent("car", "lane0", 5, 3, {follow(3)}, true), agent("lead", "lane1", 20, 4, {slow})}, 40);
    trace = simulate(cs, 80);
  }
  ConcreteScenario cs;
  Trace trace;
};

TEST_F(Windowing, Timepoint40) {
  const TraceWindow w = split_trace(trace, 40, "lead");
  ASSERT_EQ(w.history.size(), 2u);
  for (std::size_t a = 0; a < 2; ++a) {
    ASSERT_EQ(w.history[a].states.rows(), 20);
    for (Eigen::Index k = 0; k < 20; ++k) {
      const auto& s = trace.steps[20 + static_cast<std::size_t>(k)][a];
      EXPECT_EQ(w.history[a].states(k, 0), s.position.x());
      EXPECT_EQ(w.history[a].states(k, 1), s.position.y());
      EXPECT_EQ(w.history[a].states(k, 2), s.heading);
    }
  }
  ASSERT_EQ(w.future_truth.rows(), 15);
  for (Eigen::Index k = 0; k < 15; ++k) {
    EXPECT_EQ(w.future_truth(k, 0), trace.state(40 + static_cast<std::size_t>(k), "lead").position.x());
  }
}

TEST_F(Windowing, Timepoint20StartsAtZero) {
  const TraceWindow w = split_trace(trace, 20, "car");
  EXPECT_EQ(w.history[0].states(0, 0), trace.steps[0][0].position.x());
  EXPECT_EQ(w.future_truth(0, 0), trace.steps[20][0].position.x());
}

TEST_F(Windowing, Errors) {
  EXPECT_THROW(split_trace(trace, 19, "car"), InvalidArgument);
  EXPECT_THROW(split_trace(trace, 66, "car"), InvalidArgument);
  EXPECT_NO_THROW(split_trace(trace, 65, "car"));
  EXPECT_THROW(split_trace(trace, 40, "ghost"), InvalidArgument);
}

TEST_F(Windowing, TraceCsvAndJson) {
  std::ostringstream out;
  write_trace_csv(trace, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "timestep,agent_id,x,y,heading,speed");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 80u * 2u);
  const auto j = to_json(trace);
  EXPECT_EQ(j["length"], 80);
  EXPECT_EQ(j["agents"]["lead"].size(), 80u);
}

}  // namespace
}  // namespace bpt
