#ifndef BPT_CONCRETE_SCENARIO_HPP_
#define BPT_CONCRETE_SCENARIO_HPP_

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpt/road_model.hpp"
#include "bpt/scenario_lang.hpp"

namespace bpt {

struct ResolvedStep {
  lang::StepKind kind = lang::StepKind::kFollowLane;
  double target_speed = 0.0;
  /// FollowLane: optional hold time; LaneChange: maneuver time.
  double duration = std::numeric_limits<double>::infinity();
  /// TurnAtIntersection maneuver, or LaneChange direction (kLeft/kRight).
  Maneuver maneuver = Maneuver::kStraight;
  double clear_radius = 0.0;
  double ttc_threshold = 2.0;
};

struct ResolvedAgent {
  std::string name;
  bool is_ego = false;
  LaneId lane;
  /// Arc length from the start of `lane`.
  double arc_offset = 0.0;
  /// Start displaced this far to the left of the centerline. Not reachable
  /// from the language; used to exercise lane tracking.
  double lateral_offset = 0.0;
  double speed = 0.0;
  std::vector<ResolvedStep> behavior;
};

/// One sampled assignment of every feature, resolved to numbers.
struct ConcreteScenario {
  std::string program_id;
  FeatureAssignment assignment;
  std::shared_ptr<const RoadNetwork> network;
  std::vector<ResolvedAgent> agents;
  std::string target;
  int timepoint = 20;
  std::uint64_t seed = 0;

  const ResolvedAgent* find_agent(const std::string& name) const;
};

struct ConcretizeResult {
  std::optional<ConcreteScenario> scenario;
  /// Index of the first violated requirement when rejected.
  std::optional<std::size_t> violated_requirement;

  bool accepted() const { return scenario.has_value(); }
};

/// Resolves every expression under `assignment`. A requirement violation is a
/// rejection (not an error); a missing/extra/out-of-support feature throws
/// AssignmentError and an unresolvable scenario throws ScenarioError. The
/// seed is carried along untouched.
ConcretizeResult concretize(const ScenarioProgram& program,
                            const FeatureAssignment& assignment, std::uint64_t seed);

nlohmann::json to_json(const ConcreteScenario& scenario);

}  // namespace bpt

#endif  // BPT_CONCRETE_SCENARIO_HPP_
