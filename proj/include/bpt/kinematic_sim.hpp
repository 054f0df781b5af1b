#ifndef BPT_KINEMATIC_SIM_HPP_
#define BPT_KINEMATIC_SIM_HPP_

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bpt/concrete_scenario.hpp"
#include "bpt/geometry.hpp"

namespace bpt {

/// Fixed integration step, 10 Hz.
inline constexpr double kDt = 0.1;
inline constexpr std::size_t kHistoryLength = 20;
inline constexpr std::size_t kHorizon = 15;

struct SimParams {
  double max_accel = 3.0;
  double max_decel = 6.0;
  double comfort_decel = 2.5;
  double max_lateral_accel = 3.0;
  double min_lookahead = 3.0;
  double lookahead_gain = 1.0;  // seconds: lookahead = max(min, gain * speed)
  double speed_gain = 2.0;      // 1/s, proportional speed tracking
  double stop_margin = 1.0;     // StopAndWait stops this far before the lane end
  double risk_radius = 2.5;     // footprint used by the time-to-collision test
  double conflict_horizon = 3.0;  // s, constant-velocity look-ahead for StopAndWait
};

struct AgentState {
  Vec2d position = Vec2d::Zero();
  double heading = 0.0;  // (-pi, pi]
  double speed = 0.0;
  LaneId current_lane;
  std::size_t behavior_step_index = 0;
};

/// Snapshots at t = step * dt; agents in declaration order.
struct Trace {
  double dt = kDt;
  std::vector<std::string> agent_names;
  std::vector<std::vector<AgentState>> steps;

  std::size_t length() const { return steps.size(); }
  std::size_t agent_index(const std::string& name) const;
  const AgentState& state(std::size_t step, const std::string& agent) const {
    return steps.at(step).at(agent_index(agent));
  }
};

/// Deterministic unicycle simulation with pure-pursuit lane tracking.
/// Requires n_steps >= timepoint + horizon. Throws SimulationError when an
/// agent drives off the end of a lane without successors.
Trace simulate(const ConcreteScenario& scenario, std::size_t n_steps,
               std::size_t horizon = kHorizon, const SimParams& params = {});

/// (x, y, heading) rows.
using HistoryMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct AgentHistory {
  std::string agent;
  HistoryMatrix states;
};

struct TraceWindow {
  /// Steps [timepoint - history, timepoint) for every agent.
  std::vector<AgentHistory> history;
  /// Steps [timepoint, timepoint + horizon) for the target agent.
  Trajectoryd future_truth;
};

TraceWindow split_trace(const Trace& trace, int timepoint, const std::string& target_agent,
                        std::size_t history_length = kHistoryLength,
                        std::size_t horizon = kHorizon);

struct Collision {
  std::size_t step = 0;
  std::string first;
  std::string second;
};

/// First step where two agents are closer than `radius`.
std::optional<Collision> collision_check(const Trace& trace, double radius);

/// CSV with header timestep,agent_id,x,y,heading,speed.
void write_trace_csv(const Trace& trace, std::ostream& out);
nlohmann::json to_json(const Trace& trace);

}  // namespace bpt

#endif  // BPT_KINEMATIC_SIM_HPP_
