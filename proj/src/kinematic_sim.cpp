#include "bpt/kinematic_sim.hpp"

#include <algorithm>
#include <cmath>

#include "bpt/error.hpp"

namespace bpt {

using lang::StepKind;

namespace {

double point_segment_distance(const Vec2d& p, const Vec2d& a, const Vec2d& b) {
  const Vec2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double segment_distance(const Vec2d& p1, const Vec2d& p2, const Vec2d& q1, const Vec2d& q2) {
  if (segments_intersect<double>(p1, p2, q1, q2)) return 0.0;
  return std::min({point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2),
                   point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)});
}

double lane_curvature(const Lane& lane) {
  const double dh = normalize_angle(lane.centerline.heading_at(lane.length()) -
                                    lane.centerline.heading_at(0.0));
  return std::abs(dh) / lane.length();
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

struct Agent {
  const ResolvedAgent* decl = nullptr;
  AgentState state;
  double last_target_speed = 0.0;
  std::optional<double> brake_ttc;
  double step_elapsed = 0.0;
  bool stopped = false;
  bool in_connector = false;
  std::optional<LaneId> lane_change_target;
  double lane_change_offset = 0.0;
};

struct Control {
  double yaw_rate = 0.0;
  double accel = 0.0;
  std::optional<double> snap_speed;
};

class Simulator {
 public:
  Simulator(const ConcreteScenario& scenario, const SimParams& params)
      : scenario_(scenario), net_(*scenario.network), p_(params) {
    for (const auto& decl : scenario.agents) {
      Agent a;
      a.decl = &decl;
      const Lane& lane = net_.lane(decl.lane);
      a.state.position = lane.centerline.point_at(decl.arc_offset) +
                         decl.lateral_offset * left_normal(lane.centerline.tangent_at(decl.arc_offset));
      a.state.heading = normalize_angle(lane.centerline.heading_at(decl.arc_offset));
      a.state.speed = decl.speed;
      a.state.current_lane = decl.lane;
      a.last_target_speed = decl.speed;
      for (const auto& s : decl.behavior) {
        if (s.kind == StepKind::kBrakeOnCollisionRisk) a.brake_ttc = s.ttc_threshold;
      }
      skip_modifiers(a);
      agents_.push_back(std::move(a));
    }
  }

  Trace run(std::size_t n_steps) {
    Trace trace;
    for (const auto& a : agents_) trace.agent_names.push_back(a.decl->name);
    trace.steps.reserve(n_steps);
    trace.steps.push_back(snapshot());
    std::vector<Control> controls(agents_.size());
    for (step_ = 1; step_ < n_steps; ++step_) {
      for (std::size_t i = 0; i < agents_.size(); ++i) controls[i] = control(i);
      for (std::size_t i = 0; i < agents_.size(); ++i) integrate(agents_[i], controls[i]);
      for (auto& a : agents_) update_lane(a);
      for (auto& a : agents_) advance_behavior(a);
      trace.steps.push_back(snapshot());
    }
    return trace;
  }

 private:
  std::vector<AgentState> snapshot() const {
    std::vector<AgentState> out;
    out.reserve(agents_.size());
    for (const auto& a : agents_) out.push_back(a.state);
    return out;
  }

  const ResolvedStep* active_step(const Agent& a) const {
    const auto& b = a.decl->behavior;
    return a.state.behavior_step_index < b.size() ? &b[a.state.behavior_step_index] : nullptr;
  }

  static void skip_modifiers(Agent& a) {
    const auto& b = a.decl->behavior;
    while (a.state.behavior_step_index < b.size() &&
           b[a.state.behavior_step_index].kind == StepKind::kBrakeOnCollisionRisk) {
      ++a.state.behavior_step_index;
    }
  }

  void advance(Agent& a) {
    ++a.state.behavior_step_index;
    a.step_elapsed = 0.0;
    a.stopped = false;
    a.in_connector = false;
    a.lane_change_target.reset();
    skip_modifiers(a);
  }

  [[noreturn]] void fail(const Agent& a, const std::string& what) const {
    throw SimulationError(a.decl->name, step_, what);
  }

  // Successor taken from `from`: the maneuver of the next pending
  // TurnAtIntersection decides at a branch; otherwise straight is preferred.
  std::optional<LaneId> next_lane(const Agent& a, const LaneId& from) const {
    const Lane& lane = net_.lane(from);
    if (lane.successors.empty()) return std::nullopt;
    if (lane.successors.size() == 1) return lane.successors.front();
    const auto& b = a.decl->behavior;
    for (std::size_t i = a.state.behavior_step_index; i < b.size(); ++i) {
      if (b[i].kind != StepKind::kTurnAtIntersection) continue;
      for (const auto& succ : lane.successors) {
        if (classify_turn(net_.lane(succ)) == b[i].maneuver) return succ;
      }
      fail(a, std::string("no ") + to_string(b[i].maneuver) + " exit from lane '" + from + "'");
    }
    for (const auto& succ : lane.successors) {
      if (classify_turn(net_.lane(succ)) == Maneuver::kStraight) return succ;
    }
    return lane.successors.front();
  }

  std::vector<const Lane*> path_ahead(const Agent& a, double arc, double distance) const {
    std::vector<const Lane*> path{&net_.lane(a.state.current_lane)};
    double covered = path.back()->length() - arc;
    while (covered < distance) {
      auto nxt = next_lane(a, path.back()->id);
      if (!nxt) break;
      path.push_back(&net_.lane(*nxt));
      covered += path.back()->length();
    }
    return path;
  }

  // Point at arc `u` measured from the start of path[0]; the final lane is
  // extended linearly past its end.
  static std::pair<Vec2d, Vec2d> point_on_path(const std::vector<const Lane*>& path, double u) {
    for (std::size_t i = 0; i < path.size(); ++i) {
      const Polyline2d& c = path[i]->centerline;
      if (u <= c.length() || i + 1 == path.size()) return {c.point_at(u), c.tangent_at(u)};
      u -= c.length();
    }
    return {Vec2d::Zero(), Vec2d::UnitX()};
  }

  // Upper bound on speed from the curvature of lanes ahead, reachable with
  // comfortable braking.
  double curvature_limit(const std::vector<const Lane*>& path, double arc) const {
    double limit = std::numeric_limits<double>::infinity();
    double dist_to_start = -arc;
    for (const Lane* lane : path) {
      const double k = lane_curvature(*lane);
      if (k > 1e-6) {
        const double v_curve = std::sqrt(p_.max_lateral_accel / k);
        const double d = std::max(0.0, dist_to_start);
        limit = std::min(limit, std::sqrt(v_curve * v_curve + 2.0 * p_.comfort_decel * d));
      }
      dist_to_start += lane->length();
    }
    return limit;
  }

  Control track_speed(double v, double v_target) const {
    Control c;
    const double delta = v_target - v;
    if (std::abs(delta) < 0.05) {
      c.snap_speed = v_target;
    } else {
      c.accel = std::clamp(p_.speed_gain * delta, -p_.max_decel, p_.max_accel);
    }
    return c;
  }

  // Constant-velocity time to collision against every agent ahead of us:
  // first t >= 0 with |dp + dv t| <= risk_radius.
  bool collision_risk(std::size_t i, double threshold) const {
    const Agent& me = agents_[i];
    const Vec2d heading(std::cos(me.state.heading), std::sin(me.state.heading));
    const Vec2d v_me = me.state.speed * heading;
    const double r2 = p_.risk_radius * p_.risk_radius;
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j == i) continue;
      const AgentState& o = agents_[j].state;
      const Vec2d dp = o.position - me.state.position;
      if (dp.dot(heading) <= 0.0) continue;
      const Vec2d dv = o.speed * Vec2d(std::cos(o.heading), std::sin(o.heading)) - v_me;
      const double c = dp.squaredNorm() - r2;
      if (c <= 0.0) return true;
      const double a = dv.squaredNorm();
      const double b = dp.dot(dv);
      if (a < 1e-12 || b >= 0.0) continue;
      const double disc = b * b - a * c;
      if (disc < 0.0) continue;
      const double ttc = (-b - std::sqrt(disc)) / a;
      if (ttc < threshold) return true;
    }
    return false;
  }

  Control stop_and_wait(const Agent& a, const Lane& lane, double arc,
                        const std::vector<const Lane*>& path) const {
    const double v = a.state.speed;
    if (a.stopped) return Control{0.0, 0.0, 0.0};
    if (lane.successors.empty()) {
      if (v <= p_.comfort_decel * kDt) return Control{0.0, 0.0, 0.0};
      return Control{0.0, -p_.comfort_decel, std::nullopt};
    }
    const double d = lane.length() - arc - p_.stop_margin;
    if (d <= 0.3 || (v < 0.3 && d < 1.0)) {
      if (v <= p_.max_decel * kDt) return Control{0.0, 0.0, 0.0};
      return Control{0.0, -p_.max_decel, std::nullopt};
    }
    const double required = v * v / (2.0 * d);
    if (required >= p_.comfort_decel) {
      return Control{0.0, -std::min(required, p_.max_decel), std::nullopt};
    }
    return track_speed(v, std::min(a.last_target_speed, curvature_limit(path, arc)));
  }

  Control control(std::size_t i) {
    Agent& a = agents_[i];
    const AgentState& st = a.state;
    const Lane& lane = net_.lane(st.current_lane);
    const double arc = lane.centerline.project(st.position).arc;
    const double v = st.speed;
    const double lookahead = std::max(p_.min_lookahead, p_.lookahead_gain * v);
    const double braking = v * v / (2.0 * p_.comfort_decel);
    const auto path = path_ahead(a, arc, std::max(lookahead, braking) + 1.0);

    const ResolvedStep* step = active_step(a);
    if (step != nullptr && step->kind == StepKind::kLaneChange && !a.lane_change_target) {
      const auto& adj = step->maneuver == Maneuver::kLeft ? lane.left_adjacent : lane.right_adjacent;
      if (!adj) fail(a, std::string("no lane to the ") + to_string(step->maneuver) + " of '" + lane.id + "'");
      a.lane_change_target = *adj;
      const Vec2d there = net_.lane(*adj).centerline.point_at(arc);
      a.lane_change_offset = lane.centerline.project(there).lateral;
    }

    // Pure pursuit towards the lookahead point.
    auto [target, tangent] = point_on_path(path, arc + lookahead);
    if (a.lane_change_target) {
      const double tau = (a.step_elapsed + lookahead / std::max(v, 1.0)) / step->duration;
      target += left_normal<double>(tangent) * (a.lane_change_offset * smoothstep(tau));
    }
    const Vec2d to_target = target - st.position;
    const double ld = to_target.norm();
    Control c;
    if (ld > 1e-9) {
      const double alpha = normalize_angle(std::atan2(to_target.y(), to_target.x()) - st.heading);
      c.yaw_rate = 2.0 * v * std::sin(alpha) / ld;
    }

    Control lon;
    if (step != nullptr && step->kind == StepKind::kStopAndWait) {
      lon = stop_and_wait(a, lane, arc, path);
    } else {
      if (step != nullptr && (step->kind == StepKind::kFollowLane ||
                              step->kind == StepKind::kTurnAtIntersection)) {
        a.last_target_speed = step->target_speed;
      }
      lon = track_speed(v, std::min(a.last_target_speed, curvature_limit(path, arc)));
    }
    if (a.brake_ttc && collision_risk(i, *a.brake_ttc)) {
      lon = Control{0.0, -p_.max_decel, std::nullopt};
    }
    c.accel = lon.accel;
    c.snap_speed = lon.snap_speed;
    return c;
  }

  void integrate(Agent& a, const Control& c) {
    AgentState& st = a.state;
    st.position.x() += st.speed * std::cos(st.heading) * kDt;
    st.position.y() += st.speed * std::sin(st.heading) * kDt;
    st.heading = normalize_angle(st.heading + c.yaw_rate * kDt);
    st.speed = c.snap_speed ? *c.snap_speed : std::max(0.0, st.speed + c.accel * kDt);
  }

  void update_lane(Agent& a) {
    for (int guard = 0; guard < 8; ++guard) {
      const Lane& lane = net_.lane(a.state.current_lane);
      if (lane.centerline.project(a.state.position).beyond_end <= 0.0) return;
      auto nxt = next_lane(a, lane.id);
      if (!nxt) fail(a, "left the map at the end of lane '" + lane.id + "'");
      const ResolvedStep* step = active_step(a);
      const bool turning = step != nullptr && step->kind == StepKind::kTurnAtIntersection;
      a.state.current_lane = *nxt;
      if (turning) {
        if (lane.successors.size() > 1) {
          a.in_connector = true;
        } else if (a.in_connector) {
          advance(a);
        }
      }
    }
  }

  bool conflict_free(std::size_t self) const {
    const Agent& a = agents_[self];
    const ResolvedStep* step = active_step(a);
    auto nxt = next_lane(a, a.state.current_lane);
    const Lane& guarded = net_.lane(nxt ? *nxt : a.state.current_lane);
    const auto& pts = guarded.centerline.points();
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j == self) continue;
      const AgentState& o = agents_[j].state;
      if ((o.position - a.state.position).norm() < step->clear_radius) return false;
      const Vec2d ahead = o.position + o.speed * p_.conflict_horizon *
                                           Vec2d(std::cos(o.heading), std::sin(o.heading));
      for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (segment_distance(o.position, ahead, pts[k], pts[k + 1]) < guarded.width / 2) {
          return false;
        }
      }
    }
    return true;
  }

  void advance_behavior(Agent& a) {
    const ResolvedStep* step = active_step(a);
    if (step == nullptr) return;
    switch (step->kind) {
      case StepKind::kFollowLane:
        a.step_elapsed += kDt;
        if (a.step_elapsed >= step->duration - 1e-9) advance(a);
        break;
      case StepKind::kLaneChange:
        a.step_elapsed += kDt;
        if (a.step_elapsed >= step->duration - 1e-9) {
          a.state.current_lane = *a.lane_change_target;
          advance(a);
        }
        break;
      case StepKind::kStopAndWait: {
        if (!a.stopped && a.state.speed == 0.0) a.stopped = true;
        const std::size_t self = static_cast<std::size_t>(&a - agents_.data());
        if (a.stopped && conflict_free(self)) advance(a);
        break;
      }
      case StepKind::kTurnAtIntersection:
      case StepKind::kBrakeOnCollisionRisk:
        break;
    }
  }

  const ConcreteScenario& scenario_;
  const RoadNetwork& net_;
  SimParams p_;
  std::vector<Agent> agents_;
  std::size_t step_ = 0;
};

}  // namespace

std::size_t Trace::agent_index(const std::string& name) const {
  for (std::size_t i = 0; i < agent_names.size(); ++i) {
    if (agent_names[i] == name) return i;
  }
  throw InvalidArgument("unknown agent '" + name + "'");
}

Trace simulate(const ConcreteScenario& scenario, std::size_t n_steps, std::size_t horizon,
               const SimParams& params) {
  if (scenario.timepoint < 0 ||
      n_steps < static_cast<std::size_t>(scenario.timepoint) + horizon) {
    throw InvalidArgument("n_steps must be at least timepoint + horizon (" +
                          std::to_string(scenario.timepoint + horizon) + ")");
  }
  if (!scenario.network) throw InvalidArgument("scenario has no road network");
  return Simulator(scenario, params).run(n_steps);
}

TraceWindow split_trace(const Trace& trace, int timepoint, const std::string& target_agent,
                        std::size_t history_length, std::size_t horizon) {
  if (timepoint < static_cast<int>(history_length)) {
    throw InvalidArgument("timepoint " + std::to_string(timepoint) + " is below the minimum " +
                          std::to_string(history_length));
  }
  const std::size_t tp = static_cast<std::size_t>(timepoint);
  if (trace.length() < tp + horizon) {
    throw InvalidArgument("trace of length " + std::to_string(trace.length()) +
                          " is too short for timepoint " + std::to_string(timepoint));
  }
  const std::size_t target = trace.agent_index(target_agent);
  TraceWindow w;
  for (std::size_t a = 0; a < trace.agent_names.size(); ++a) {
    AgentHistory h{trace.agent_names[a], HistoryMatrix(history_length, 3)};
    for (std::size_t k = 0; k < history_length; ++k) {
      const AgentState& s = trace.steps[tp - history_length + k][a];
      h.states.row(k) << s.position.x(), s.position.y(), s.heading;
    }
    w.history.push_back(std::move(h));
  }
  w.future_truth.resize(horizon, 2);
  for (std::size_t k = 0; k < horizon; ++k) {
    w.future_truth.row(k) = trace.steps[tp + k][target].position.transpose();
  }
  return w;
}

std::optional<Collision> collision_check(const Trace& trace, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const auto& snap = trace.steps[t];
    for (std::size_t i = 0; i < snap.size(); ++i) {
      for (std::size_t j = i + 1; j < snap.size(); ++j) {
        if ((snap[i].position - snap[j].position).norm() < radius) {
          return Collision{t, trace.agent_names[i], trace.agent_names[j]};
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace bpt
