#include <cmath>
#include <variant>

#include "bpt/concrete_scenario.hpp"
#include "bpt/error.hpp"

namespace bpt {

using lang::Expr;
using lang::StepKind;

namespace {

using Value = std::variant<double, bool, std::string>;

struct Env {
  const ScenarioProgram& program;
  const FeatureAssignment& assignment;
  std::map<std::string, Value> params;
  std::map<std::string, Vec2d> initial_positions;
};

Value from_feature(const FeatureValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

double as_number(const Value& v) { return std::get<double>(v); }
bool as_bool(const Value& v) { return std::get<bool>(v); }

Value eval(const Expr& e, const Env& env) {
  switch (e.kind) {
    case Expr::Kind::kNumber: return e.number;
    case Expr::Kind::kString: return e.text;
    case Expr::Kind::kBool: return e.boolean;
    case Expr::Kind::kIdent: return env.params.at(e.text);
    case Expr::Kind::kRange:
    case Expr::Kind::kChoice: return from_feature(env.assignment.at(e.feature));
    case Expr::Kind::kConstant: return eval(*e.args[0], env);
    case Expr::Kind::kUnary:
      if (e.text == "not") return !as_bool(eval(*e.args[0], env));
      return -as_number(eval(*e.args[0], env));
    case Expr::Kind::kBinary: {
      const std::string& op = e.text;
      if (op == "and") return as_bool(eval(*e.args[0], env)) && as_bool(eval(*e.args[1], env));
      if (op == "or") return as_bool(eval(*e.args[0], env)) || as_bool(eval(*e.args[1], env));
      const Value a = eval(*e.args[0], env);
      const Value b = eval(*e.args[1], env);
      if (op == "==") return a == b;
      if (op == "!=") return a != b;
      const double x = as_number(a);
      const double y = as_number(b);
      if (op == "+") return x + y;
      if (op == "-") return x - y;
      if (op == "*") return x * y;
      if (op == "/") return x / y;
      if (op == "<") return x < y;
      if (op == "<=") return x <= y;
      if (op == ">") return x > y;
      if (op == ">=") return x >= y;
      throw ScenarioError("unknown operator " + op);
    }
    case Expr::Kind::kCall: {
      const std::string& fn = e.text;
      if (fn == "initial_dist") {
        const Vec2d& a = env.initial_positions.at(e.args[0]->text);
        const Vec2d& b = env.initial_positions.at(e.args[1]->text);
        return (a - b).norm();
      }
      const double x = as_number(eval(*e.args[0], env));
      if (fn == "abs") return std::abs(x);
      if (fn == "sqrt") return std::sqrt(x);
      const double y = as_number(eval(*e.args[1], env));
      if (fn == "min") return std::min(x, y);
      if (fn == "max") return std::max(x, y);
      throw ScenarioError("unknown function " + fn);
    }
  }
  throw ScenarioError("unreachable expression kind");
}

double eval_number(const Expr& e, const Env& env, const std::string& what) {
  const double v = as_number(eval(e, env));
  if (!std::isfinite(v)) throw ScenarioError(what + " is not finite");
  return v;
}

double eval_positive(const Expr& e, const Env& env, const std::string& what) {
  const double v = eval_number(e, env, what);
  if (!(v > 0.0)) throw ScenarioError(what + " must be positive, got " + std::to_string(v));
  return v;
}

Maneuver eval_maneuver(const Expr& e, const Env& env, const std::string& what) {
  const auto m = maneuver_from_string(std::get<std::string>(eval(e, env)));
  if (!m) throw ScenarioError(what + " has an invalid value");
  return *m;
}

ResolvedStep resolve_step(const lang::StepDecl& step, const Env& env, const std::string& who) {
  ResolvedStep r;
  r.kind = step.kind;
  const std::string where = who + " " + lang::to_string(step.kind);
  auto num = [&](const char* key) { return eval_positive(*step.arg(key), env, where + "." + key); };
  switch (step.kind) {
    case StepKind::kFollowLane:
      r.target_speed = num("target_speed");
      if (step.arg("duration") != nullptr) r.duration = num("duration");
      break;
    case StepKind::kLaneChange:
      r.maneuver = eval_maneuver(*step.arg("direction"), env, where);
      if (r.maneuver == Maneuver::kStraight) throw ScenarioError(where + ": direction must be left or right");
      r.duration = num("duration");
      break;
    case StepKind::kTurnAtIntersection:
      r.maneuver = eval_maneuver(*step.arg("maneuver"), env, where);
      r.target_speed = num("target_speed");
      break;
    case StepKind::kStopAndWait:
      r.clear_radius = num("clear_radius");
      break;
    case StepKind::kBrakeOnCollisionRisk:
      if (step.arg("ttc_threshold") != nullptr) r.ttc_threshold = num("ttc_threshold");
      break;
  }
  return r;
}

void check_assignment(const ScenarioProgram& program, const FeatureAssignment& assignment) {
  for (const auto& f : program.features()) {
    auto it = assignment.find(f.name);
    if (it == assignment.end()) throw AssignmentError("missing feature '" + f.name + "'");
    if (!f.distribution.contains(it->second)) {
      throw AssignmentError("value " + to_string(it->second) + " is outside the support of '" +
                            f.name + "'");
    }
  }
  if (assignment.size() != program.features().size()) {
    for (const auto& [name, value] : assignment) {
      bool known = false;
      for (const auto& f : program.features()) known = known || f.name == name;
      if (!known) throw AssignmentError("unknown feature '" + name + "'");
    }
  }
}

}  // namespace

const ResolvedAgent* ConcreteScenario::find_agent(const std::string& name) const {
  for (const auto& a : agents) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

ConcretizeResult concretize(const ScenarioProgram& program, const FeatureAssignment& assignment,
                            std::uint64_t seed) {
  check_assignment(program, assignment);
  Env env{program, assignment, {}, {}};
  for (const auto& p : program.params) env.params[p.name] = eval(*p.value, env);

  ConcreteScenario cs;
  cs.program_id = program.id();
  cs.assignment = assignment;
  cs.network = program.shared_network();
  cs.seed = seed;
  cs.target = program.predict.target;

  for (const auto& a : program.agents) {
    ResolvedAgent ra;
    ra.name = a.name;
    ra.is_ego = a.is_ego;
    ra.lane = a.lane;
    const Lane& lane = program.network().lane(a.lane);
    const double offset = eval_number(*a.offset, env, a.name + ".offset");
    ra.arc_offset = offset < 0.0 ? lane.length() + offset : offset;
    if (ra.arc_offset < 0.0 || ra.arc_offset > lane.length()) {
      throw ScenarioError(a.name + ": offset " + std::to_string(offset) + " is off lane '" +
                          a.lane + "'");
    }
    ra.speed = eval_number(*a.speed, env, a.name + ".speed");
    if (ra.speed < 0.0) throw ScenarioError(a.name + ": initial speed must be >= 0");
    for (const auto& s : a.behavior) ra.behavior.push_back(resolve_step(s, env, a.name));
    env.initial_positions[a.name] = lane.centerline.point_at(ra.arc_offset);
    cs.agents.push_back(std::move(ra));
  }

  const double tp = eval_number(*program.predict.timepoint, env, "timepoint");
  if (tp != std::floor(tp) || tp < 20 || tp > 1e6) {
    throw ScenarioError("timepoint must be an integer >= 20, got " + std::to_string(tp));
  }
  cs.timepoint = static_cast<int>(tp);

  ConcretizeResult result;
  for (std::size_t i = 0; i < program.requirements.size(); ++i) {
    if (!as_bool(eval(*program.requirements[i].condition, env))) {
      result.violated_requirement = i;
      return result;
    }
  }
  result.scenario = std::move(cs);
  return result;
}

nlohmann::json to_json(const ConcreteScenario& cs) {
  nlohmann::json assignment = nlohmann::json::object();
  for (const auto& [name, value] : cs.assignment) assignment[name] = to_json(value);
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : cs.agents) {
    nlohmann::json behavior = nlohmann::json::array();
    for (const auto& s : a.behavior) {
      nlohmann::json step = {{"step", lang::to_string(s.kind)}};
      switch (s.kind) {
        case StepKind::kFollowLane:
          step["target_speed"] = s.target_speed;
          if (std::isfinite(s.duration)) step["duration"] = s.duration;
          break;
        case StepKind::kLaneChange:
          step["direction"] = to_string(s.maneuver);
          step["duration"] = s.duration;
          break;
        case StepKind::kTurnAtIntersection:
          step["maneuver"] = to_string(s.maneuver);
          step["target_speed"] = s.target_speed;
          break;
        case StepKind::kStopAndWait: step["clear_radius"] = s.clear_radius; break;
        case StepKind::kBrakeOnCollisionRisk: step["ttc_threshold"] = s.ttc_threshold; break;
      }
      behavior.push_back(std::move(step));
    }
    agents.push_back({{"name", a.name},
                      {"ego", a.is_ego},
                      {"lane", a.lane},
                      {"arc_offset", a.arc_offset},
                      {"speed", a.speed},
                      {"behavior", std::move(behavior)}});
  }
  return {{"program_id", cs.program_id}, {"assignment", std::move(assignment)},
          {"agents", std::move(agents)},  {"target", cs.target},
          {"timepoint", cs.timepoint},    {"seed", cs.seed}};
}

}  // namespace bpt
