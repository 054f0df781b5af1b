#include <cstdio>
#include <sstream>

#include "bpt/error.hpp"
#include "bpt/scenario_lang.hpp"

namespace bpt {

using lang::Expr;

nlohmann::json to_json(const FeatureValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

FeatureValue feature_value_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw InvalidArgument("feature value must be a number or string");
}

std::string to_string(const FeatureValue& v) {
  if (const double* d = std::get_if<double>(&v)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  return std::get<std::string>(v);
}

Distribution Distribution::range(double lo, double hi) {
  if (!(lo < hi)) throw InvalidArgument("Range requires lo < hi");
  Distribution d;
  d.kind = Kind::kRange;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Distribution Distribution::choice(std::vector<FeatureValue> values) {
  if (values.empty()) throw InvalidArgument("Choice requires at least one value");
  for (const auto& v : values) {
    if (v.index() != values.front().index()) {
      throw InvalidArgument("Choice values must share one scalar type");
    }
  }
  Distribution d;
  d.kind = Kind::kChoice;
  d.values = std::move(values);
  return d;
}

Distribution Distribution::constant(FeatureValue value) {
  Distribution d;
  d.kind = Kind::kConstant;
  d.values = {std::move(value)};
  return d;
}

bool Distribution::contains(const FeatureValue& v) const {
  if (kind == Kind::kRange) {
    const double* d = std::get_if<double>(&v);
    return d != nullptr && *d >= lo && *d <= hi;
  }
  for (const auto& x : values) {
    if (x == v) return true;
  }
  return false;
}

std::optional<double> Feature::interval_length() const {
  if (distribution.kind == Distribution::Kind::kRange) {
    return distribution.hi - distribution.lo;
  }
  return std::nullopt;
}

namespace lang {

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::kFollowLane: return "FollowLane";
    case StepKind::kLaneChange: return "LaneChange";
    case StepKind::kTurnAtIntersection: return "TurnAtIntersection";
    case StepKind::kStopAndWait: return "StopAndWait";
    case StepKind::kBrakeOnCollisionRisk: return "BrakeOnCollisionRisk";
  }
  return "?";
}

const Expr* StepDecl::arg(std::string_view key) const {
  for (const auto& kw : args) {
    if (kw.key == key) return kw.value.get();
  }
  return nullptr;
}

}  // namespace lang

const lang::AgentDecl* ScenarioProgram::find_agent(std::string_view name) const {
  for (const auto& a : agents) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const lang::ParamDecl* ScenarioProgram::find_param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<Feature> feature_space(const ScenarioProgram& program) {
  return program.features();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string number_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kNumber: return number_text(e.number);
    case Expr::Kind::kString: return "\"" + e.text + "\"";
    case Expr::Kind::kBool: return e.boolean ? "true" : "false";
    case Expr::Kind::kIdent: return e.text;
    case Expr::Kind::kUnary:
      return e.text == "not" ? "(not " + print_expr(*e.args[0]) + ")"
                             : "(-" + print_expr(*e.args[0]) + ")";
    case Expr::Kind::kBinary:
      return "(" + print_expr(*e.args[0]) + " " + e.text + " " + print_expr(*e.args[1]) + ")";
    case Expr::Kind::kCall:
    case Expr::Kind::kRange:
    case Expr::Kind::kChoice:
    case Expr::Kind::kConstant: {
      std::string name = e.kind == Expr::Kind::kRange    ? "Range"
                         : e.kind == Expr::Kind::kChoice ? "Choice"
                         : e.kind == Expr::Kind::kConstant ? "Constant"
                                                           : e.text;
      std::string s = name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) s += ", ";
        s += print_expr(*e.args[i]);
      }
      return s + ")";
    }
  }
  return "";
}

nlohmann::json expr_json(const Expr& e) {
  nlohmann::json j;
  switch (e.kind) {
    case Expr::Kind::kNumber: j["num"] = e.number; break;
    case Expr::Kind::kString: j["str"] = e.text; break;
    case Expr::Kind::kBool: j["bool"] = e.boolean; break;
    case Expr::Kind::kIdent: j["ref"] = e.text; break;
    case Expr::Kind::kUnary: j["unary"] = e.text; break;
    case Expr::Kind::kBinary: j["binary"] = e.text; break;
    case Expr::Kind::kCall: j["call"] = e.text; break;
    case Expr::Kind::kRange: j["dist"] = "Range"; break;
    case Expr::Kind::kChoice: j["dist"] = "Choice"; break;
    case Expr::Kind::kConstant: j["dist"] = "Constant"; break;
  }
  if (!e.feature.empty()) j["feature"] = e.feature;
  if (!e.args.empty()) {
    nlohmann::json args = nlohmann::json::array();
    for (const auto& a : e.args) args.push_back(expr_json(*a));
    j["args"] = std::move(args);
  }
  return j;
}

nlohmann::json kwargs_json(const std::vector<lang::KeywordArg>& args) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& kw : args) j.push_back({{"key", kw.key}, {"value", expr_json(*kw.value)}});
  return j;
}

std::string print_kwargs(const std::vector<lang::KeywordArg>& args) {
  std::string s;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) s += ", ";
    s += args[i].key + " = " + print_expr(*args[i].value);
  }
  return s;
}

}  // namespace

std::string pretty_print(const ScenarioProgram& p) {
  std::ostringstream out;
  if (!p.title.empty()) out << "scenario \"" << p.title << "\"\n";
  out << "map " << p.map.builder << "(" << print_kwargs(p.map.args) << ")\n";
  for (const auto& param : p.params) {
    out << "param " << param.name << " = " << print_expr(*param.value) << "\n";
  }
  for (const auto& a : p.agents) {
    out << (a.is_ego ? "ego " : "agent ") << a.name << " on \"" << a.lane
        << "\" offset = " << print_expr(*a.offset) << " speed = " << print_expr(*a.speed)
        << "\n";
  }
  for (const auto& a : p.agents) {
    for (const auto& s : a.behavior) {
      out << "behavior " << a.name << " " << lang::to_string(s.kind) << "("
          << print_kwargs(s.args) << ")\n";
    }
  }
  out << "predict " << p.predict.target << " at " << print_expr(*p.predict.timepoint) << "\n";
  for (const auto& r : p.requirements) out << "require " << print_expr(*r.condition) << "\n";
  return out.str();
}

nlohmann::json to_json(const ScenarioProgram& p) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& param : p.params) {
    params.push_back({{"name", param.name}, {"value", expr_json(*param.value)}});
  }
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : p.agents) {
    nlohmann::json behavior = nlohmann::json::array();
    for (const auto& s : a.behavior) {
      behavior.push_back({{"step", lang::to_string(s.kind)}, {"args", kwargs_json(s.args)}});
    }
    agents.push_back({{"name", a.name},
                      {"ego", a.is_ego},
                      {"lane", a.lane},
                      {"offset", expr_json(*a.offset)},
                      {"speed", expr_json(*a.speed)},
                      {"behavior", std::move(behavior)}});
  }
  nlohmann::json reqs = nlohmann::json::array();
  for (const auto& r : p.requirements) reqs.push_back(expr_json(*r.condition));
  return {
      {"title", p.title},
      {"map", {{"builder", p.map.builder}, {"args", kwargs_json(p.map.args)}}},
      {"params", std::move(params)},
      {"agents", std::move(agents)},
      {"predict", {{"target", p.predict.target}, {"timepoint", expr_json(*p.predict.timepoint)}}},
      {"require", std::move(reqs)},
  };
}

}  // namespace bpt
