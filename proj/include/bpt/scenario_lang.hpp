#ifndef BPT_SCENARIO_LANG_HPP_
#define BPT_SCENARIO_LANG_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpt/road_model.hpp"

namespace bpt {

/// Value a feature can take: a real or a symbol such as "left".
using FeatureValue = std::variant<double, std::string>;
using FeatureAssignment = std::map<std::string, FeatureValue>;

nlohmann::json to_json(const FeatureValue& v);
FeatureValue feature_value_from_json(const nlohmann::json& j);
std::string to_string(const FeatureValue& v);

struct Distribution {
  enum class Kind { kRange, kChoice, kConstant };

  Kind kind = Kind::kConstant;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<FeatureValue> values;  // Choice values, or the single Constant

  static Distribution range(double lo, double hi);
  static Distribution choice(std::vector<FeatureValue> values);
  static Distribution constant(FeatureValue value);

  bool contains(const FeatureValue& v) const;
};

struct Feature {
  std::string name;
  Distribution distribution;

  /// hi - lo for Range features; empty for Choice/Constant.
  std::optional<double> interval_length() const;
};

namespace lang {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

enum class Type { kNumber, kBool, kString };

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class Kind {
    kNumber,
    kString,
    kBool,
    kIdent,
    kUnary,   // text: "-" or "not"
    kBinary,  // text: operator
    kCall,    // text: function name (initial_dist, abs, sqrt, min, max)
    kRange,
    kChoice,
    kConstant,
  };

  Kind kind = Kind::kNumber;
  SourcePos pos;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<ExprPtr> args;
  Type type = Type::kNumber;
  /// Set on Range/Choice nodes: the feature this node samples from.
  std::string feature;
};

struct KeywordArg {
  std::string key;
  ExprPtr value;
};

struct MapDecl {
  std::string builder;  // "straight" or "intersection"
  std::vector<KeywordArg> args;
  SourcePos pos;
};

struct ParamDecl {
  std::string name;
  ExprPtr value;
  SourcePos pos;
};

enum class StepKind {
  kFollowLane,
  kLaneChange,
  kTurnAtIntersection,
  kStopAndWait,
  kBrakeOnCollisionRisk,
};

const char* to_string(StepKind kind);

struct StepDecl {
  StepKind kind = StepKind::kFollowLane;
  std::vector<KeywordArg> args;
  SourcePos pos;

  const Expr* arg(std::string_view key) const;
};

struct AgentDecl {
  std::string name;
  bool is_ego = false;
  LaneId lane;
  ExprPtr offset;
  ExprPtr speed;
  std::vector<StepDecl> behavior;
  SourcePos pos;
};

struct PredictDecl {
  std::string target;
  ExprPtr timepoint;
  SourcePos pos;
};

struct RequireDecl {
  ExprPtr condition;
  SourcePos pos;
};

}  // namespace lang

/// A parsed, semantically checked abstract scenario. Immutable once
/// returned from parse().
class ScenarioProgram {
 public:
  std::string title;
  lang::MapDecl map;
  std::vector<lang::ParamDecl> params;
  std::vector<lang::AgentDecl> agents;
  lang::PredictDecl predict;
  std::vector<lang::RequireDecl> requirements;

  const RoadNetwork& network() const { return *network_; }
  std::shared_ptr<const RoadNetwork> shared_network() const { return network_; }
  const std::vector<Feature>& features() const { return features_; }

  /// FNV-1a of the canonical AST dump, hex encoded.
  const std::string& id() const { return id_; }

  const lang::AgentDecl* find_agent(std::string_view name) const;
  const lang::ParamDecl* find_param(std::string_view name) const;

 private:
  friend class ProgramBuilder;
  std::shared_ptr<const RoadNetwork> network_;
  std::vector<Feature> features_;
  std::string id_;
};

/// Parses and checks a scenario program. Throws ParseError with line/column.
ScenarioProgram parse(std::string_view source);

/// Non-constant params plus hoisted inline distributions, in declaration
/// order.
std::vector<Feature> feature_space(const ScenarioProgram& program);

/// Canonical source text; parse(pretty_print(p)) is structurally equal to p.
std::string pretty_print(const ScenarioProgram& program);

/// Canonical AST dump (no source positions), stable key order.
nlohmann::json to_json(const ScenarioProgram& program);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace bpt

#endif  // BPT_SCENARIO_LANG_HPP_
