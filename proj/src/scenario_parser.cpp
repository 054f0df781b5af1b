// Recursive-descent parser plus semantic analysis for .tsc scenario programs.
// See docs/grammar.md for the grammar.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "bpt/error.hpp"
#include "bpt/scenario_lang.hpp"
#include "scenario_lexer.hpp"

namespace bpt {

using lang::Expr;
using lang::ExprPtr;
using lang::KeywordArg;
using lang::SourcePos;
using lang::StepKind;
using lang::Token;
using lang::TokenKind;
using lang::Type;

class ProgramBuilder {
 public:
  static void finish(ScenarioProgram& p, std::shared_ptr<const RoadNetwork> network,
                     std::vector<Feature> features) {
    p.network_ = std::move(network);
    p.features_ = std::move(features);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json(p).dump())));
    p.id_ = buf;
  }
};

namespace {

constexpr int kMaxDepth = 200;

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = {
      "scenario", "map",   "param", "ego",      "agent",    "behavior", "predict",
      "require",  "on",    "at",    "and",      "or",       "not",      "true",
      "false",    "Range", "Choice", "Constant", "left",    "right",    "straight",
      "initial_dist", "abs", "sqrt", "min", "max"};
  return words;
}

bool is_symbol(const std::string& s) {
  return s == "left" || s == "right" || s == "straight";
}

const char* type_name(Type t) {
  switch (t) {
    case Type::kNumber: return "number";
    case Type::kBool: return "bool";
    case Type::kString: return "symbol";
  }
  return "?";
}

struct StepSignature {
  StepKind kind;
  const char* name;
  std::vector<std::pair<const char*, Type>> required;
  std::vector<std::pair<const char*, Type>> optional;
};

const std::vector<StepSignature>& step_signatures() {
  static const std::vector<StepSignature> sigs = {
      {StepKind::kFollowLane, "FollowLane", {{"target_speed", Type::kNumber}},
       {{"duration", Type::kNumber}}},
      {StepKind::kLaneChange, "LaneChange",
       {{"direction", Type::kString}, {"duration", Type::kNumber}}, {}},
      {StepKind::kTurnAtIntersection, "TurnAtIntersection",
       {{"maneuver", Type::kString}, {"target_speed", Type::kNumber}}, {}},
      {StepKind::kStopAndWait, "StopAndWait", {{"clear_radius", Type::kNumber}}, {}},
      {StepKind::kBrakeOnCollisionRisk, "BrakeOnCollisionRisk", {},
       {{"ttc_threshold", Type::kNumber}}},
  };
  return sigs;
}

enum class Slot { kParam, kAgentInit, kStepArg, kTimepoint, kRequire };

class Parser {
 public:
  explicit Parser(std::string_view source) : tokens_(lang::tokenize(source)) {}

  ScenarioProgram run() {
    while (peek().kind != TokenKind::kEnd) {
      if (accept(TokenKind::kNewline)) continue;
      statement();
    }
    finish_checks();
    std::vector<Feature> features = collect_features();
    ProgramBuilder::finish(program_, network_, std::move(features));
    return std::move(program_);
  }

 private:
  // ---- token helpers -------------------------------------------------------
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool accept(TokenKind k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg, SourcePos pos) const {
    throw ParseError(msg, pos.line, pos.column);
  }
  [[noreturn]] void fail_expected(const std::string& what) const {
    const Token& t = peek();
    std::string got = t.kind == TokenKind::kIdent || t.kind == TokenKind::kNumber
                          ? "'" + t.text + "'"
                          : describe(t.kind);
    fail("syntax error: expected " + what + ", got " + got, t.pos);
  }
  const Token& expect(TokenKind k) {
    if (peek().kind != k) fail_expected(describe(k));
    return next();
  }
  const Token& expect_ident(const char* what) {
    if (peek().kind != TokenKind::kIdent) fail_expected(what);
    return next();
  }
  void expect_keyword(const char* kw) {
    if (peek().kind != TokenKind::kIdent || peek().text != kw) {
      fail_expected(std::string("'") + kw + "'");
    }
    next();
  }
  void end_of_statement() {
    if (peek().kind != TokenKind::kNewline && peek().kind != TokenKind::kEnd) {
      fail_expected("end of line");
    }
    accept(TokenKind::kNewline);
  }
  std::string fresh_name(const Token& t, const char* what) {
    if (reserved_words().count(t.text)) {
      fail("'" + t.text + "' is a reserved word and cannot name " + what, t.pos);
    }
    return t.text;
  }

  // ---- statements ----------------------------------------------------------
  void statement() {
    const Token& kw = expect_ident("a statement keyword");
    const std::string word = kw.text;
    const SourcePos pos = kw.pos;
    if (word == "scenario") {
      if (seen_title_) fail("duplicate scenario title", pos);
      seen_title_ = true;
      program_.title = expect(TokenKind::kString).text;
    } else if (word == "map") {
      map_statement(pos);
    } else if (word == "param") {
      param_statement(pos);
    } else if (word == "ego" || word == "agent") {
      agent_statement(pos, word == "ego");
    } else if (word == "behavior") {
      behavior_statement(pos);
    } else if (word == "predict") {
      predict_statement(pos);
    } else if (word == "require") {
      lang::RequireDecl req;
      req.pos = pos;
      req.condition = expression(Slot::kRequire);
      if (req.condition->type != Type::kBool) {
        fail(std::string("type mismatch: require needs a bool condition, got ") +
                 type_name(req.condition->type),
             req.condition->pos);
      }
      program_.requirements.push_back(std::move(req));
    } else {
      fail("syntax error: unknown statement '" + word + "'", pos);
    }
    end_of_statement();
  }

  void map_statement(SourcePos pos) {
    if (network_) fail("duplicate map declaration", pos);
    if (!program_.agents.empty()) fail("map must be declared before agents", pos);
    program_.map.pos = pos;
    const Token& builder = expect_ident("map builder name");
    program_.map.builder = builder.text;
    expect(TokenKind::kLParen);
    std::map<std::string, double> values;
    if (peek().kind != TokenKind::kRParen) {
      do {
        const Token& key = expect_ident("argument name");
        expect(TokenKind::kAssign);
        ExprPtr value = literal_number();
        if (values.count(key.text)) fail("duplicate argument '" + key.text + "'", key.pos);
        values[key.text] = value->number;
        program_.map.args.push_back({key.text, std::move(value)});
      } while (accept(TokenKind::kComma));
    }
    expect(TokenKind::kRParen);

    // Sizes past these are typos, and would allocate millions of points.
    auto take = [&](const char* key, SourcePos at, double max) {
      auto it = values.find(key);
      if (it == values.end()) fail(std::string("map argument '") + key + "' is required", at);
      double v = it->second;
      if (v > max) fail(std::string("invalid map: ") + key + " exceeds " + std::to_string(static_cast<int>(max)), at);
      values.erase(it);
      return v;
    };
    try {
      if (builder.text == "straight") {
        const double n = take("n_lanes", pos, 64);
        const double length = take("length", pos, 10000);
        const double width = take("lane_width", pos, 100);
        check_no_extra(values, pos);
        if (n != std::floor(n)) fail("type mismatch: n_lanes must be an integer", pos);
        network_ = std::make_shared<const RoadNetwork>(
            build_straight_road(static_cast<int>(std::max(n, -1.0)), length, width));
      } else if (builder.text == "intersection") {
        const double arms = take("arms", pos, 64);
        const double length = take("arm_length", pos, 10000);
        const double width = take("lane_width", pos, 100);
        check_no_extra(values, pos);
        if (arms != std::floor(arms)) fail("type mismatch: arms must be an integer", pos);
        network_ = std::make_shared<const RoadNetwork>(
            build_intersection(static_cast<int>(std::max(arms, -1.0)), length, width));
      } else {
        fail("unknown identifier: map builder '" + builder.text + "'", builder.pos);
      }
    } catch (const InvalidArgument& e) {
      fail(std::string("invalid map: ") + e.what(), pos);
    }
  }

  void check_no_extra(const std::map<std::string, double>& rest, SourcePos pos) {
    if (!rest.empty()) fail("unknown map argument '" + rest.begin()->first + "'", pos);
  }

  void param_statement(SourcePos pos) {
    const Token& name_tok = expect_ident("parameter name");
    const std::string name = fresh_name(name_tok, "a parameter");
    if (param_types_.count(name)) fail("duplicate feature '" + name + "'", name_tok.pos);
    if (agent_names_.count(name)) fail("'" + name + "' already names an agent", name_tok.pos);
    expect(TokenKind::kAssign);
    lang::ParamDecl decl;
    decl.name = name;
    decl.pos = pos;
    decl.value = expression(Slot::kParam);
    param_types_[name] = decl.value->type;
    hoist(decl.value, name);
    program_.params.push_back(std::move(decl));
  }

  void agent_statement(SourcePos pos, bool is_ego) {
    if (!network_) fail("map must be declared before agents", pos);
    const Token& name_tok = expect_ident("agent name");
    lang::AgentDecl agent;
    agent.name = fresh_name(name_tok, "an agent");
    agent.is_ego = is_ego;
    agent.pos = pos;
    if (agent_names_.count(agent.name) || param_types_.count(agent.name)) {
      fail("duplicate name '" + agent.name + "'", name_tok.pos);
    }
    expect_keyword("on");
    const Token& lane_tok = peek();
    if (lane_tok.kind != TokenKind::kIdent && lane_tok.kind != TokenKind::kString) {
      fail_expected("lane reference");
    }
    next();
    if (!network_->has_lane(lane_tok.text)) {
      fail("unknown identifier: lane '" + lane_tok.text + "' is not in the map", lane_tok.pos);
    }
    agent.lane = lane_tok.text;

    const std::string prefix = "agent" + std::to_string(program_.agents.size()) + ".init.";
    while (peek().kind == TokenKind::kIdent) {
      const Token& key = next();
      expect(TokenKind::kAssign);
      ExprPtr value = expression(Slot::kAgentInit);
      require_type(value, Type::kNumber, key.text);
      if (key.text == "offset" && !agent.offset) {
        agent.offset = value;
        hoist(value, prefix + "offset");
      } else if (key.text == "speed" && !agent.speed) {
        agent.speed = value;
        hoist(value, prefix + "speed");
      } else {
        fail("unexpected agent attribute '" + key.text + "'", key.pos);
      }
    }
    if (!agent.offset) fail("agent '" + agent.name + "' needs offset = <expr>", pos);
    if (!agent.speed) fail("agent '" + agent.name + "' needs speed = <expr>", pos);
    agent_names_[agent.name] = program_.agents.size();
    program_.agents.push_back(std::move(agent));
  }

  void behavior_statement(SourcePos pos) {
    const Token& who = expect_ident("agent name");
    auto it = agent_names_.find(who.text);
    if (it == agent_names_.end()) {
      fail("unknown identifier: agent '" + who.text + "'", who.pos);
    }
    const std::size_t agent_index = it->second;
    const Token& step_tok = expect_ident("behavior step");
    const StepSignature* sig = nullptr;
    for (const auto& s : step_signatures()) {
      if (step_tok.text == s.name) sig = &s;
    }
    if (sig == nullptr) {
      fail("unknown identifier: behavior step '" + step_tok.text + "'", step_tok.pos);
    }
    lang::StepDecl step;
    step.kind = sig->kind;
    step.pos = pos;
    auto& agent = program_.agents[agent_index];
    const std::string prefix = "agent" + std::to_string(agent_index) + ".behavior" +
                               std::to_string(agent.behavior.size()) + ".";
    expect(TokenKind::kLParen);
    if (peek().kind != TokenKind::kRParen) {
      do {
        const Token& key = expect_ident("argument name");
        expect(TokenKind::kAssign);
        ExprPtr value = expression(Slot::kStepArg);
        const std::pair<const char*, Type>* spec = nullptr;
        for (const auto& r : sig->required) {
          if (key.text == r.first) spec = &r;
        }
        for (const auto& o : sig->optional) {
          if (key.text == o.first) spec = &o;
        }
        if (spec == nullptr) {
          fail("unknown argument '" + key.text + "' for " + sig->name, key.pos);
        }
        if (step.arg(key.text) != nullptr) {
          fail("duplicate argument '" + key.text + "'", key.pos);
        }
        require_type(value, spec->second, key.text);
        if (key.text == "direction") check_symbol_values(value, {"left", "right"});
        if (key.text == "maneuver") check_symbol_values(value, {"left", "right", "straight"});
        hoist(value, prefix + key.text);
        step.args.push_back({key.text, std::move(value)});
      } while (accept(TokenKind::kComma));
    }
    expect(TokenKind::kRParen);
    for (const auto& r : sig->required) {
      if (step.arg(r.first) == nullptr) {
        fail(std::string(sig->name) + " requires argument '" + r.first + "'", step_tok.pos);
      }
    }
    agent.behavior.push_back(std::move(step));
  }

  void predict_statement(SourcePos pos) {
    if (seen_predict_) fail("duplicate predict declaration", pos);
    seen_predict_ = true;
    const Token& who = expect_ident("agent name");
    if (!agent_names_.count(who.text)) {
      fail("unknown identifier: agent '" + who.text + "'", who.pos);
    }
    expect_keyword("at");
    program_.predict.target = who.text;
    program_.predict.pos = pos;
    program_.predict.timepoint = expression(Slot::kTimepoint);
    require_type(program_.predict.timepoint, Type::kNumber, "timepoint");
    check_timepoint(program_.predict.timepoint);
    hoist(program_.predict.timepoint, "predict.timepoint");
  }

  void finish_checks() {
    const SourcePos end = peek().pos;
    if (!network_) fail("missing map declaration", end);
    std::size_t egos = 0;
    for (const auto& a : program_.agents) {
      if (a.is_ego) ++egos;
      if (a.behavior.empty()) fail("agent '" + a.name + "' has no behavior", a.pos);
    }
    if (egos == 0) fail("missing ego declaration", end);
    if (egos > 1) fail("more than one ego declared", end);
    if (!seen_predict_) fail("missing predict declaration", end);
  }

  // ---- expressions ---------------------------------------------------------
  ExprPtr make(Expr::Kind kind, SourcePos pos, Type type) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->pos = pos;
    e->type = type;
    return e;
  }

  void require_type(const ExprPtr& e, Type want, const std::string& what) {
    if (e->type != want) {
      fail("type mismatch: '" + what + "' expects " + type_name(want) + ", got " +
               type_name(e->type),
           e->pos);
    }
  }

  ExprPtr expression(Slot slot) {
    slot_ = slot;
    depth_ = 0;
    return or_expr();
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) p.fail("expression nested too deeply", p.peek().pos);
    }
    ~DepthGuard() { --p.depth_; }
  };

  bool at_word(const char* w) const {
    return peek().kind == TokenKind::kIdent && peek().text == w;
  }

  ExprPtr logical(ExprPtr (Parser::*sub)(), const char* op) {
    DepthGuard guard(*this);
    ExprPtr lhs = (this->*sub)();
    while (at_word(op)) {
      const SourcePos pos = next().pos;
      ExprPtr rhs = (this->*sub)();
      require_type(lhs, Type::kBool, op);
      require_type(rhs, Type::kBool, op);
      ExprPtr e = make(Expr::Kind::kBinary, pos, Type::kBool);
      e->text = op;
      e->args = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr or_expr() { return logical(&Parser::and_expr, "or"); }
  ExprPtr and_expr() { return logical(&Parser::not_expr, "and"); }

  ExprPtr not_expr() {
    DepthGuard guard(*this);
    if (at_word("not")) {
      const SourcePos pos = next().pos;
      ExprPtr operand = not_expr();
      require_type(operand, Type::kBool, "not");
      ExprPtr e = make(Expr::Kind::kUnary, pos, Type::kBool);
      e->text = "not";
      e->args = {operand};
      return e;
    }
    return comparison();
  }

  ExprPtr comparison() {
    DepthGuard guard(*this);
    ExprPtr lhs = additive();
    const TokenKind k = peek().kind;
    if (k == TokenKind::kLess || k == TokenKind::kLessEq || k == TokenKind::kGreater ||
        k == TokenKind::kGreaterEq || k == TokenKind::kEqEq || k == TokenKind::kNotEq) {
      const Token& op = next();
      ExprPtr rhs = additive();
      if (k == TokenKind::kEqEq || k == TokenKind::kNotEq) {
        if (lhs->type != rhs->type) {
          fail(std::string("type mismatch: cannot compare ") + type_name(lhs->type) +
                   " with " + type_name(rhs->type),
               op.pos);
        }
      } else {
        require_type(lhs, Type::kNumber, op.text);
        require_type(rhs, Type::kNumber, op.text);
      }
      ExprPtr e = make(Expr::Kind::kBinary, op.pos, Type::kBool);
      e->text = op.text;
      e->args = {lhs, rhs};
      return e;
    }
    return lhs;
  }

  ExprPtr arithmetic_chain(ExprPtr (Parser::*sub)(), TokenKind a, TokenKind b) {
    DepthGuard guard(*this);
    ExprPtr lhs = (this->*sub)();
    while (peek().kind == a || peek().kind == b) {
      const Token& op = next();
      ExprPtr rhs = (this->*sub)();
      require_type(lhs, Type::kNumber, op.text);
      require_type(rhs, Type::kNumber, op.text);
      ExprPtr e = make(Expr::Kind::kBinary, op.pos, Type::kNumber);
      e->text = op.text;
      e->args = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr additive() {
    return arithmetic_chain(&Parser::multiplicative, TokenKind::kPlus, TokenKind::kMinus);
  }
  ExprPtr multiplicative() {
    return arithmetic_chain(&Parser::unary, TokenKind::kStar, TokenKind::kSlash);
  }

  ExprPtr unary() {
    DepthGuard guard(*this);
    if (peek().kind == TokenKind::kMinus) {
      const SourcePos pos = next().pos;
      if (peek().kind == TokenKind::kNumber) {
        ExprPtr lit = make(Expr::Kind::kNumber, pos, Type::kNumber);
        lit->number = -next().number;
        return lit;
      }
      ExprPtr operand = unary();
      require_type(operand, Type::kNumber, "-");
      ExprPtr e = make(Expr::Kind::kUnary, pos, Type::kNumber);
      e->text = "-";
      e->args = {operand};
      return e;
    }
    return primary();
  }

  ExprPtr literal_number() {
    const SourcePos pos = peek().pos;
    double sign = 1.0;
    if (accept(TokenKind::kMinus)) sign = -1.0;
    if (peek().kind != TokenKind::kNumber) fail_expected("number literal");
    ExprPtr lit = make(Expr::Kind::kNumber, pos, Type::kNumber);
    lit->number = sign * next().number;
    return lit;
  }

  FeatureValue literal_value(Type& type) {
    const Token& t = peek();
    if (t.kind == TokenKind::kString || (t.kind == TokenKind::kIdent && is_symbol(t.text))) {
      type = Type::kString;
      return next().text;
    }
    type = Type::kNumber;
    return literal_number()->number;
  }

  ExprPtr primary() {
    DepthGuard guard(*this);
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kNumber: {
        ExprPtr e = make(Expr::Kind::kNumber, t.pos, Type::kNumber);
        e->number = next().number;
        return e;
      }
      case TokenKind::kString: {
        ExprPtr e = make(Expr::Kind::kString, t.pos, Type::kString);
        e->text = next().text;
        return e;
      }
      case TokenKind::kLParen: {
        next();
        ExprPtr inner = or_expr();
        expect(TokenKind::kRParen);
        return inner;
      }
      case TokenKind::kIdent:
        break;
      default:
        fail_expected("expression");
    }
    const Token& id = next();
    const std::string& name = id.text;
    if (name == "true" || name == "false") {
      ExprPtr e = make(Expr::Kind::kBool, id.pos, Type::kBool);
      e->boolean = name == "true";
      return e;
    }
    if (is_symbol(name)) {
      ExprPtr e = make(Expr::Kind::kString, id.pos, Type::kString);
      e->text = name;
      return e;
    }
    if (peek().kind == TokenKind::kLParen) return call(id);
    auto pit = param_types_.find(name);
    if (pit != param_types_.end()) {
      ExprPtr e = make(Expr::Kind::kIdent, id.pos, pit->second);
      e->text = name;
      return e;
    }
    fail("unknown identifier '" + name + "'", id.pos);
  }

  ExprPtr call(const Token& fn) {
    const SourcePos pos = fn.pos;
    const std::string& name = fn.text;
    expect(TokenKind::kLParen);
    if (name == "Range" || name == "Choice" || name == "Constant") {
      if (slot_ == Slot::kRequire) {
        fail("distributions are not allowed in require", pos);
      }
      if (name == "Range") {
        ExprPtr lo = literal_number();
        expect(TokenKind::kComma);
        ExprPtr hi = literal_number();
        expect(TokenKind::kRParen);
        if (!(lo->number < hi->number)) fail("Range requires lo < hi", pos);
        ExprPtr e = make(Expr::Kind::kRange, pos, Type::kNumber);
        e->args = {lo, hi};
        return e;
      }
      if (name == "Constant") {
        Type type = Type::kNumber;
        FeatureValue v = literal_value(type);
        expect(TokenKind::kRParen);
        ExprPtr e = make(Expr::Kind::kConstant, pos, type);
        e->args = {value_node(v, pos)};
        return e;
      }
      ExprPtr e = make(Expr::Kind::kChoice, pos, Type::kNumber);
      if (peek().kind == TokenKind::kRParen) fail("Choice requires at least one value", pos);
      bool first = true;
      do {
        Type type = Type::kNumber;
        const SourcePos vpos = peek().pos;
        FeatureValue v = literal_value(type);
        if (first) {
          e->type = type;
          first = false;
        } else if (type != e->type) {
          fail("type mismatch: Choice values must share one scalar type", vpos);
        }
        e->args.push_back(value_node(v, vpos));
      } while (accept(TokenKind::kComma));
      expect(TokenKind::kRParen);
      return e;
    }

    std::vector<ExprPtr> args;
    std::vector<Token> raw_idents;
    if (name == "initial_dist") {
      if (slot_ != Slot::kRequire) fail("initial_dist is only allowed in require", pos);
      for (int i = 0; i < 2; ++i) {
        if (i > 0) expect(TokenKind::kComma);
        const Token& a = expect_ident("agent name");
        if (!agent_names_.count(a.text)) {
          fail("unknown identifier: agent '" + a.text + "'", a.pos);
        }
        ExprPtr ref = make(Expr::Kind::kIdent, a.pos, Type::kString);
        ref->text = a.text;
        args.push_back(ref);
      }
      expect(TokenKind::kRParen);
      ExprPtr e = make(Expr::Kind::kCall, pos, Type::kNumber);
      e->text = name;
      e->args = std::move(args);
      return e;
    }
    std::size_t arity = 0;
    if (name == "abs" || name == "sqrt") {
      arity = 1;
    } else if (name == "min" || name == "max") {
      arity = 2;
    } else {
      fail("unknown identifier: function '" + name + "'", pos);
    }
    if (peek().kind != TokenKind::kRParen) {
      do {
        ExprPtr a = or_expr();
        require_type(a, Type::kNumber, name);
        args.push_back(a);
      } while (accept(TokenKind::kComma));
    }
    expect(TokenKind::kRParen);
    if (args.size() != arity) {
      fail(name + " expects " + std::to_string(arity) + " argument(s)", pos);
    }
    ExprPtr e = make(Expr::Kind::kCall, pos, Type::kNumber);
    e->text = name;
    e->args = std::move(args);
    return e;
  }

  ExprPtr value_node(const FeatureValue& v, SourcePos pos) {
    if (const double* d = std::get_if<double>(&v)) {
      ExprPtr e = make(Expr::Kind::kNumber, pos, Type::kNumber);
      e->number = *d;
      return e;
    }
    ExprPtr e = make(Expr::Kind::kString, pos, Type::kString);
    e->text = std::get<std::string>(v);
    return e;
  }

  // ---- static checks -------------------------------------------------------

  // Possible values of an expression when statically known. Returns false when
  // the expression is continuous (contains a Range reachable without
  // arithmetic); `known` is false when the value depends on arithmetic.
  bool static_values(const Expr& e, std::vector<FeatureValue>& out, bool& known) const {
    switch (e.kind) {
      case Expr::Kind::kNumber: out.push_back(e.number); return true;
      case Expr::Kind::kString: out.push_back(e.text); return true;
      case Expr::Kind::kConstant: return static_values(*e.args[0], out, known);
      case Expr::Kind::kChoice:
        for (const auto& a : e.args) static_values(*a, out, known);
        return true;
      case Expr::Kind::kRange: return false;
      case Expr::Kind::kIdent: {
        const lang::ParamDecl* p = program_.find_param(e.text);
        if (p == nullptr) {
          known = false;
          return true;
        }
        return static_values(*p->value, out, known);
      }
      default: known = false; return true;
    }
  }

  void check_timepoint(const ExprPtr& e) {
    std::vector<FeatureValue> values;
    bool known = true;
    if (!static_values(*e, values, known)) {
      fail("type mismatch: timepoint must be an integer (use Choice, not Range)", e->pos);
    }
    if (!known) return;
    for (const auto& v : values) {
      const double d = std::get<double>(v);
      if (d != std::floor(d) || d < 20) {
        fail("timepoint must be an integer >= 20", e->pos);
      }
    }
  }

  void check_symbol_values(const ExprPtr& e, std::initializer_list<const char*> allowed) {
    std::vector<FeatureValue> values;
    bool known = true;
    static_values(*e, values, known);
    if (!known) return;
    for (const auto& v : values) {
      const std::string& s = std::get<std::string>(v);
      if (std::none_of(allowed.begin(), allowed.end(),
                       [&](const char* a) { return s == a; })) {
        fail("invalid value '" + s + "'", e->pos);
      }
    }
  }

  // ---- feature hoisting ----------------------------------------------------
  void collect_distributions(const ExprPtr& e, std::vector<Expr*>& out) {
    if (e->kind == Expr::Kind::kRange || e->kind == Expr::Kind::kChoice) {
      out.push_back(e.get());
      return;
    }
    for (const auto& a : e->args) collect_distributions(a, out);
  }

  void hoist(const ExprPtr& e, const std::string& path) {
    std::vector<Expr*> nodes;
    collect_distributions(e, nodes);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      nodes[i]->feature = nodes.size() == 1 ? path : path + "." + std::to_string(i);
    }
  }

  static Distribution distribution_of(const Expr& e) {
    if (e.kind == Expr::Kind::kRange) return Distribution::range(e.args[0]->number, e.args[1]->number);
    std::vector<FeatureValue> values;
    for (const auto& a : e.args) {
      if (a->kind == Expr::Kind::kNumber) {
        values.push_back(a->number);
      } else {
        values.push_back(a->text);
      }
    }
    return Distribution::choice(std::move(values));
  }

  std::vector<Feature> collect_features() {
    std::vector<Feature> features;
    auto add = [&](const ExprPtr& e) {
      std::vector<Expr*> nodes;
      collect_distributions(e, nodes);
      for (Expr* n : nodes) features.push_back({n->feature, distribution_of(*n)});
    };
    for (const auto& p : program_.params) add(p.value);
    for (const auto& a : program_.agents) {
      add(a.offset);
      add(a.speed);
      for (const auto& s : a.behavior) {
        for (const auto& kw : s.args) add(kw.value);
      }
    }
    add(program_.predict.timepoint);
    return features;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  Slot slot_ = Slot::kParam;
  ScenarioProgram program_;
  std::shared_ptr<const RoadNetwork> network_;
  std::map<std::string, Type> param_types_;
  std::map<std::string, std::size_t> agent_names_;
  bool seen_title_ = false;
  bool seen_predict_ = false;
};

}  // namespace

ScenarioProgram parse(std::string_view source) { return Parser(source).run(); }

}  // namespace bpt
