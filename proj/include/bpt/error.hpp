#ifndef BPT_ERROR_HPP_
#define BPT_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bpt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument to a builder or query (bad lane id, non-positive size...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Scenario source diagnostic. Carries a 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line, std::size_t column,
             std::string file = "")
      : Error((file.empty() ? "" : file + ":") + std::to_string(line) + ":" +
              std::to_string(column) + ": " + message),
        message_(std::move(message)),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& message() const { return message_; }
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string message_;
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

/// Bad feature assignment handed to concretize (missing/extra/out of support).
class AssignmentError : public Error {
 public:
  using Error::Error;
};

/// Semantic failure while resolving a scenario (offset off the lane,
/// non-positive behavior parameter, bad timepoint...).
class ScenarioError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  SimulationError(const std::string& agent, std::size_t step,
                  const std::string& what)
      : Error("agent '" + agent + "' at step " + std::to_string(step) + ": " +
              what),
        agent_(agent),
        step_(step) {}

  const std::string& agent() const { return agent_; }
  std::size_t step() const { return step_; }

 private:
  std::string agent_;
  std::size_t step_;
};

class PredictorError : public Error {
 public:
  enum class Kind { kMalformedOutput, kTimeout, kCrashed, kLaunchFailed, kInvalidInput };

  PredictorError(Kind kind, std::string scenario_id, const std::string& what)
      : Error(std::string(kind_name(kind)) + " [" + scenario_id + "]: " + what),
        kind_(kind),
        scenario_id_(std::move(scenario_id)) {}

  Kind kind() const { return kind_; }
  const std::string& scenario_id() const { return scenario_id_; }

  static const char* kind_name(Kind kind) {
    switch (kind) {
      case Kind::kMalformedOutput: return "malformed predictor output";
      case Kind::kTimeout: return "predictor timeout";
      case Kind::kCrashed: return "predictor crashed";
      case Kind::kLaunchFailed: return "predictor launch failed";
      case Kind::kInvalidInput: return "predictor cannot handle input";
    }
    return "predictor error";
  }

 private:
  Kind kind_;
  std::string scenario_id_;
};

/// Replay of an error-table row against a program whose hash differs from
/// the one that produced the row.
class ProgramMismatchError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bpt

#endif  // BPT_ERROR_HPP_
