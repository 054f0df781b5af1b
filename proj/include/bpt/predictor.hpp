#ifndef BPT_PREDICTOR_HPP_
#define BPT_PREDICTOR_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpt/geometry.hpp"
#include "bpt/kinematic_sim.hpp"
#include "bpt/road_model.hpp"

namespace bpt {

inline constexpr std::size_t kDefaultCandidates = 6;

struct PredictionRequest {
  std::string scenario_id;
  /// One entry per agent, each exactly 20 (x, y, heading) rows at 10 Hz.
  std::vector<AgentHistory> history;
  std::shared_ptr<const RoadNetwork> map;
  std::string target_agent;
  std::size_t horizon = kHorizon;
  std::size_t k = kDefaultCandidates;
  double dt = kDt;

  /// Throws InvalidArgument when the target has no history.
  const AgentHistory& target_history() const;
};

/// Throws InvalidArgument naming the first violated request invariant.
void validate_request(const PredictionRequest& request,
                      std::size_t history_length = kHistoryLength);

struct PredictionSet {
  std::vector<Trajectoryd> candidates;
  std::optional<std::vector<double>> confidences;
};

/// Boundary check applied to every predictor's output: exactly k candidates
/// of exactly `horizon` finite points; confidences (if any) are k finite
/// non-negative reals summing to at most 1 + 1e-6. Throws PredictorError
/// (kMalformedOutput) carrying `scenario_id`.
void validate_prediction_set(const PredictionSet& set, std::size_t k, std::size_t horizon,
                             const std::string& scenario_id);

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;

  /// Validates the request, runs the model and validates its output.
  PredictionSet predict(const PredictionRequest& request);

 protected:
  virtual PredictionSet do_predict(const PredictionRequest& request) = 0;
};

/// Least-squares velocity over the last `window` rows of `history`.
Vec2d estimate_velocity(const HistoryMatrix& history, double dt, std::size_t window = 10);

/// Candidate 0 extrapolates the fitted velocity; candidate i >= 1 rotates it
/// by 5 deg * ceil(i / 2), counter-clockwise for odd i.
PredictionSet builtin_constant_velocity(const HistoryMatrix& history, std::size_t k,
                                        std::size_t horizon, double dt = kDt);

/// Arc-length advance at the fitted speed along successor routes from the
/// nearest lane (straight, left, right order); extra candidates reuse the
/// routes at 0.8x and 1.2x speed. Throws PredictorError (kInvalidInput) when
/// no lane lies within twice its width of the last position.
PredictionSet builtin_lane_follow(const HistoryMatrix& history, const RoadNetwork& map,
                                  std::size_t k, std::size_t horizon, double dt = kDt,
                                  const std::string& scenario_id = "");

class ConstantVelocityPredictor : public Predictor {
 public:
  std::string name() const override { return "constant_velocity"; }

 protected:
  PredictionSet do_predict(const PredictionRequest& request) override;
};

class LaneFollowPredictor : public Predictor {
 public:
  std::string name() const override { return "lane_follow"; }

 protected:
  PredictionSet do_predict(const PredictionRequest& request) override;
};

/// Out-of-process predictor speaking the line-delimited JSON protocol over
/// the child's stdin/stdout. The command runs under /bin/sh. The process is
/// started (and the handshake done) in the constructor; after a crash or
/// timeout it is restarted on the next call.
class ExternalPredictor : public Predictor {
 public:
  explicit ExternalPredictor(std::string command, double timeout_s = 30.0);
  ~ExternalPredictor() override;
  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  std::string name() const override { return name_; }
  const std::string& command() const { return command_; }

 protected:
  PredictionSet do_predict(const PredictionRequest& request) override;

 private:
  void start(const std::string& scenario_id);
  void stop();
  void write_line(const std::string& line, const std::string& scenario_id);
  std::string read_line(const std::string& scenario_id);

  std::string command_;
  double timeout_s_;
  std::string name_ = "external";
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::size_t next_id_ = 0;
};

struct PredictorSpec {
  /// "constant_velocity", "lane_follow", or "external".
  std::string kind = "constant_velocity";
  std::string command;
  double timeout_s = 30.0;
};

/// Throws ConfigError for unknown kinds, PredictorError on launch failure.
std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec);

namespace protocol {

inline constexpr int kVersion = 1;

nlohmann::json hello();
nlohmann::json encode_request(const PredictionRequest& request, const std::string& id);
/// Inverse of encode_request (for adapters and fixtures).
PredictionRequest decode_request(const nlohmann::json& j);
nlohmann::json encode_response(const PredictionSet& set, const std::string& id);
/// Parses and validates a response line; shape errors are kMalformedOutput.
PredictionSet decode_response(const nlohmann::json& j, const std::string& expected_id,
                              std::size_t k, std::size_t horizon, const std::string& scenario_id);

}  // namespace protocol

/// Argoverse-style CSV (timestep,agent_id,x,y): 20 rows per agent.
void write_argoverse_csv(const PredictionRequest& request, std::ostream& out);
/// Writes <directory>/<scenario_id>.csv and returns its path.
std::filesystem::path export_argoverse_csv(const PredictionRequest& request,
                                           const std::filesystem::path& directory);

}  // namespace bpt

#endif  // BPT_PREDICTOR_HPP_
