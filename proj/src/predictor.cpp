#include <cmath>
#include <cstdio>
#include <fstream>

#include "bpt/error.hpp"
#include "bpt/predictor.hpp"

namespace bpt {

const AgentHistory& PredictionRequest::target_history() const {
  for (const auto& h : history) {
    if (h.agent == target_agent) return h;
  }
  throw InvalidArgument("target agent '" + target_agent + "' has no history");
}

void validate_request(const PredictionRequest& request, std::size_t history_length) {
  if (request.history.empty()) throw InvalidArgument("request has no agent histories");
  if (request.k == 0) throw InvalidArgument("k must be at least 1");
  if (request.horizon == 0) throw InvalidArgument("horizon must be at least 1");
  for (const auto& h : request.history) {
    if (static_cast<std::size_t>(h.states.rows()) != history_length) {
      throw InvalidArgument("history of '" + h.agent + "' has " +
                            std::to_string(h.states.rows()) + " entries, expected " +
                            std::to_string(history_length));
    }
    if (!h.states.allFinite()) throw InvalidArgument("history of '" + h.agent + "' is not finite");
  }
  request.target_history();
}

void validate_prediction_set(const PredictionSet& set, std::size_t k, std::size_t horizon,
                             const std::string& scenario_id) {
  auto bad = [&](const std::string& what) {
    throw PredictorError(PredictorError::Kind::kMalformedOutput, scenario_id, what);
  };
  if (set.candidates.size() != k) {
    bad("expected " + std::to_string(k) + " candidates, got " +
        std::to_string(set.candidates.size()));
  }
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    const auto& c = set.candidates[i];
    if (static_cast<std::size_t>(c.rows()) != horizon) {
      bad("candidate " + std::to_string(i) + " has " + std::to_string(c.rows()) +
          " points, expected " + std::to_string(horizon));
    }
    if (!c.allFinite()) bad("candidate " + std::to_string(i) + " has non-finite coordinates");
  }
  if (set.confidences) {
    if (set.confidences->size() != k) bad("confidences must have one entry per candidate");
    double sum = 0.0;
    for (double c : *set.confidences) {
      if (!std::isfinite(c) || c < 0.0) bad("confidences must be finite and non-negative");
      sum += c;
    }
    if (sum > 1.0 + 1e-6) bad("confidences sum to more than 1");
  }
}

PredictionSet Predictor::predict(const PredictionRequest& request) {
  validate_request(request);
  PredictionSet out = do_predict(request);
  validate_prediction_set(out, request.k, request.horizon, request.scenario_id);
  return out;
}

PredictionSet ConstantVelocityPredictor::do_predict(const PredictionRequest& request) {
  return builtin_constant_velocity(request.target_history().states, request.k, request.horizon,
                                   request.dt);
}

PredictionSet LaneFollowPredictor::do_predict(const PredictionRequest& request) {
  if (!request.map) {
    throw PredictorError(PredictorError::Kind::kInvalidInput, request.scenario_id,
                         "lane_follow needs a map");
  }
  return builtin_lane_follow(request.target_history().states, *request.map, request.k,
                             request.horizon, request.dt, request.scenario_id);
}

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec) {
  if (spec.kind == "constant_velocity") return std::make_unique<ConstantVelocityPredictor>();
  if (spec.kind == "lane_follow") return std::make_unique<LaneFollowPredictor>();
  if (spec.kind == "external") {
    if (spec.command.empty()) throw ConfigError("external predictor needs a command");
    return std::make_unique<ExternalPredictor>(spec.command, spec.timeout_s);
  }
  throw ConfigError("unknown predictor '" + spec.kind + "'");
}

namespace protocol {

nlohmann::json hello() { return {{"hello", {{"protocol", kVersion}}}}; }

nlohmann::json encode_request(const PredictionRequest& request, const std::string& id) {
  nlohmann::json history = nlohmann::json::object();
  for (const auto& h : request.history) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < h.states.rows(); ++r) {
      rows.push_back({h.states(r, 0), h.states(r, 1), h.states(r, 2)});
    }
    history[h.agent] = std::move(rows);
  }
  nlohmann::json map = {{"lanes", nlohmann::json::array()}};
  if (request.map) map["lanes"] = to_json(*request.map)["lanes"];
  return {{"id", id},
          {"k", request.k},
          {"horizon", request.horizon},
          {"dt", request.dt},
          {"target", request.target_agent},
          {"history", std::move(history)},
          {"map", std::move(map)}};
}

PredictionRequest decode_request(const nlohmann::json& j) {
  try {
    PredictionRequest r;
    r.scenario_id = j.at("id").get<std::string>();
    r.k = j.at("k").get<std::size_t>();
    r.horizon = j.at("horizon").get<std::size_t>();
    r.dt = j.value("dt", kDt);
    r.target_agent = j.at("target").get<std::string>();
    for (const auto& [agent, rows] : j.at("history").items()) {
      AgentHistory h{agent, HistoryMatrix(static_cast<Eigen::Index>(rows.size()), 3)};
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int c = 0; c < 3; ++c) h.states(static_cast<Eigen::Index>(i), c) = rows.at(i).at(c).get<double>();
      }
      r.history.push_back(std::move(h));
    }
    if (j.contains("map") && !j["map"].at("lanes").empty()) {
      r.map = std::make_shared<const RoadNetwork>(road_network_from_json(j["map"]));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed request: ") + e.what());
  }
}

nlohmann::json encode_response(const PredictionSet& set, const std::string& id) {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& c : set.candidates) {
    nlohmann::json pts = nlohmann::json::array();
    for (Eigen::Index r = 0; r < c.rows(); ++r) pts.push_back({c(r, 0), c(r, 1)});
    preds.push_back(std::move(pts));
  }
  nlohmann::json out = {{"id", id}, {"predictions", std::move(preds)}};
  if (set.confidences) out["confidences"] = *set.confidences;
  return out;
}

PredictionSet decode_response(const nlohmann::json& j, const std::string& expected_id,
                              std::size_t k, std::size_t horizon, const std::string& scenario_id) {
  auto bad = [&](const std::string& what) -> PredictorError {
    return PredictorError(PredictorError::Kind::kMalformedOutput, scenario_id, what);
  };
  if (!j.is_object()) throw bad("response is not a JSON object");
  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>() != expected_id) {
    throw bad("response id does not match request id '" + expected_id + "'");
  }
  if (j.contains("error")) throw bad("adapter reported error: " + j["error"].dump());
  if (!j.contains("predictions") || !j["predictions"].is_array()) {
    throw bad("response has no predictions array");
  }
  PredictionSet set;
  for (const auto& cand : j["predictions"]) {
    if (!cand.is_array()) throw bad("candidate is not an array");
    Trajectoryd t(static_cast<Eigen::Index>(cand.size()), 2);
    for (std::size_t i = 0; i < cand.size(); ++i) {
      const auto& p = cand[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw bad("prediction points must be [x, y] number pairs");
      }
      t(static_cast<Eigen::Index>(i), 0) = p[0].get<double>();
      t(static_cast<Eigen::Index>(i), 1) = p[1].get<double>();
    }
    set.candidates.push_back(std::move(t));
  }
  if (j.contains("confidences") && !j["confidences"].is_null()) {
    std::vector<double> conf;
    if (!j["confidences"].is_array()) throw bad("confidences must be an array");
    for (const auto& c : j["confidences"]) {
      if (!c.is_number()) throw bad("confidences must be numbers");
      conf.push_back(c.get<double>());
    }
    set.confidences = std::move(conf);
  }
  validate_prediction_set(set, k, horizon, scenario_id);
  return set;
}

}  // namespace protocol

void write_argoverse_csv(const PredictionRequest& request, std::ostream& out) {
  if (request.history.empty()) throw InvalidArgument("request has no agents");
  out << "timestep,agent_id,x,y\n";
  char buf[128];
  const Eigen::Index n = request.history.front().states.rows();
  for (Eigen::Index t = 0; t < n; ++t) {
    for (const auto& h : request.history) {
      if (h.states.rows() != n) throw InvalidArgument("histories differ in length");
      std::snprintf(buf, sizeof buf, "%ld,%s,%.17g,%.17g\n", static_cast<long>(t), h.agent.c_str(),
                    h.states(t, 0), h.states(t, 1));
      out << buf;
    }
  }
}

std::filesystem::path export_argoverse_csv(const PredictionRequest& request,
                                           const std::filesystem::path& directory) {
  const auto path = directory / (request.scenario_id + ".csv");
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  write_argoverse_csv(request, out);
  if (!out) throw InvalidArgument("failed writing " + path.string());
  return path;
}

}  // namespace bpt
