#ifndef BPT_PIPELINE_HPP_
#define BPT_PIPELINE_HPP_

#include <cstddef>
#include <functional>

#include "bpt/concrete_scenario.hpp"
#include "bpt/falsifier.hpp"
#include "bpt/kinematic_sim.hpp"
#include "bpt/metrics.hpp"
#include "bpt/predictor.hpp"

namespace bpt {

struct EvaluationOptions {
  std::size_t k = kDefaultCandidates;
  std::size_t horizon = kHorizon;
  SimParams sim;
};

struct Evaluation {
  Trace trace;
  TraceWindow window;
  PredictionRequest request;
  PredictionSet prediction;
  double min_ade = 0.0;
  double min_fde = 0.0;
  RhoTuple rho;

  SampleOutcome outcome() const { return {rho, min_ade, min_fde}; }
};

/// Builds the request for `scenario`'s target from a trace window.
PredictionRequest make_request(const ConcreteScenario& scenario, const TraceWindow& window,
                               std::size_t k, std::size_t horizon);

/// simulate -> split_trace -> predict -> metrics -> rho. `before_predict`
/// sees the window (including the future truth) before the model runs.
Evaluation evaluate_sample(const ConcreteScenario& scenario, Predictor& predictor,
                           const MetricSpec& spec, const EvaluationOptions& options = {},
                           const std::function<void(const TraceWindow&)>& before_predict = {});

}  // namespace bpt

#endif  // BPT_PIPELINE_HPP_
