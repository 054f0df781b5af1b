#include "bpt/pipeline.hpp"

#include <cstdio>

namespace bpt {

PredictionRequest make_request(const ConcreteScenario& scenario, const TraceWindow& window,
                               std::size_t k, std::size_t horizon) {
  char id[40];
  std::snprintf(id, sizeof id, "%s-%016llx", scenario.program_id.c_str(),
                static_cast<unsigned long long>(scenario.seed));
  PredictionRequest r;
  r.scenario_id = id;
  r.history = window.history;
  r.map = scenario.network;
  r.target_agent = scenario.target;
  r.horizon = horizon;
  r.k = k;
  return r;
}

Evaluation evaluate_sample(const ConcreteScenario& scenario, Predictor& predictor,
                           const MetricSpec& spec, const EvaluationOptions& options,
                           const std::function<void(const TraceWindow&)>& before_predict) {
  Evaluation ev;
  const std::size_t n_steps = static_cast<std::size_t>(scenario.timepoint) + options.horizon;
  ev.trace = simulate(scenario, n_steps, options.horizon, options.sim);
  ev.window = split_trace(ev.trace, scenario.timepoint, scenario.target, kHistoryLength,
                          options.horizon);
  ev.request = make_request(scenario, ev.window, options.k, options.horizon);
  if (before_predict) before_predict(ev.window);
  ev.prediction = predictor.predict(ev.request);
  ev.min_ade = min_ade(ev.prediction, ev.window.future_truth);
  ev.min_fde = min_fde(ev.prediction, ev.window.future_truth);
  ev.rho = rho(spec, ev.min_ade, ev.min_fde);
  return ev;
}

}  // namespace bpt
