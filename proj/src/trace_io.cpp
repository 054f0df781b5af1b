#include <cstdio>

#include "bpt/kinematic_sim.hpp"

namespace bpt {

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "timestep,agent_id,x,y,heading,speed\n";
  char buf[160];
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    for (std::size_t a = 0; a < trace.agent_names.size(); ++a) {
      const AgentState& s = trace.steps[t][a];
      std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g,%.17g\n", t,
                    trace.agent_names[a].c_str(), s.position.x(), s.position.y(), s.heading,
                    s.speed);
      out << buf;
    }
  }
}

nlohmann::json to_json(const Trace& trace) {
  nlohmann::json agents = nlohmann::json::object();
  for (std::size_t a = 0; a < trace.agent_names.size(); ++a) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& snap : trace.steps) {
      const AgentState& s = snap[a];
      rows.push_back({s.position.x(), s.position.y(), s.heading, s.speed});
    }
    agents[trace.agent_names[a]] = std::move(rows);
  }
  return {{"dt", trace.dt}, {"length", trace.length()}, {"agents", std::move(agents)}};
}

}  // namespace bpt
