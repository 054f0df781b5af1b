// Regenerates golden_requests.jsonl / golden_responses.jsonl: 100 requests
// drawn round-robin from the scenario library, answered by the in-tree
// constant-velocity baseline.
//
//   make_golden <output dir>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bpt/pipeline.hpp"
#include "bpt/samplers.hpp"
#include "bpt/scenario_library.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <output dir>\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::vector<bpt::ScenarioProgram> programs;
  for (const auto& e : std::filesystem::directory_iterator(bpt::default_library_dir())) {
    if (e.path().extension() == ".tsc") programs.push_back(bpt::load_program(e.path()));
  }
  std::sort(programs.begin(), programs.end(),
            [](const auto& a, const auto& b) { return a.id() < b.id(); });

  std::ofstream req(dir / "golden_requests.jsonl"), resp(dir / "golden_responses.jsonl");
  std::vector<bpt::UniformSampler> samplers;
  for (std::size_t i = 0; i < programs.size(); ++i) samplers.emplace_back(programs[i].features(), 2024 + i);

  int written = 0;
  for (std::size_t n = 0; written < 100; ++n) {
    const std::size_t p = n % programs.size();
    const auto cr = bpt::concretize(programs[p], samplers[p].propose(), n);
    if (!cr.accepted()) continue;
    const bpt::Trace trace = bpt::simulate(*cr.scenario, cr.scenario->timepoint + bpt::kHorizon);
    const auto window = bpt::split_trace(trace, cr.scenario->timepoint, cr.scenario->target);
    bpt::PredictionRequest r = bpt::make_request(*cr.scenario, window, bpt::kDefaultCandidates, bpt::kHorizon);
    char name[32];
    std::snprintf(name, sizeof name, "golden-%03d", written);
    r.scenario_id = name;
    // Maps are large; a handful is enough to exercise their encoding.
    if (written >= 5) r.map.reset();
    const std::string id = r.scenario_id + "#0";
    bpt::ConstantVelocityPredictor cv;
    req << bpt::protocol::encode_request(r, id).dump() << '\n';
    resp << bpt::protocol::encode_response(cv.predict(r), id).dump() << '\n';
    ++written;
  }
  std::cout << "wrote " << written << " pairs to " << dir << '\n';
  return 0;
}
