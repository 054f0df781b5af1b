#include "bpt/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "bpt/error.hpp"
#include "bpt/scenario_library.hpp"

namespace bpt {

namespace fs = std::filesystem;

std::uint64_t batch_seed(std::uint64_t run_seed, const std::string& program_id, std::size_t batch) {
  return splitmix64(run_seed ^ fnv1a64(program_id) ^ splitmix64(0x5bd1e995ULL + batch));
}

namespace {

MetricSummary summarize(const std::vector<const SampleRecord*>& records, std::size_t rejected,
                        double mr_distance) {
  MetricSummary m;
  m.n_samples = records.size();
  m.n_rejected = rejected;
  std::vector<double> fdes;
  double ade_sum = 0.0;
  double fde_sum = 0.0;
  for (const SampleRecord* r : records) {
    if (!r->ok()) {
      ++m.n_failed;
      continue;
    }
    ++m.n_evaluated;
    if (r->is_counterexample()) ++m.n_counterexamples;
    ade_sum += r->outcome->min_ade;
    fde_sum += r->outcome->min_fde;
    fdes.push_back(r->outcome->min_fde);
  }
  if (m.n_evaluated > 0) {
    const double n = static_cast<double>(m.n_evaluated);
    m.min_ade = ade_sum / n;
    m.min_fde = fde_sum / n;
    m.miss_rate = miss_rate(fdes, mr_distance);
    m.counterexample_rate = static_cast<double>(m.n_counterexamples) / n;
  }
  return m;
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json summary_json(const MetricSummary& m) {
  return {{"n_samples", m.n_samples},
          {"n_evaluated", m.n_evaluated},
          {"n_counterexamples", m.n_counterexamples},
          {"n_rejected", m.n_rejected},
          {"n_failed", m.n_failed},
          {"minADE", opt(m.min_ade)},
          {"minFDE", opt(m.min_fde)},
          {"MR", opt(m.miss_rate)},
          {"CR", opt(m.counterexample_rate)}};
}

}  // namespace

RunReport run_falsification(const RunConfig& config, const PredictorFactory& factory) {
  config.validate();
  if (config.scenarios.empty()) throw ConfigError("no scenarios configured");
  const MetricSpec spec = config.metric_spec();
  const fs::path library = default_library_dir();

  struct Loaded {
    std::string ref;
    fs::path path;
    ScenarioProgram program;
    std::string tp_feature;
  };
  std::vector<Loaded> programs;
  for (const auto& ref : config.scenarios) {
    const fs::path path = resolve_scenario(ref, library);
    ScenarioProgram program = load_program(path);
    auto tp = timepoint_feature(program);
    if (!tp) throw ConfigError(path.string() + ": the prediction timepoint is not a sampled feature");
    programs.push_back({ref, path, std::move(program), *tp});
  }

  std::vector<std::unique_ptr<Predictor>> predictors;
  for (std::size_t w = 0; w < config.workers; ++w) {
    predictors.push_back(factory ? factory() : make_predictor(config.predictor));
  }
  EvaluationOptions eval_opts;
  eval_opts.k = config.k;
  eval_opts.horizon = config.horizon;
  const SampleCallback callback = [&](const ConcreteScenario& cs, std::size_t worker) {
    return evaluate_sample(cs, *predictors[worker], spec, eval_opts).outcome();
  };

  using Clock = std::chrono::steady_clock;
  const auto run_start = Clock::now();
  RunReport report;
  report.config = config;
  for (const auto& lp : programs) {
    const auto start = Clock::now();
    ScenarioSummary summary;
    summary.scenario = lp.ref;
    summary.path = lp.path.string();
    summary.title = lp.program.title;
    summary.program_id = lp.program.id();
    RunStats scenario_stats;
    std::vector<const SampleRecord*> all;
    std::size_t all_rejected = 0;
    std::vector<FalsifyResult> results;
    results.reserve(config.timepoints.size());
    for (std::size_t b = 0; b < config.timepoints.size(); ++b) {
      FalsifyOptions fo;
      fo.sampler = config.sampler;
      fo.n_samples = config.samples_per_batch;
      fo.seed = batch_seed(config.seed, summary.program_id, b);
      fo.workers = config.workers;
      fo.pinned[lp.tp_feature] = static_cast<double>(config.timepoints[b]);
      fo.index_offset = b * config.samples_per_batch;
      results.push_back(falsify(lp.program, spec, fo, callback));
      FalsifyResult& r = results.back();
      report.reentrancy_violations += r.reentrancy_violations;

      std::vector<const SampleRecord*> batch;
      for (const auto& rec : r.samples) {
        batch.push_back(&rec);
        all.push_back(&rec);
        if (rec.ok()) scenario_stats.record(rec.assignment, rec.is_counterexample());
        report.samples.push_back({lp.ref, config.timepoints[b], rec});
      }
      all_rejected += r.rejected;
      summary.batches.push_back({config.timepoints[b], summarize(batch, r.rejected, spec.mr_distance)});
      for (auto row : r.error_table) {
        row.scenario = summary.path;
        report.error_table.push_back(std::move(row));
      }
    }
    summary.overall = summarize(all, all_rejected, spec.mr_distance);
    try {
      summary.diversity = scenario_diversity(scenario_stats, lp.program.features());
    } catch (const InvalidArgument&) {
      summary.diversity.reset();
    }
    report.scenarios.push_back(std::move(summary));
    report.scenario_seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  }
  report.total_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  return report;
}

nlohmann::json report_json(const RunReport& report) {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& s : report.scenarios) {
    nlohmann::json batches = nlohmann::json::array();
    for (const auto& b : s.batches) {
      nlohmann::json j = summary_json(b.metrics);
      j["timepoint"] = b.timepoint;
      batches.push_back(std::move(j));
    }
    nlohmann::json j = summary_json(s.overall);
    j["scenario"] = s.scenario;
    j["title"] = s.title;
    j["program_id"] = s.program_id;
    j["SD"] = opt(s.diversity);
    j["batches"] = std::move(batches);
    scenarios.push_back(std::move(j));
  }
  return {{"config", to_json(report.config)},
          {"metric_spec", to_json(report.config.metric_spec())},
          {"scenarios", std::move(scenarios)},
          {"n_counterexamples", report.error_table.size()},
          {"reentrancy_violations", report.reentrancy_violations}};
}

void write_outputs(const RunReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("report.json");
    out << report_json(report).dump(2) << "\n";
  }
  {
    nlohmann::json t = {{"total_seconds", report.total_seconds}, {"scenarios", nlohmann::json::array()}};
    for (std::size_t i = 0; i < report.scenarios.size(); ++i) {
      t["scenarios"].push_back({{"scenario", report.scenarios[i].scenario},
                                {"seconds", report.scenario_seconds[i]}});
    }
    auto out = open("timings.json");
    out << t.dump(2) << "\n";
  }
  {
    auto out = open("samples.jsonl");
    for (const auto& s : report.samples) {
      nlohmann::json j = to_json(s.record);
      j["scenario"] = s.scenario;
      j["batch_timepoint"] = s.batch_timepoint;
      out << j.dump() << "\n";
    }
  }
  {
    auto out = open("errors.jsonl");
    for (const auto& row : report.error_table) out << to_json(row).dump() << "\n";
  }
  {
    auto out = open("errors.csv");
    write_error_csv_header(out);
    for (const auto& row : report.error_table) write_error_csv_row(out, row);
  }
}

namespace {

std::string cell(const nlohmann::json& v) {
  if (v.is_null()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v.get<double>());
  return buf;
}

}  // namespace

void render_report(const nlohmann::json& report, std::ostream& out, bool csv) {
  if (!report.contains("scenarios")) throw ConfigError("not a report document");
  if (csv) {
    out << "scenario,timepoint,n_samples,n_evaluated,minADE,minFDE,MR,CR,SD\n";
  } else {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-24s %6s %5s %8s %8s %6s %6s %6s\n", "scenario", "tp", "n",
                  "minADE", "minFDE", "MR", "CR", "SD");
    out << buf;
  }
  for (const auto& s : report["scenarios"]) {
    const std::string name = s.at("scenario").get<std::string>();
    auto emit = [&](const nlohmann::json& row, const std::string& tp, const nlohmann::json& sd) {
      if (csv) {
        out << name << ',' << tp << ',' << row.at("n_samples") << ',' << row.at("n_evaluated") << ','
            << cell(row.at("minADE")) << ',' << cell(row.at("minFDE")) << ',' << cell(row.at("MR"))
            << ',' << cell(row.at("CR")) << ',' << cell(sd) << '\n';
      } else {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%-24s %6s %5zu %8s %8s %6s %6s %6s\n", name.c_str(),
                      tp.c_str(), row.at("n_samples").get<std::size_t>(), cell(row.at("minADE")).c_str(),
                      cell(row.at("minFDE")).c_str(), cell(row.at("MR")).c_str(),
                      cell(row.at("CR")).c_str(), cell(sd).c_str());
        out << buf;
      }
    };
    for (const auto& b : s.at("batches")) emit(b, std::to_string(b.at("timepoint").get<int>()), nullptr);
    emit(s, "all", s.at("SD"));
  }
}

ReplayResult replay(const ErrorTableRow& row, const RunConfig& config, Predictor& predictor) {
  const fs::path path = resolve_scenario(row.scenario, default_library_dir());
  const ScenarioProgram program = load_program(path);
  if (program.id() != row.program_id) {
    throw ProgramMismatchError("program hash mismatch for " + path.string() + ": row has " +
                               row.program_id + ", file hashes to " + program.id());
  }
  ConcretizeResult cr = concretize(program, row.assignment, row.seed);
  if (!cr.accepted()) throw ScenarioError("stored assignment now violates a requirement");
  ReplayResult out;
  out.scenario = std::move(*cr.scenario);
  EvaluationOptions eo;
  eo.k = config.k;
  eo.horizon = config.horizon;
  out.evaluation = evaluate_sample(out.scenario, predictor, config.metric_spec(), eo);
  const auto& scores = out.evaluation.rho.scores;
  if (scores.size() != row.scores.size()) {
    out.max_score_difference = std::numeric_limits<double>::infinity();
  } else {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      out.max_score_difference = std::max(out.max_score_difference, std::abs(scores[i] - row.scores[i]));
    }
  }
  return out;
}

}  // namespace bpt
