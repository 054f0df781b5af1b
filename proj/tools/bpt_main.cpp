// bpt: command-line front end of the falsification platform.
//
//   bpt run       --config run.cfg [overrides]
//   bpt benchmark [--workers 1,2,5] [--iterations 25,50,75,100] [--mode spin]
//   bpt replay    --errors out/errors.jsonl [--row N]
//   bpt validate  [files...] [--library DIR]
//   bpt report    out/report.json [--csv]
//
// Exit codes: 0 ok, 1 usage/config, 2 scenario parse error, 3 predictor failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "bpt/benchmark.hpp"
#include "bpt/error.hpp"
#include "bpt/run_config.hpp"
#include "bpt/runner.hpp"
#include "bpt/scenario_library.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitPredictor = 3;

struct Overrides {
  std::string config;
  std::map<std::string, std::string> values;
};

// Registers a string-valued flag that, when given, overrides `key`.
void override_flag(CLI::App* app, Overrides& o, const std::string& flag, const std::string& key,
                   const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.values[key] = v; }, help);
}

void add_run_options(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "Run configuration file (key = value)");
  app->add_option_function<std::vector<std::string>>(
      "-s,--scenario",
      [&o](const std::vector<std::string>& v) {
        std::string joined;
        for (const auto& s : v) joined += (joined.empty() ? "" : ",") + s;
        o.values["scenarios"] = joined;
      },
      "Scenario file or library id (repeatable)");
  override_flag(app, o, "--sampler", "sampler", "uniform | halton | mab");
  override_flag(app, o, "--samples", "samples_per_batch", "Samples per timepoint batch");
  override_flag(app, o, "--timepoints", "timepoints", "Comma-separated timepoints");
  override_flag(app, o, "--min-ade", "min_ade_threshold", "minADE threshold (m)");
  override_flag(app, o, "--min-fde", "min_fde_threshold", "minFDE threshold (m)");
  override_flag(app, o, "--mr-distance", "mr_distance", "Miss distance d (m)");
  override_flag(app, o, "-k", "k", "Candidates per prediction");
  override_flag(app, o, "--horizon", "horizon", "Prediction horizon (steps)");
  override_flag(app, o, "-w,--workers", "workers", "Worker threads");
  override_flag(app, o, "--seed", "seed", "Run seed");
  override_flag(app, o, "--predictor", "predictor", "constant_velocity | lane_follow | external");
  override_flag(app, o, "--predictor-cmd", "predictor_command", "External predictor command");
  override_flag(app, o, "--predictor-timeout", "predictor_timeout", "External timeout (s)");
  override_flag(app, o, "-o,--out", "output_dir", "Output directory");
}

bpt::RunConfig build_config(const Overrides& o) {
  bpt::RunConfig c = o.config.empty() ? bpt::RunConfig{} : bpt::load_config(o.config);
  for (const auto& [key, value] : o.values) bpt::apply_setting(c, key, value);
  c.validate();
  return c;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const unsigned long v = std::stoul(item, &pos);
    if (pos != item.size()) throw bpt::ConfigError("invalid count '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw bpt::ConfigError("empty count list");
  return out;
}

int cmd_run(const Overrides& o) {
  const bpt::RunConfig config = build_config(o);
  const bpt::RunReport report = bpt::run_falsification(config);
  bpt::write_outputs(report, config.output_dir);
  bpt::render_report(bpt::report_json(report), std::cout, false);
  std::cout << report.error_table.size() << " counterexamples; outputs in " << config.output_dir
            << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string workers = "1,2,5";
  std::string iterations = "25,50,75,100";
  double work_ms = 200.0;
  std::string mode = "spin";
};

int cmd_benchmark(const BenchArgs& a, const Overrides& o) {
  bpt::BenchmarkOptions opts;
  opts.workers = parse_counts(a.workers);
  opts.iterations = parse_counts(a.iterations);
  opts.work_ms = a.work_ms;
  opts.work = bpt::benchmark_work_from_string(a.mode);
  const bpt::RunConfig config = build_config(o);
  opts.seed = config.seed;
  opts.sampler = config.sampler;
  if (opts.work == bpt::BenchmarkWork::kReal) opts.real = config;
  const auto cells = bpt::run_benchmark(opts);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  const auto path = std::filesystem::path(config.output_dir) / "benchmark.csv";
  std::ofstream out(path);
  if (!out) throw bpt::ConfigError("cannot write " + path.string());
  bpt::write_benchmark_csv(cells, out);
  bpt::write_benchmark_csv(cells, std::cout);
  const std::size_t top = opts.iterations.back();
  for (std::size_t w : opts.workers) {
    if (w == 1) continue;
    std::printf("speedup w%zu at %zu iterations: %.2fx\n", w, top, bpt::speedup(cells, w, top));
  }
  return kExitOk;
}

int cmd_replay(const std::string& errors_file, int row_index, const Overrides& o) {
  const bpt::RunConfig config = build_config(o);
  std::ifstream in(errors_file);
  if (!in) throw bpt::ConfigError("cannot read " + errors_file);
  std::vector<bpt::ErrorTableRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(bpt::error_row_from_json(nlohmann::json::parse(line)));
  }
  if (row_index >= 0) {
    if (static_cast<std::size_t>(row_index) >= rows.size()) {
      throw bpt::ConfigError("row " + std::to_string(row_index) + " out of range");
    }
    rows = {rows[static_cast<std::size_t>(row_index)]};
  }
  auto predictor = bpt::make_predictor(config.predictor);
  int mismatches = 0;
  for (const auto& row : rows) {
    const auto r = bpt::replay(row, config, *predictor);
    const bool same = r.max_score_difference <= 1e-9;
    mismatches += same ? 0 : 1;
    std::printf("sample %zu: minADE %.6f minFDE %.6f max |d score| %.3g %s\n", row.sample_index,
                r.evaluation.min_ade, r.evaluation.min_fde, r.max_score_difference,
                same ? "reproduced" : "MISMATCH");
  }
  return mismatches == 0 ? kExitOk : kExitUsage;
}

int cmd_validate(const std::vector<std::string>& files, const std::string& library) {
  if (files.empty()) {
    const auto dir = library.empty() ? bpt::default_library_dir() : std::filesystem::path(library);
    const auto entries = bpt::load_library(dir);
    int id_width = 0;
    for (const auto& e : entries) id_width = std::max(id_width, static_cast<int>(e.id.size()));
    for (const auto& e : entries) {
      std::printf("ok  %-*s %-18s %2zu features  %s\n", id_width, e.id.c_str(), e.category.c_str(),
                  e.program->features().size(), e.title.c_str());
    }
    std::printf("%zu scenarios valid\n", entries.size());
    return kExitOk;
  }
  for (const auto& f : files) {
    const auto program = bpt::load_program(f);
    bpt::smoke_simulate(program, 0);
    std::printf("ok  %s (%zu features, id %s)\n", f.c_str(), program.features().size(),
                program.id().c_str());
  }
  return kExitOk;
}

int cmd_report(const std::string& file, bool csv) {
  std::ifstream in(file);
  if (!in) throw bpt::ConfigError("cannot read " + file);
  bpt::render_report(nlohmann::json::parse(in), std::cout, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-based falsification of trajectory predictors"};
  app.require_subcommand(1);

  Overrides run_o;
  auto* run = app.add_subcommand("run", "Run falsification batches and write reports");
  add_run_options(run, run_o);

  Overrides bench_o;
  BenchArgs bench_a;
  auto* bench = app.add_subcommand("benchmark", "Time sequential vs parallel execution");
  add_run_options(bench, bench_o);
  bench->add_option("--worker-counts", bench_a.workers, "Worker counts, comma-separated");
  bench->add_option("--iterations", bench_a.iterations, "Iteration counts, comma-separated");
  bench->add_option("--work-ms", bench_a.work_ms, "Synthetic work per sample (ms)");
  bench->add_option("--mode", bench_a.mode, "spin | cpu | real");

  Overrides replay_o;
  std::string errors_file;
  int row_index = -1;
  auto* rep = app.add_subcommand("replay", "Re-run error-table rows and compare scores");
  add_run_options(rep, replay_o);
  rep->add_option("-e,--errors", errors_file, "errors.jsonl from a run")->required();
  rep->add_option("--row", row_index, "Only this row (0-based)");

  std::vector<std::string> files;
  std::string library;
  auto* val = app.add_subcommand("validate", "Parse, check and smoke-simulate scenario files");
  val->add_option("files", files, "Scenario files (default: the shipped library)");
  val->add_option("--library", library, "Library directory to validate");

  std::string report_file;
  bool csv = false;
  auto* rpt = app.add_subcommand("report", "Render report.json as a table");
  rpt->add_option("report", report_file, "report.json")->required();
  rpt->add_flag("--csv", csv, "CSV instead of plain text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_o);
    if (*bench) return cmd_benchmark(bench_a, bench_o);
    if (*rep) return cmd_replay(errors_file, row_index, replay_o);
    if (*val) return cmd_validate(files, library);
    if (*rpt) return cmd_report(report_file, csv);
  } catch (const bpt::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const bpt::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitParse;
  } catch (const bpt::PredictorError& e) {
    std::cerr << "predictor error: " << e.what() << "\n";
    return kExitPredictor;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
