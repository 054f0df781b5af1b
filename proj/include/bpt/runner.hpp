#ifndef BPT_RUNNER_HPP_
#define BPT_RUNNER_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpt/falsifier.hpp"
#include "bpt/pipeline.hpp"
#include "bpt/run_config.hpp"

namespace bpt {

/// Aggregates over the evaluated (non-failed) samples of one group.
struct MetricSummary {
  std::size_t n_samples = 0;
  std::size_t n_evaluated = 0;
  std::size_t n_counterexamples = 0;
  std::size_t n_rejected = 0;
  std::size_t n_failed = 0;
  std::optional<double> min_ade;
  std::optional<double> min_fde;
  std::optional<double> miss_rate;
  std::optional<double> counterexample_rate;
};

struct BatchSummary {
  int timepoint = 0;
  MetricSummary metrics;
};

struct ScenarioSummary {
  std::string scenario;  // reference as given in the config
  std::string path;
  std::string title;
  std::string program_id;
  std::vector<BatchSummary> batches;
  MetricSummary overall;
  /// Scenario diversity over the Range features; empty when undefined.
  std::optional<double> diversity;
};

struct LoggedSample {
  std::string scenario;
  int batch_timepoint = 0;
  SampleRecord record;
};

struct RunReport {
  RunConfig config;
  std::vector<ScenarioSummary> scenarios;
  std::vector<ErrorTableRow> error_table;
  std::vector<LoggedSample> samples;
  std::size_t reentrancy_violations = 0;
  /// Wall-clock seconds per scenario (kept out of report.json so that file
  /// stays reproducible).
  std::vector<double> scenario_seconds;
  double total_seconds = 0.0;
};

using PredictorFactory = std::function<std::unique_ptr<Predictor>()>;

/// For each scenario and each configured timepoint, runs one falsify()
/// batch with the timepoint feature pinned. One predictor per worker.
/// Throws ParseError/ConfigError for bad inputs and PredictorError when a
/// predictor cannot be launched.
RunReport run_falsification(const RunConfig& config, const PredictorFactory& factory = {});

/// Deterministic report document (config echo, summaries; no timings).
nlohmann::json report_json(const RunReport& report);

/// Writes report.json, timings.json, samples.jsonl, errors.jsonl and
/// errors.csv into `directory` (created if needed).
void write_outputs(const RunReport& report, const std::filesystem::path& directory);

/// Plain-text or CSV table of a report.json document.
void render_report(const nlohmann::json& report, std::ostream& out, bool csv);

struct ReplayResult {
  ConcreteScenario scenario;
  Evaluation evaluation;
  /// Largest |replayed - stored| score difference.
  double max_score_difference = 0.0;
};

/// Re-runs one error-table row. Throws ProgramMismatchError when the
/// scenario file no longer hashes to the row's program id.
ReplayResult replay(const ErrorTableRow& row, const RunConfig& config, Predictor& predictor);

/// Seed of batch `batch` of a scenario.
std::uint64_t batch_seed(std::uint64_t run_seed, const std::string& program_id, std::size_t batch);

}  // namespace bpt

#endif  // BPT_RUNNER_HPP_
