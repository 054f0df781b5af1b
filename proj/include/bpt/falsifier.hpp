#ifndef BPT_FALSIFIER_HPP_
#define BPT_FALSIFIER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpt/concrete_scenario.hpp"
#include "bpt/metrics.hpp"
#include "bpt/samplers.hpp"
#include "bpt/scenario_lang.hpp"

namespace bpt {

/// What the per-sample callback reports back to the search loop.
struct SampleOutcome {
  RhoTuple rho;
  double min_ade = 0.0;
  double min_fde = 0.0;
};

/// Runs simulate + predict + evaluate for one concrete scenario. `worker` is
/// the index of the executing pool thread, so callers can keep per-worker
/// state such as predictor processes.
using SampleCallback = std::function<SampleOutcome(const ConcreteScenario&, std::size_t worker)>;

/// One line of the per-sample log.
struct SampleRecord {
  std::size_t index = 0;
  FeatureAssignment assignment;
  std::uint64_t seed = 0;
  int timepoint = 0;
  /// Requirement rejections drawn before this assignment was accepted.
  std::size_t rejections = 0;
  std::optional<SampleOutcome> outcome;
  /// Set when concretization or the callback failed.
  std::string error;

  bool ok() const { return outcome.has_value(); }
  bool is_counterexample() const { return outcome && outcome->rho.is_counterexample(); }
};

struct ErrorTableRow {
  /// Scenario label (library id or file path); filled in by the runner.
  std::string scenario;
  std::size_t sample_index = 0;
  FeatureAssignment assignment;
  std::uint64_t seed = 0;
  std::vector<double> scores;
  double min_ade = 0.0;
  double min_fde = 0.0;
  int timepoint = 0;
  std::string program_id;
};

struct FalsifyOptions {
  SamplerKind sampler = SamplerKind::kUniform;
  std::size_t n_samples = 30;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  /// Features held fixed (removed from the search space).
  FeatureAssignment pinned;
  MabOptions mab;
  std::size_t max_rejections = 100;
  /// Added to sample indices (keeps indices unique across batches).
  std::size_t index_offset = 0;
};

struct FalsifyResult {
  RunStats stats;
  std::vector<ErrorTableRow> error_table;
  std::vector<SampleRecord> samples;
  std::size_t rejected = 0;
  std::size_t failed = 0;
  /// Times the sampler was entered while already active. Always 0 unless
  /// the sequential-sampling contract is broken.
  std::size_t reentrancy_violations = 0;
};

/// Per-sample seed derived from the run seed and the sample index.
std::uint64_t sample_seed(std::uint64_t run_seed, std::size_t index);

/// propose -> concretize (rejection resampling) -> callback -> feed, for
/// n_samples samples. The calling thread owns the sampler; callbacks run on
/// `workers` pool threads. Results are reported in sample-index order.
/// Throws ScenarioError when max_rejections consecutive draws violate a
/// requirement.
FalsifyResult falsify(const ScenarioProgram& program, const MetricSpec& spec,
                      const FalsifyOptions& options, const SampleCallback& callback);

nlohmann::json to_json(const SampleRecord& record);
nlohmann::json to_json(const ErrorTableRow& row);
ErrorTableRow error_row_from_json(const nlohmann::json& j);

/// Columns: scenario, program_id, sample_index, seed, timepoint, min_ade,
/// min_fde, scores (';'-separated), assignment (JSON object).
void write_error_csv_header(std::ostream& out);
void write_error_csv_row(std::ostream& out, const ErrorTableRow& row);

}  // namespace bpt

#endif  // BPT_FALSIFIER_HPP_
