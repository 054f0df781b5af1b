#ifndef BPT_RUN_CONFIG_HPP_
#define BPT_RUN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpt/metrics.hpp"
#include "bpt/predictor.hpp"
#include "bpt/samplers.hpp"

namespace bpt {

struct RunConfig {
  /// Scenario file paths or library ids (e.g. "S1").
  std::vector<std::string> scenarios;
  SamplerKind sampler = SamplerKind::kUniform;
  std::size_t samples_per_batch = 30;
  std::vector<int> timepoints{20, 40, 60, 80};
  double min_ade_threshold = 0.1;
  double min_fde_threshold = 1.0;
  double mr_distance = 1.0;
  std::size_t k = kDefaultCandidates;
  std::size_t horizon = kHorizon;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  PredictorSpec predictor;
  std::string output_dir = "out";

  MetricSpec metric_spec() const {
    return MetricSpec::defaults(min_ade_threshold, min_fde_threshold, mr_distance);
  }
  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

/// Sets one key from its text form. Throws ConfigError for unknown keys or
/// unparsable values. Lists are written `[a, b]` or `a,b`.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// `key = value` lines, `#` comments, optional double quotes around values.
/// Relative scenario paths are resolved against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

nlohmann::json to_json(const RunConfig& config);

}  // namespace bpt

#endif  // BPT_RUN_CONFIG_HPP_
