#include "bpt/metrics.hpp"

#include <cmath>

namespace bpt {

double miss_rate(const std::vector<double>& min_fdes, double d) {
  if (min_fdes.empty()) throw InvalidArgument("miss_rate of an empty list");
  if (!(d > 0.0)) throw InvalidArgument("miss distance must be positive");
  std::size_t misses = 0;
  for (double f : min_fdes) misses += f > d ? 1 : 0;
  return static_cast<double>(misses) / static_cast<double>(min_fdes.size());
}

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kMinADE: return "minADE";
    case MetricKind::kMinFDE: return "minFDE";
    case MetricKind::kMissRate: return "MR-miss";
  }
  return "?";
}

MetricKind metric_kind_from_string(const std::string& s) {
  if (s == "minADE") return MetricKind::kMinADE;
  if (s == "minFDE") return MetricKind::kMinFDE;
  if (s == "MR-miss") return MetricKind::kMissRate;
  throw ConfigError("unknown metric '" + s + "'");
}

MetricSpec MetricSpec::defaults(double min_ade_threshold, double min_fde_threshold,
                                double mr_distance) {
  MetricSpec spec;
  spec.entries = {{MetricKind::kMinADE, min_ade_threshold, 1},
                  {MetricKind::kMinFDE, min_fde_threshold, 0},
                  {MetricKind::kMissRate, mr_distance, 0}};
  spec.mr_distance = mr_distance;
  spec.validate();
  return spec;
}

void MetricSpec::validate() const {
  if (entries.empty()) throw ConfigError("metric spec needs at least one entry");
  if (!(mr_distance > 0.0)) throw ConfigError("MR distance must be positive");
  for (const auto& e : entries) {
    if (!(e.threshold > 0.0) || !std::isfinite(e.threshold)) {
      throw ConfigError(std::string(to_string(e.kind)) + " threshold must be positive");
    }
    if (e.level < 0) throw ConfigError("priority levels must be >= 0");
  }
}

bool RhoTuple::is_counterexample() const {
  for (double s : scores) {
    if (s < 0.0) return true;
  }
  return false;
}

RhoTuple rho(const MetricSpec& spec, double min_ade_value, double min_fde_value) {
  if (!std::isfinite(min_ade_value) || !std::isfinite(min_fde_value)) {
    throw InvalidArgument("metric values must be finite");
  }
  RhoTuple r;
  r.scores.reserve(spec.entries.size());
  for (const auto& e : spec.entries) {
    switch (e.kind) {
      case MetricKind::kMinADE: r.scores.push_back(e.threshold - min_ade_value); break;
      case MetricKind::kMinFDE: r.scores.push_back(e.threshold - min_fde_value); break;
      case MetricKind::kMissRate: r.scores.push_back(min_fde_value <= spec.mr_distance ? 1.0 : -1.0); break;
    }
  }
  return r;
}

void RunStats::record(const FeatureAssignment& assignment, bool counterexample) {
  ++n_samples;
  if (counterexample) ++n_counterexamples;
  for (const auto& [name, value] : assignment) {
    if (const double* d = std::get_if<double>(&value)) observations[name].push_back(*d);
  }
}

double counterexample_rate(const RunStats& stats) {
  if (stats.n_samples == 0) throw InvalidArgument("counterexample rate of zero samples");
  return static_cast<double>(stats.n_counterexamples) / static_cast<double>(stats.n_samples);
}

double population_stddev(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("stddev of an empty list");
  const Eigen::Map<const Eigen::ArrayXd> a(values.data(), static_cast<Eigen::Index>(values.size()));
  return std::sqrt((a - a.mean()).square().mean());
}

double scenario_diversity(const RunStats& stats, const std::vector<Feature>& features) {
  double sigma_sum = 0.0;
  double length_sum = 0.0;
  std::size_t eligible = 0;
  for (const auto& f : features) {
    const auto length = f.interval_length();
    if (!length) continue;
    auto it = stats.observations.find(f.name);
    if (it == stats.observations.end() || it->second.size() < 2) {
      throw InvalidArgument("feature '" + f.name + "' needs at least 2 observations");
    }
    sigma_sum += population_stddev(it->second);
    length_sum += *length;
    ++eligible;
  }
  if (eligible == 0) throw InvalidArgument("no Range features for scenario diversity");
  return 2.0 * sigma_sum / length_sum;
}

nlohmann::json to_json(const MetricSpec& spec) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : spec.entries) {
    entries.push_back({{"metric", to_string(e.kind)}, {"threshold", e.threshold}, {"level", e.level}});
  }
  return {{"entries", std::move(entries)}, {"mr_distance", spec.mr_distance}};
}

}  // namespace bpt
