#ifndef BPT_METRICS_HPP_
#define BPT_METRICS_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bpt/error.hpp"
#include "bpt/geometry.hpp"
#include "bpt/predictor.hpp"
#include "bpt/scenario_lang.hpp"

namespace bpt {

namespace detail {

template <typename A, typename B>
void check_same_shape(const Eigen::MatrixBase<A>& pred, const Eigen::MatrixBase<B>& truth) {
  if (pred.rows() == 0) throw InvalidArgument("empty trajectory");
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw InvalidArgument("trajectory length mismatch: " + std::to_string(pred.rows()) + " vs " +
                          std::to_string(truth.rows()));
  }
}

}  // namespace detail

/// Average displacement error over T points.
template <typename A, typename B>
typename A::Scalar ade(const Eigen::MatrixBase<A>& pred, const Eigen::MatrixBase<B>& truth) {
  detail::check_same_shape(pred, truth);
  return (pred - truth).rowwise().norm().mean();
}

/// Final displacement error.
template <typename A, typename B>
typename A::Scalar fde(const Eigen::MatrixBase<A>& pred, const Eigen::MatrixBase<B>& truth) {
  detail::check_same_shape(pred, truth);
  const Eigen::Index last = pred.rows() - 1;
  return (pred.row(last) - truth.row(last)).norm();
}

template <typename Scalar, typename B>
Scalar min_ade(const std::vector<Trajectory<Scalar>>& candidates, const Eigen::MatrixBase<B>& truth) {
  if (candidates.empty()) throw InvalidArgument("empty candidate set");
  Scalar best = ade(candidates.front(), truth);
  for (std::size_t i = 1; i < candidates.size(); ++i) best = std::min(best, ade(candidates[i], truth));
  return best;
}

template <typename Scalar, typename B>
Scalar min_fde(const std::vector<Trajectory<Scalar>>& candidates, const Eigen::MatrixBase<B>& truth) {
  if (candidates.empty()) throw InvalidArgument("empty candidate set");
  Scalar best = fde(candidates.front(), truth);
  for (std::size_t i = 1; i < candidates.size(); ++i) best = std::min(best, fde(candidates[i], truth));
  return best;
}

template <typename B>
double min_ade(const PredictionSet& set, const Eigen::MatrixBase<B>& truth) {
  return min_ade(set.candidates, truth);
}

template <typename B>
double min_fde(const PredictionSet& set, const Eigen::MatrixBase<B>& truth) {
  return min_fde(set.candidates, truth);
}

/// Fraction of per-sample minFDE values strictly above d.
double miss_rate(const std::vector<double>& min_fdes, double d);

enum class MetricKind { kMinADE, kMinFDE, kMissRate };

const char* to_string(MetricKind kind);
MetricKind metric_kind_from_string(const std::string& s);

struct MetricEntry {
  MetricKind kind = MetricKind::kMinFDE;
  double threshold = 1.0;
  /// Priority level; 0 is the most important.
  int level = 0;
};

struct MetricSpec {
  std::vector<MetricEntry> entries;
  /// Miss distance d for the MR-miss entry and the set-level miss rate.
  double mr_distance = 1.0;

  /// minADE (level 1), minFDE (level 0), MR-miss (level 0, threshold d).
  static MetricSpec defaults(double min_ade_threshold = 0.1, double min_fde_threshold = 1.0,
                             double mr_distance = 1.0);
  /// Throws ConfigError on an empty spec, a non-positive threshold or d, or
  /// a negative level.
  void validate() const;
};

struct RhoTuple {
  std::vector<double> scores;

  /// True iff some score is strictly negative.
  bool is_counterexample() const;
};

/// threshold - metric for minADE/minFDE; +1 / -1 for MR-miss depending on
/// minFDE <= d.
RhoTuple rho(const MetricSpec& spec, double min_ade_value, double min_fde_value);

/// Accumulated per-run statistics (owned by the falsifier loop).
struct RunStats {
  std::size_t n_samples = 0;
  std::size_t n_counterexamples = 0;
  /// Observed numeric values per feature, in sample order.
  std::map<std::string, std::vector<double>> observations;

  void record(const FeatureAssignment& assignment, bool counterexample);
};

double counterexample_rate(const RunStats& stats);

/// 2 * sum(sigma_i) / sum(L_i) over Range features, sigma the population
/// standard deviation of the observed values.
double scenario_diversity(const RunStats& stats, const std::vector<Feature>& features);

/// Population standard deviation.
double population_stddev(const std::vector<double>& values);

nlohmann::json to_json(const MetricSpec& spec);

}  // namespace bpt

#endif  // BPT_METRICS_HPP_
