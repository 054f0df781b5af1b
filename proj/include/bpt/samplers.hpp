#ifndef BPT_SAMPLERS_HPP_
#define BPT_SAMPLERS_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bpt/metrics.hpp"
#include "bpt/scenario_lang.hpp"

namespace bpt {

enum class SamplerKind { kUniform, kHalton, kMab };

const char* to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& s);

struct MabOptions {
  std::size_t bins = 10;
  double exploration = std::sqrt(2.0);
  double epsilon = 1e-9;
};

/// s_i = clamp(score_i / threshold_i, -1, 1), w_i = 2^-level_i,
/// r = sum(w_i (1 - s_i) / 2) / sum(w_i). Always in [0, 1].
double reward(const RhoTuple& rho, const MetricSpec& spec);

/// 53-bit uniform double in [0, 1).
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x);

/// k-th prime, 0-based (2, 3, 5, ...).
std::uint64_t nth_prime(std::size_t k);

/// Van der Corput radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, std::uint64_t base);

class Sampler {
 public:
  explicit Sampler(std::vector<Feature> features);
  virtual ~Sampler() = default;

  virtual SamplerKind kind() const = 0;
  virtual FeatureAssignment propose() = 0;
  /// Reward feedback for an assignment previously proposed by this sampler.
  /// Throws InvalidArgument when a feature is missing. Uniform and Halton
  /// ignore the reward.
  void feed(const FeatureAssignment& assignment, double reward);

  const std::vector<Feature>& features() const { return features_; }

 protected:
  virtual void do_feed(const FeatureAssignment&, double) {}

  std::vector<Feature> features_;
};

class UniformSampler : public Sampler {
 public:
  UniformSampler(std::vector<Feature> features, std::uint64_t seed);
  SamplerKind kind() const override { return SamplerKind::kUniform; }
  FeatureAssignment propose() override;

 private:
  std::mt19937_64 rng_;
};

/// Dimension j uses the j-th prime base; indices start at 1. Choice
/// features take values[index mod cardinality].
class HaltonSampler : public Sampler {
 public:
  explicit HaltonSampler(std::vector<Feature> features);
  SamplerKind kind() const override { return SamplerKind::kHalton; }
  FeatureAssignment propose() override;
  std::uint64_t index() const { return index_; }

 private:
  std::uint64_t index_ = 0;
};

/// One independent UCB1 bandit per feature: equal-width bins for Range
/// features, one arm per Choice value. Unpulled arms go first in arm order.
class MabSampler : public Sampler {
 public:
  MabSampler(std::vector<Feature> features, std::uint64_t seed, MabOptions options = {});
  SamplerKind kind() const override { return SamplerKind::kMab; }
  FeatureAssignment propose() override;

  struct Arms {
    std::vector<std::size_t> pulls;
    std::vector<double> mean_reward;
  };
  const std::vector<Arms>& arms() const { return arms_; }
  std::size_t total_pulls() const { return total_; }
  /// Arm that `value` belongs to for feature `f`.
  std::size_t arm_of(std::size_t f, const FeatureValue& value) const;

 protected:
  void do_feed(const FeatureAssignment& assignment, double reward) override;

 private:
  std::size_t select(std::size_t f) const;

  MabOptions options_;
  std::mt19937_64 rng_;
  std::vector<Arms> arms_;
  std::size_t total_ = 0;
};

std::unique_ptr<Sampler> make_sampler(SamplerKind kind, std::vector<Feature> features,
                                      std::uint64_t seed, const MabOptions& mab = {});

}  // namespace bpt

#endif  // BPT_SAMPLERS_HPP_
