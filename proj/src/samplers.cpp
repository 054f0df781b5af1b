#include "bpt/samplers.hpp"

#include <algorithm>
#include <limits>

#include "bpt/error.hpp"

namespace bpt {

const char* to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kHalton: return "halton";
    case SamplerKind::kMab: return "mab";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "uniform") return SamplerKind::kUniform;
  if (s == "halton") return SamplerKind::kHalton;
  if (s == "mab") return SamplerKind::kMab;
  throw ConfigError("unknown sampler '" + s + "' (expected uniform, halton or mab)");
}

double reward(const RhoTuple& rho, const MetricSpec& spec) {
  if (rho.scores.size() != spec.entries.size()) {
    throw InvalidArgument("rho tuple does not match the metric spec");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < rho.scores.size(); ++i) {
    const double s = std::clamp(rho.scores[i] / spec.entries[i].threshold, -1.0, 1.0);
    const double w = std::ldexp(1.0, -spec.entries[i].level);
    num += w * (1.0 - s) / 2.0;
    den += w;
  }
  return num / den;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t nth_prime(std::size_t k) {
  std::uint64_t candidate = 1;
  std::size_t found = 0;
  for (;;) {
    ++candidate;
    bool prime = true;
    for (std::uint64_t d = 2; d * d <= candidate; ++d) {
      if (candidate % d == 0) {
        prime = false;
        break;
      }
    }
    if (prime && found++ == k) return candidate;
  }
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  double scale = f;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= f;
  }
  return result;
}

Sampler::Sampler(std::vector<Feature> features) : features_(std::move(features)) {
  if (features_.empty()) throw InvalidArgument("sampler needs at least one feature");
}

void Sampler::feed(const FeatureAssignment& assignment, double r) {
  for (const auto& f : features_) {
    if (!assignment.count(f.name)) {
      throw InvalidArgument("feedback assignment lacks feature '" + f.name + "'");
    }
  }
  do_feed(assignment, r);
}

UniformSampler::UniformSampler(std::vector<Feature> features, std::uint64_t seed)
    : Sampler(std::move(features)), rng_(seed) {}

FeatureAssignment UniformSampler::propose() {
  FeatureAssignment out;
  for (const auto& f : features_) {
    const auto& d = f.distribution;
    switch (d.kind) {
      case Distribution::Kind::kRange:
        out[f.name] = d.lo + (d.hi - d.lo) * unit_uniform(rng_);
        break;
      case Distribution::Kind::kChoice: {
        const auto i = static_cast<std::size_t>(unit_uniform(rng_) * static_cast<double>(d.values.size()));
        out[f.name] = d.values[std::min(i, d.values.size() - 1)];
        break;
      }
      case Distribution::Kind::kConstant: out[f.name] = d.values.front(); break;
    }
  }
  return out;
}

HaltonSampler::HaltonSampler(std::vector<Feature> features) : Sampler(std::move(features)) {}

FeatureAssignment HaltonSampler::propose() {
  ++index_;
  FeatureAssignment out;
  for (std::size_t j = 0; j < features_.size(); ++j) {
    const auto& d = features_[j].distribution;
    switch (d.kind) {
      case Distribution::Kind::kRange:
        out[features_[j].name] = d.lo + (d.hi - d.lo) * radical_inverse(index_, nth_prime(j));
        break;
      case Distribution::Kind::kChoice:
        out[features_[j].name] = d.values[index_ % d.values.size()];
        break;
      case Distribution::Kind::kConstant: out[features_[j].name] = d.values.front(); break;
    }
  }
  return out;
}

MabSampler::MabSampler(std::vector<Feature> features, std::uint64_t seed, MabOptions options)
    : Sampler(std::move(features)), options_(options), rng_(seed) {
  if (options_.bins == 0) throw InvalidArgument("MAB needs at least one bin");
  for (const auto& f : features_) {
    std::size_t n = 1;
    if (f.distribution.kind == Distribution::Kind::kRange) n = options_.bins;
    if (f.distribution.kind == Distribution::Kind::kChoice) n = f.distribution.values.size();
    arms_.push_back({std::vector<std::size_t>(n, 0), std::vector<double>(n, 0.0)});
  }
}

std::size_t MabSampler::select(std::size_t f) const {
  const Arms& a = arms_[f];
  for (std::size_t b = 0; b < a.pulls.size(); ++b) {
    if (a.pulls[b] == 0) return b;
  }
  const double log_total = std::log(static_cast<double>(total_) + 1.0);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < a.pulls.size(); ++b) {
    const double score = a.mean_reward[b] + options_.exploration *
                                                std::sqrt(log_total / (static_cast<double>(a.pulls[b]) + options_.epsilon));
    if (score > best_score) {
      best_score = score;
      best = b;
    }
  }
  return best;
}

FeatureAssignment MabSampler::propose() {
  FeatureAssignment out;
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto& d = features_[f].distribution;
    const std::size_t arm = select(f);
    switch (d.kind) {
      case Distribution::Kind::kRange: {
        const double width = (d.hi - d.lo) / static_cast<double>(options_.bins);
        const double lo = d.lo + width * static_cast<double>(arm);
        out[features_[f].name] = std::min(d.hi, lo + width * unit_uniform(rng_));
        break;
      }
      case Distribution::Kind::kChoice: out[features_[f].name] = d.values[arm]; break;
      case Distribution::Kind::kConstant: out[features_[f].name] = d.values.front(); break;
    }
  }
  return out;
}

std::size_t MabSampler::arm_of(std::size_t f, const FeatureValue& value) const {
  const auto& d = features_[f].distribution;
  switch (d.kind) {
    case Distribution::Kind::kRange: {
      const double v = std::get<double>(value);
      const double u = (v - d.lo) / (d.hi - d.lo) * static_cast<double>(options_.bins);
      const auto b = static_cast<long long>(std::floor(u));
      return static_cast<std::size_t>(std::clamp<long long>(b, 0, static_cast<long long>(options_.bins) - 1));
    }
    case Distribution::Kind::kChoice:
      for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (d.values[i] == value) return i;
      }
      throw InvalidArgument("value is not a choice of '" + features_[f].name + "'");
    case Distribution::Kind::kConstant: return 0;
  }
  return 0;
}

void MabSampler::do_feed(const FeatureAssignment& assignment, double r) {
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const std::size_t b = arm_of(f, assignment.at(features_[f].name));
    Arms& a = arms_[f];
    ++a.pulls[b];
    a.mean_reward[b] += (r - a.mean_reward[b]) / static_cast<double>(a.pulls[b]);
  }
  ++total_;
}

std::unique_ptr<Sampler> make_sampler(SamplerKind kind, std::vector<Feature> features,
                                      std::uint64_t seed, const MabOptions& mab) {
  switch (kind) {
    case SamplerKind::kUniform: return std::make_unique<UniformSampler>(std::move(features), seed);
    case SamplerKind::kHalton: return std::make_unique<HaltonSampler>(std::move(features));
    case SamplerKind::kMab: return std::make_unique<MabSampler>(std::move(features), seed, mab);
  }
  throw ConfigError("unknown sampler kind");
}

}  // namespace bpt
