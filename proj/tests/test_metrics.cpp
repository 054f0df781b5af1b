#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bpt/metrics.hpp"

namespace bpt {
namespace {

using Pts = std::vector<std::array<double, 2>>;

// Brute-force references on plain arrays; nothing shared with the library.
double ref_ade(const Pts& p, const Pts& t) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::hypot(p[i][0] - t[i][0], p[i][1] - t[i][1]);
  return s / static_cast<double>(p.size());
}
double ref_fde(const Pts& p, const Pts& t) {
  return std::hypot(p.back()[0] - t.back()[0], p.back()[1] - t.back()[1]);
}

Trajectoryd to_eigen(const Pts& p) {
  Trajectoryd m(static_cast<Eigen::Index>(p.size()), 2);
  for (std::size_t i = 0; i < p.size(); ++i) m.row(static_cast<Eigen::Index>(i)) << p[i][0], p[i][1];
  return m;
}

Pts random_pts(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> g(0, scale);
  Pts p(n);
  for (auto& x : p) x = {g(rng), g(rng)};
  return p;
}

TEST(Metrics, AdeFdeHandComputed) {
  const Pts truth{{0, 0}, {1, 0}, {2, 0}};
  const Pts pred{{0, 3}, {1, 4}, {5, 4}};  // offsets 3, 4, 5
  EXPECT_DOUBLE_EQ(ade(to_eigen(pred), to_eigen(truth)), 4.0);
  EXPECT_DOUBLE_EQ(fde(to_eigen(pred), to_eigen(truth)), 5.0);
}

TEST(Metrics, ShapeErrors) {
  EXPECT_THROW(ade(Trajectoryd(3, 2), Trajectoryd(4, 2)), InvalidArgument);
  EXPECT_THROW(fde(Trajectoryd(0, 2), Trajectoryd(0, 2)), InvalidArgument);
  EXPECT_THROW(min_ade(std::vector<Trajectoryd>{}, Trajectoryd(3, 2)), InvalidArgument);
}

TEST(Metrics, MinOverCandidatesMatchesBruteForce) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Pts truth = random_pts(rng, 15, 10);
    std::vector<Trajectoryd> cands;
    double best_ade = INFINITY, best_fde = INFINITY;
    for (int k = 0; k < 6; ++k) {
      const Pts c = random_pts(rng, 15, 10);
      best_ade = std::min(best_ade, ref_ade(c, truth));
      best_fde = std::min(best_fde, ref_fde(c, truth));
      cands.push_back(to_eigen(c));
    }
    const double ma = min_ade(cands, to_eigen(truth));
    const double mf = min_fde(cands, to_eigen(truth));
    EXPECT_NEAR(ma, best_ade, 1e-9);
    EXPECT_NEAR(mf, best_fde, 1e-9);
    for (const auto& c : cands) {
      EXPECT_LE(ma, ade(c, to_eigen(truth)));
      EXPECT_LE(mf, fde(c, to_eigen(truth)));
    }
  }
}

TEST(Metrics, NonNegativeAndZeroIffCoincident) {
  std::mt19937_64 rng(3);
  const Pts truth = random_pts(rng, 15, 5);
  std::vector<Trajectoryd> cands{to_eigen(random_pts(rng, 15, 5)), to_eigen(truth)};
  EXPECT_EQ(min_ade(cands, to_eigen(truth)), 0.0);
  EXPECT_EQ(min_fde(cands, to_eigen(truth)), 0.0);
  cands.pop_back();
  EXPECT_GT(min_ade(cands, to_eigen(truth)), 0.0);
  EXPECT_GT(ade(cands[0], to_eigen(truth)), 0.0);
}

TEST(Metrics, TranslationInvariance) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> shift(-1e3, 1e3);
  for (int trial = 0; trial < 100; ++trial) {
    const Trajectoryd truth = to_eigen(random_pts(rng, 15, 5));
    std::vector<Trajectoryd> cands;
    for (int k = 0; k < 6; ++k) cands.push_back(to_eigen(random_pts(rng, 15, 5)));
    const Eigen::RowVector2d v(shift(rng), shift(rng));
    std::vector<Trajectoryd> moved;
    for (const auto& c : cands) moved.push_back(c.rowwise() + v);
    const Trajectoryd truth_moved = truth.rowwise() + v;
    EXPECT_NEAR(min_ade(cands, truth), min_ade(moved, truth_moved), 1e-9);
    EXPECT_NEAR(min_fde(cands, truth), min_fde(moved, truth_moved), 1e-9);
  }
}

TEST(Metrics, MissRateCountsStrictlyAbove) {
  EXPECT_DOUBLE_EQ(miss_rate({0.5, 1.0, 1.5, 3.0}, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(miss_rate({0.5}, 1.0), 0.0);
  EXPECT_THROW(miss_rate({}, 1.0), InvalidArgument);
  EXPECT_THROW(miss_rate({1.0}, 0.0), InvalidArgument);
}

TEST(Metrics, MissRateMonotoneInD) {
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> fdes(300);
  for (auto& f : fdes) f = e(rng);
  double prev = 1.0;
  for (double d = 0.05; d < 6.0; d += 0.05) {
    const double mr = miss_rate(fdes, d);
    EXPECT_LE(mr, prev);
    prev = mr;
  }
}

TEST(Rho, DefaultsAndSigns) {
  const MetricSpec spec = MetricSpec::defaults();
  ASSERT_EQ(spec.entries.size(), 3u);
  const RhoTuple r = rho(spec, 0.05, 0.4);
  EXPECT_DOUBLE_EQ(r.scores[0], 0.1 - 0.05);
  EXPECT_DOUBLE_EQ(r.scores[1], 1.0 - 0.4);
  EXPECT_DOUBLE_EQ(r.scores[2], 1.0);
  EXPECT_FALSE(r.is_counterexample());
  const RhoTuple miss = rho(spec, 0.05, 1.2);
  EXPECT_DOUBLE_EQ(miss.scores[2], -1.0);
  EXPECT_TRUE(miss.is_counterexample());
}

TEST(Rho, ZeroScoreIsAPass) {
  // Exactly at both thresholds: scores are 0, 0 and +1 (minFDE <= d).
  const RhoTuple r = rho(MetricSpec::defaults(0.5, 1.0, 1.0), 0.5, 1.0);
  EXPECT_EQ(r.scores, (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_FALSE(r.is_counterexample());
}

TEST(Rho, CounterexampleIffMinBelowZero) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> pick(-2, 2);
  for (int i = 0; i < 2000; ++i) {
    RhoTuple r;
    for (int k = 0; k < 3; ++k) r.scores.push_back(0.5 * pick(rng));
    const double lo = *std::min_element(r.scores.begin(), r.scores.end());
    EXPECT_EQ(r.is_counterexample(), lo < 0.0);
  }
  EXPECT_TRUE((RhoTuple{{-0.0, -1e-300}}.is_counterexample()));
  EXPECT_FALSE((RhoTuple{{-0.0, 0.0}}.is_counterexample()));
}

TEST(MetricSpec, Validation) {
  MetricSpec s;
  EXPECT_THROW(s.validate(), ConfigError);
  s.entries = {{MetricKind::kMinADE, 0.0, 0}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.entries = {{MetricKind::kMinADE, 1.0, -1}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.entries = {{MetricKind::kMinADE, 1.0, 2}};
  EXPECT_NO_THROW(s.validate());
  EXPECT_THROW(metric_kind_from_string("ADE"), ConfigError);
  EXPECT_EQ(metric_kind_from_string("MR-miss"), MetricKind::kMissRate);
}

TEST(Diversity, HandComputed) {
  RunStats st;
  for (double v : {0.0, 10.0}) st.record({{"a", v}, {"b", v / 10.0}, {"c", std::string("left")}}, false);
  // sigma_a = 5 over L_a = 10, sigma_b = 0.5 over L_b = 1.
  const std::vector<Feature> fs{{"a", Distribution::range(0, 10)},
                                {"b", Distribution::range(0, 1)},
                                {"c", Distribution::choice({std::string("left")})}};
  EXPECT_NEAR(scenario_diversity(st, fs), 2.0 * 5.5 / 11.0, 1e-12);
  EXPECT_DOUBLE_EQ(counterexample_rate(st), 0.0);
}

TEST(Diversity, ScaleInvariant) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const double scale = 0.01 + 100 * u(rng);
    const double offset = -50 + 100 * u(rng);
    RunStats a, b;
    for (int i = 0; i < 40; ++i) {
      const double x = 2 + 4 * u(rng);
      const double y = u(rng);
      a.record({{"x", x}, {"y", y}}, false);
      b.record({{"x", offset + scale * x}, {"y", y}}, false);
    }
    const std::vector<Feature> fa{{"x", Distribution::range(2, 6)}, {"y", Distribution::range(0, 1)}};
    const std::vector<Feature> fb{{"x", Distribution::range(offset + 2 * scale, offset + 6 * scale)},
                                  {"y", Distribution::range(0, 1)}};
    // Rescaling one feature changes both sums, so SD is only invariant when
    // every feature is rescaled together.
    RunStats c;
    for (std::size_t i = 0; i < 40; ++i) {
      c.record({{"x", offset + scale * a.observations["x"][i]},
                {"y", offset + scale * a.observations["y"][i]}},
               false);
    }
    const std::vector<Feature> fc{{"x", Distribution::range(offset + 2 * scale, offset + 6 * scale)},
                                  {"y", Distribution::range(offset, offset + scale)}};
    EXPECT_NEAR(scenario_diversity(a, fa), scenario_diversity(c, fc), 1e-9);
    // Single-feature SD is invariant on its own.
    const std::vector<Feature> only_a{fa[0]};
    const std::vector<Feature> only_b{fb[0]};
    EXPECT_NEAR(scenario_diversity(a, only_a), scenario_diversity(b, only_b), 1e-9);
  }
}

TEST(Diversity, Errors) {
  RunStats st;
  st.record({{"a", 1.0}}, true);
  const std::vector<Feature> fs{{"a", Distribution::range(0, 1)}};
  EXPECT_THROW(scenario_diversity(st, fs), InvalidArgument);  // one observation
  EXPECT_THROW(scenario_diversity(st, {}), InvalidArgument);
  EXPECT_THROW(counterexample_rate(RunStats{}), InvalidArgument);
  EXPECT_DOUBLE_EQ(counterexample_rate(st), 1.0);
}

TEST(Diversity, PopulationNotSampleStddev) {
  EXPECT_DOUBLE_EQ(population_stddev({1, 3}), 1.0);
  EXPECT_DOUBLE_EQ(population_stddev({2, 4, 4, 4, 5, 5, 7, 9}), 2.0);
}

}  // namespace
}  // namespace bpt
