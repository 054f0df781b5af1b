#ifndef BPT_BENCHMARK_HPP_
#define BPT_BENCHMARK_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bpt/run_config.hpp"
#include "bpt/samplers.hpp"

namespace bpt {

enum class BenchmarkWork {
  /// Busy-wait until a wall-clock deadline; models a simulator or model
  /// server whose latency does not depend on local cores.
  kSpin,
  /// Burn a fixed amount of thread CPU time; scales only with free cores.
  kCpu,
  /// Real simulate + predict on the configured scenario and predictor.
  kReal,
};

const char* to_string(BenchmarkWork work);
BenchmarkWork benchmark_work_from_string(const std::string& s);

struct BenchmarkOptions {
  std::vector<std::size_t> workers{1, 2, 5};
  std::vector<std::size_t> iterations{25, 50, 75, 100};
  double work_ms = 200.0;
  BenchmarkWork work = BenchmarkWork::kSpin;
  SamplerKind sampler = SamplerKind::kUniform;
  std::uint64_t seed = 0;
  /// Scenario and predictor for kReal (first scenario is used).
  std::optional<RunConfig> real;
};

struct BenchmarkCell {
  std::size_t workers = 0;
  std::size_t iterations = 0;
  double seconds = 0.0;
  std::size_t callbacks = 0;
  std::size_t reentrancy_violations = 0;
};

/// Times falsify() for every (workers, iterations) pair.
std::vector<BenchmarkCell> run_benchmark(const BenchmarkOptions& options);

/// Table with one row per iteration count: iter,w<a>,w<b>,...
void write_benchmark_csv(const std::vector<BenchmarkCell>& cells, std::ostream& out);

/// Wall-clock ratio t(1 worker) / t(workers) at `iterations`.
double speedup(const std::vector<BenchmarkCell>& cells, std::size_t workers, std::size_t iterations);

/// The synthetic program used by kSpin / kCpu.
const char* benchmark_program_source();

}  // namespace bpt

#endif  // BPT_BENCHMARK_HPP_
