#include "bpt/benchmark.hpp"

#include <time.h>

#include <atomic>
#include <chrono>
#include <map>
#include <set>
#include <thread>

#include "bpt/error.hpp"
#include "bpt/falsifier.hpp"
#include "bpt/pipeline.hpp"
#include "bpt/scenario_library.hpp"

namespace bpt {

const char* to_string(BenchmarkWork work) {
  switch (work) {
    case BenchmarkWork::kSpin: return "spin";
    case BenchmarkWork::kCpu: return "cpu";
    case BenchmarkWork::kReal: return "real";
  }
  return "?";
}

BenchmarkWork benchmark_work_from_string(const std::string& s) {
  if (s == "spin") return BenchmarkWork::kSpin;
  if (s == "cpu") return BenchmarkWork::kCpu;
  if (s == "real") return BenchmarkWork::kReal;
  throw ConfigError("unknown benchmark workload '" + s + "' (expected spin, cpu or real)");
}

const char* benchmark_program_source() {
  return R"(scenario "benchmark workload"
map straight(n_lanes = 2, length = 200, lane_width = 3.5)
param timepoint = Choice(20, 40)
param gap = Range(10, 30)
param speed = Range(4, 8)
ego car on "lane0" offset = 5 speed = speed
agent lead on "lane0" offset = 5 + gap speed = speed
behavior car FollowLane(target_speed = speed)
behavior lead FollowLane(target_speed = speed)
predict lead at timepoint
)";
}

namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

void spin_for(double ms) {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double, std::milli>(ms);
  while (std::chrono::steady_clock::now() < deadline) std::this_thread::yield();
}

void burn_cpu(double ms) {
  const double end = thread_cpu_seconds() + ms / 1000.0;
  volatile double sink = 0.0;
  while (thread_cpu_seconds() < end) {
    for (int i = 0; i < 1000; ++i) sink = sink + 1e-9 * i;
  }
}

}  // namespace

std::vector<BenchmarkCell> run_benchmark(const BenchmarkOptions& options) {
  for (std::size_t w : options.workers) {
    if (w < 1) throw ConfigError("benchmark worker counts must be >= 1");
  }
  const MetricSpec spec = options.real ? options.real->metric_spec() : MetricSpec::defaults();

  std::optional<ScenarioProgram> program;
  std::vector<std::unique_ptr<Predictor>> predictors;
  EvaluationOptions eval;
  std::size_t max_workers = 1;
  for (std::size_t w : options.workers) max_workers = std::max(max_workers, w);
  if (options.work == BenchmarkWork::kReal) {
    if (!options.real || options.real->scenarios.empty()) {
      throw ConfigError("real benchmark workload needs a scenario");
    }
    program = load_program(resolve_scenario(options.real->scenarios.front(), default_library_dir()));
    for (std::size_t w = 0; w < max_workers; ++w) predictors.push_back(make_predictor(options.real->predictor));
    eval.k = options.real->k;
    eval.horizon = options.real->horizon;
  } else {
    program = parse(benchmark_program_source());
  }

  std::atomic<std::size_t> callbacks{0};
  const SampleCallback callback = [&](const ConcreteScenario& cs, std::size_t worker) {
    ++callbacks;
    switch (options.work) {
      case BenchmarkWork::kSpin: spin_for(options.work_ms); break;
      case BenchmarkWork::kCpu: burn_cpu(options.work_ms); break;
      case BenchmarkWork::kReal: return evaluate_sample(cs, *predictors[worker], spec, eval).outcome();
    }
    return SampleOutcome{rho(spec, 0.0, 0.0), 0.0, 0.0};
  };

  std::vector<BenchmarkCell> cells;
  for (std::size_t iters : options.iterations) {
    for (std::size_t w : options.workers) {
      FalsifyOptions fo;
      fo.sampler = options.sampler;
      fo.n_samples = iters;
      fo.seed = options.seed;
      fo.workers = w;
      callbacks = 0;
      const auto start = std::chrono::steady_clock::now();
      const FalsifyResult r = falsify(*program, spec, fo, callback);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      cells.push_back({w, iters, secs, callbacks.load(), r.reentrancy_violations});
    }
  }
  return cells;
}

void write_benchmark_csv(const std::vector<BenchmarkCell>& cells, std::ostream& out) {
  std::set<std::size_t> workers;
  std::map<std::size_t, std::map<std::size_t, double>> table;
  for (const auto& c : cells) {
    workers.insert(c.workers);
    table[c.iterations][c.workers] = c.seconds;
  }
  out << "iter";
  for (std::size_t w : workers) out << ",w" << w;
  out << "\n";
  char buf[32];
  for (const auto& [iters, row] : table) {
    out << iters;
    for (std::size_t w : workers) {
      auto it = row.find(w);
      if (it == row.end()) {
        out << ",";
      } else {
        std::snprintf(buf, sizeof buf, ",%.3f", it->second);
        out << buf;
      }
    }
    out << "\n";
  }
}

double speedup(const std::vector<BenchmarkCell>& cells, std::size_t workers, std::size_t iterations) {
  const BenchmarkCell* base = nullptr;
  const BenchmarkCell* other = nullptr;
  for (const auto& c : cells) {
    if (c.iterations != iterations) continue;
    if (c.workers == 1) base = &c;
    if (c.workers == workers) other = &c;
  }
  if (base == nullptr || other == nullptr) {
    throw InvalidArgument("benchmark table lacks the requested cells");
  }
  return base->seconds / other->seconds;
}

}  // namespace bpt
