#include "bpt/falsifier.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <thread>

#include "bpt/error.hpp"

namespace bpt {

std::uint64_t sample_seed(std::uint64_t run_seed, std::size_t index) {
  return splitmix64(run_seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

namespace {

struct Job {
  std::size_t slot;
  ConcreteScenario scenario;
};

struct Completion {
  std::size_t slot;
  std::optional<SampleOutcome> outcome;
  std::string error;
};

Completion run_callback(const SampleCallback& callback, Job& job, std::size_t worker) {
  Completion c{job.slot, std::nullopt, {}};
  try {
    c.outcome = callback(job.scenario, worker);
  } catch (const std::exception& e) {
    c.error = e.what();
  }
  return c;
}

class WorkerPool {
 public:
  WorkerPool(std::size_t workers, const SampleCallback& callback) : callback_(callback) {
    for (std::size_t w = 0; w < workers; ++w) {
      threads_.emplace_back([this, w] { loop(w); });
    }
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    jobs_cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void submit(Job job) {
    {
      std::lock_guard lock(mu_);
      jobs_.push_back(std::move(job));
    }
    jobs_cv_.notify_one();
  }

  Completion wait() {
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [this] { return !done_.empty(); });
    Completion c = std::move(done_.front());
    done_.pop_front();
    return c;
  }

 private:
  void loop(std::size_t worker) {
    for (;;) {
      Job job;
      {
        std::unique_lock lock(mu_);
        jobs_cv_.wait(lock, [this] { return stopping_ || !jobs_.empty(); });
        if (jobs_.empty()) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      Completion c = run_callback(callback_, job, worker);
      {
        std::lock_guard lock(mu_);
        done_.push_back(std::move(c));
      }
      done_cv_.notify_one();
    }
  }

  const SampleCallback& callback_;
  std::mutex mu_;
  std::condition_variable jobs_cv_;
  std::condition_variable done_cv_;
  std::deque<Job> jobs_;
  std::deque<Completion> done_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

// Counts entries into the sampler while another entry is still active.
class ReentrancyGuard {
 public:
  ReentrancyGuard(std::atomic<int>& active, std::size_t& violations) : active_(active) {
    if (active_.fetch_add(1) != 0) ++violations;
  }
  ~ReentrancyGuard() { active_.fetch_sub(1); }

 private:
  std::atomic<int>& active_;
};

std::string describe(const FeatureAssignment& a) {
  std::string s = "{";
  for (const auto& [name, value] : a) {
    if (s.size() > 1) s += ", ";
    s += name + "=" + to_string(value);
  }
  return s + "}";
}

}  // namespace

FalsifyResult falsify(const ScenarioProgram& program, const MetricSpec& spec,
                      const FalsifyOptions& options, const SampleCallback& callback) {
  if (options.n_samples == 0) throw InvalidArgument("n_samples must be at least 1");
  if (options.workers == 0) throw InvalidArgument("workers must be at least 1");
  spec.validate();

  std::vector<Feature> searched;
  for (const auto& f : program.features()) {
    auto it = options.pinned.find(f.name);
    if (it == options.pinned.end()) {
      searched.push_back(f);
    } else if (!f.distribution.contains(it->second)) {
      throw AssignmentError("pinned value " + to_string(it->second) + " is outside the support of '" +
                            f.name + "'");
    }
  }
  for (const auto& [name, value] : options.pinned) {
    bool known = false;
    for (const auto& f : program.features()) known = known || f.name == name;
    if (!known) throw AssignmentError("pinned feature '" + name + "' does not exist");
  }
  if (searched.empty()) throw InvalidArgument("every feature is pinned; nothing to search");
  auto sampler = make_sampler(options.sampler, searched, options.seed, options.mab);

  FalsifyResult result;
  result.samples.resize(options.n_samples);
  std::atomic<int> active{0};

  auto propose = [&] {
    ReentrancyGuard guard(active, result.reentrancy_violations);
    FeatureAssignment a = sampler->propose();
    for (const auto& [name, value] : options.pinned) a[name] = value;
    return a;
  };
  auto feed = [&](const FeatureAssignment& a, double r) {
    ReentrancyGuard guard(active, result.reentrancy_violations);
    sampler->feed(a, r);
  };

  // Draws the next accepted sample; returns the job, or nothing when the
  // sample failed before the callback.
  auto draw = [&](std::size_t slot) -> std::optional<Job> {
    SampleRecord& rec = result.samples[slot];
    rec.index = options.index_offset + slot;
    rec.seed = sample_seed(options.seed, rec.index);
    for (std::size_t attempt = 0;; ++attempt) {
      rec.assignment = propose();
      try {
        ConcretizeResult cr = concretize(program, rec.assignment, rec.seed);
        if (cr.accepted()) {
          rec.timepoint = cr.scenario->timepoint;
          return Job{slot, std::move(*cr.scenario)};
        }
        ++rec.rejections;
        ++result.rejected;
        feed(rec.assignment, 0.0);
        if (attempt + 1 >= options.max_rejections) {
          throw ScenarioError("requirement " + std::to_string(*cr.violated_requirement + 1) +
                              " rejected " + std::to_string(options.max_rejections) +
                              " consecutive samples; last assignment " + describe(rec.assignment));
        }
      } catch (const AssignmentError&) {
        throw;
      } catch (const ScenarioError& e) {
        if (rec.rejections >= options.max_rejections) throw;
        rec.error = e.what();
        return std::nullopt;
      }
    }
  };

  auto complete = [&](Completion c) {
    SampleRecord& rec = result.samples[c.slot];
    rec.outcome = std::move(c.outcome);
    rec.error = std::move(c.error);
    if (rec.outcome) feed(rec.assignment, reward(rec.outcome->rho, spec));
  };

  if (options.workers == 1) {
    for (std::size_t slot = 0; slot < options.n_samples; ++slot) {
      auto job = draw(slot);
      if (job) complete(run_callback(callback, *job, 0));
    }
  } else {
    WorkerPool pool(options.workers, callback);
    std::size_t next = 0;
    std::size_t in_flight = 0;
    while (next < options.n_samples || in_flight > 0) {
      while (next < options.n_samples && in_flight < options.workers) {
        auto job = draw(next++);
        if (job) {
          pool.submit(std::move(*job));
          ++in_flight;
        }
      }
      if (in_flight > 0) {
        complete(pool.wait());
        --in_flight;
      }
    }
  }

  for (const auto& rec : result.samples) {
    if (!rec.ok()) {
      ++result.failed;
      continue;
    }
    const bool cex = rec.is_counterexample();
    result.stats.record(rec.assignment, cex);
    if (cex) {
      result.error_table.push_back({"", rec.index, rec.assignment, rec.seed, rec.outcome->rho.scores,
                                    rec.outcome->min_ade, rec.outcome->min_fde, rec.timepoint,
                                    program.id()});
    }
  }
  return result;
}

namespace {

nlohmann::json assignment_json(const FeatureAssignment& a) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : a) j[name] = to_json(value);
  return j;
}

}  // namespace

nlohmann::json to_json(const SampleRecord& r) {
  nlohmann::json j = {{"index", r.index},
                      {"seed", r.seed},
                      {"timepoint", r.timepoint},
                      {"rejections", r.rejections},
                      {"assignment", assignment_json(r.assignment)}};
  if (r.outcome) {
    j["min_ade"] = r.outcome->min_ade;
    j["min_fde"] = r.outcome->min_fde;
    j["scores"] = r.outcome->rho.scores;
    j["counterexample"] = r.outcome->rho.is_counterexample();
  } else {
    j["error"] = r.error;
  }
  return j;
}

nlohmann::json to_json(const ErrorTableRow& row) {
  return {{"scenario", row.scenario},
          {"program_id", row.program_id},
          {"sample_index", row.sample_index},
          {"seed", row.seed},
          {"timepoint", row.timepoint},
          {"assignment", assignment_json(row.assignment)},
          {"scores", row.scores},
          {"min_ade", row.min_ade},
          {"min_fde", row.min_fde}};
}

ErrorTableRow error_row_from_json(const nlohmann::json& j) {
  try {
    ErrorTableRow row;
    row.scenario = j.value("scenario", "");
    row.program_id = j.at("program_id").get<std::string>();
    row.sample_index = j.at("sample_index").get<std::size_t>();
    row.seed = j.at("seed").get<std::uint64_t>();
    row.timepoint = j.at("timepoint").get<int>();
    for (const auto& [name, value] : j.at("assignment").items()) {
      row.assignment[name] = feature_value_from_json(value);
    }
    row.scores = j.at("scores").get<std::vector<double>>();
    row.min_ade = j.at("min_ade").get<double>();
    row.min_fde = j.at("min_fde").get<double>();
    return row;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed error-table row: ") + e.what());
  }
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_error_csv_header(std::ostream& out) {
  out << "scenario,program_id,sample_index,seed,timepoint,min_ade,min_fde,scores,assignment\n";
}

void write_error_csv_row(std::ostream& out, const ErrorTableRow& row) {
  std::string scores;
  for (std::size_t i = 0; i < row.scores.size(); ++i) {
    if (i > 0) scores += ';';
    scores += num(row.scores[i]);
  }
  out << csv_quote(row.scenario) << ',' << row.program_id << ',' << row.sample_index << ','
      << row.seed << ',' << row.timepoint << ',' << num(row.min_ade) << ',' << num(row.min_fde)
      << ',' << scores << ',' << csv_quote(assignment_json(row.assignment).dump()) << '\n';
}

}  // namespace bpt
