#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "bpt/error.hpp"
#include "bpt/predictor.hpp"
#include "support/test_support.hpp"

namespace bpt {
namespace {

using K = PredictorError::Kind;

const std::string kEcho = BPT_ECHO_PREDICTOR;
const std::filesystem::path kFixtures = BPT_FIXTURE_DIR;

PredictionRequest random_request(std::mt19937_64& rng, const std::string& id) {
  std::normal_distribution<double> g(0, 3);
  PredictionRequest r;
  r.scenario_id = id;
  const double vx = g(rng), vy = g(rng), x0 = 10 * g(rng), y0 = 10 * g(rng);
  for (const std::string name : {"ego", "adv"}) {
    HistoryMatrix h(20, 3);
    for (int i = 0; i < 20; ++i) h.row(i) << x0 + vx * i * 0.1 + 0.05 * g(rng), y0 + vy * i * 0.1, 0.0;
    r.history.push_back({name, h});
  }
  r.target_agent = "adv";
  return r;
}

PredictorError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const PredictorError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no PredictorError";
  return K::kLaunchFailed;
}

void expect_close(const PredictionSet& a, const PredictionSet& b, double tol) {
  ASSERT_EQ(a.candidates.size(), b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    ASSERT_EQ(a.candidates[i].rows(), b.candidates[i].rows());
    EXPECT_LE((a.candidates[i] - b.candidates[i]).cwiseAbs().maxCoeff(), tol) << "candidate " << i;
  }
}

// Pipes `lines` through a fresh adapter process and returns its stdout lines.
std::vector<std::string> run_raw(const std::vector<std::string>& lines) {
  const auto dir = test::temp_dir("raw");
  {
    std::ofstream in(dir / "in.jsonl");
    for (const auto& l : lines) in << l << '\n';
  }
  const std::string cmd = "'" + kEcho + "' < '" + (dir / "in.jsonl").string() + "' > '" +
                          (dir / "out.jsonl").string() + "'";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  std::vector<std::string> out;
  std::ifstream f(dir / "out.jsonl");
  for (std::string l; std::getline(f, l);) out.push_back(l);
  std::filesystem::remove_all(dir);
  return out;
}

TEST(External, HandshakeSetsName) {
  ExternalPredictor p(kEcho, 5);
  EXPECT_EQ(p.name(), "cv-echo");
}

TEST(External, MatchesInTreeConstantVelocity) {
  ExternalPredictor ext(kEcho, 5);
  ConstantVelocityPredictor cv;
  std::mt19937_64 rng(77);
  for (int i = 0; i < 30; ++i) {
    auto r = random_request(rng, "rt-" + std::to_string(i));
    r.k = 1 + i % 6;
    expect_close(ext.predict(r), cv.predict(r), 1e-6);
  }
}

TEST(External, MalformedOutputKeepsProcess) {
  ExternalPredictor ext(kEcho, 5);
  std::mt19937_64 rng(1);
  EXPECT_EQ(kind_of([&] { ext.predict(random_request(rng, "short-1")); }), K::kMalformedOutput);
  EXPECT_EQ(kind_of([&] { ext.predict(random_request(rng, "nan-1")); }), K::kMalformedOutput);
  EXPECT_NO_THROW(ext.predict(random_request(rng, "fine")));
}

TEST(External, TimeoutThenRestart) {
  ExternalPredictor ext(kEcho, 0.5);
  std::mt19937_64 rng(2);
  try {
    ext.predict(random_request(rng, "hang-1"));
    FAIL();
  } catch (const PredictorError& e) {
    EXPECT_EQ(e.kind(), K::kTimeout);
    EXPECT_EQ(e.scenario_id(), "hang-1");
  }
  EXPECT_NO_THROW(ext.predict(random_request(rng, "after-hang")));
}

TEST(External, CrashThenRestart) {
  ExternalPredictor ext(kEcho, 5);
  std::mt19937_64 rng(3);
  EXPECT_EQ(kind_of([&] { ext.predict(random_request(rng, "crash-1")); }), K::kCrashed);
  EXPECT_NO_THROW(ext.predict(random_request(rng, "after-crash")));
  EXPECT_EQ(kind_of([&] { ext.predict(random_request(rng, "crash-2")); }), K::kCrashed);
}

TEST(External, LaunchFailures) {
  EXPECT_EQ(kind_of([] { ExternalPredictor p(kEcho + " --no-ready", 5); }), K::kLaunchFailed);
  EXPECT_EQ(kind_of([] { ExternalPredictor p("/nonexistent/adapter", 5); }), K::kLaunchFailed);
  EXPECT_THROW(ExternalPredictor(kEcho, 0), ConfigError);
}

TEST(External, MalformedRequestsKeepAdapterAlive) {
  std::mt19937_64 rng(4);
  auto short_hist = random_request(rng, "s19");
  short_hist.history[1].states = short_hist.history[1].states.topRows(19).eval();
  const auto good = random_request(rng, "good");
  const auto out = run_raw({protocol::hello().dump(), "not json", protocol::encode_request(short_hist, "s19#0").dump(),
                            protocol::encode_request(good, "good#0").dump()});
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0], R"({"name":"cv-echo","ready":true})");
  const auto e1 = nlohmann::json::parse(out[1]);
  EXPECT_TRUE(e1["id"].is_null());
  EXPECT_TRUE(e1["error"].is_string());
  const auto e2 = nlohmann::json::parse(out[2]);
  EXPECT_EQ(e2["id"], "s19#0");
  EXPECT_TRUE(e2.contains("error"));
  const auto ok = protocol::decode_response(nlohmann::json::parse(out[3]), "good#0", 6, 15, "good");
  expect_close(ok, builtin_constant_velocity(good.history[1].states, 6, 15), 1e-6);
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::vector<std::string> out;
  std::ifstream f(p);
  for (std::string l; std::getline(f, l);) out.push_back(l);
  return out;
}

TEST(Golden, InTreeBaselineStillMatches) {
  const auto reqs = read_lines(kFixtures / "golden_requests.jsonl");
  const auto resps = read_lines(kFixtures / "golden_responses.jsonl");
  ASSERT_EQ(reqs.size(), 100u);
  ASSERT_EQ(resps.size(), 100u);
  ConstantVelocityPredictor cv;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const auto rj = nlohmann::json::parse(reqs[i]);
    const auto r = protocol::decode_request(rj);
    const std::string id = rj["id"];
    const auto golden = protocol::decode_response(nlohmann::json::parse(resps[i]), id, r.k, r.horizon, id);
    expect_close(cv.predict(r), golden, 1e-6);
  }
}

TEST(Golden, ExternalAdapterConforms) {
  auto lines = read_lines(kFixtures / "golden_requests.jsonl");
  const auto resps = read_lines(kFixtures / "golden_responses.jsonl");
  lines.insert(lines.begin(), protocol::hello().dump());
  const auto out = run_raw(lines);
  ASSERT_EQ(out.size(), 101u);
  for (std::size_t i = 0; i < resps.size(); ++i) {
    const auto got = nlohmann::json::parse(out[i + 1]);
    const auto want = nlohmann::json::parse(resps[i]);
    EXPECT_EQ(got["id"].dump(), want["id"].dump());
    const std::string id = want["id"];
    expect_close(protocol::decode_response(got, id, 6, 15, id), protocol::decode_response(want, id, 6, 15, id), 1e-6);
  }
}

}  // namespace
}  // namespace bpt
