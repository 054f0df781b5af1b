#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "support/test_support.hpp"

namespace bpt {
namespace {

const std::string kCli = BPT_CLI;
const std::string kEcho = BPT_ECHO_PREDICTOR;

// Exit status of `bpt <args>`, output discarded unless `log` is given.
int bpt(const std::string& args, const std::filesystem::path& log = "/dev/null") {
  const std::string cmd = "'" + kCli + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { dir = test::temp_dir("cli"); }
  void TearDown() override { std::filesystem::remove_all(dir); }
  std::string out(const char* sub) const { return "'" + (dir / sub).string() + "'"; }
  std::filesystem::path dir;
};

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(bpt("--help"), 0);
  EXPECT_EQ(bpt(""), 1);
  EXPECT_EQ(bpt("frobnicate"), 1);
  EXPECT_EQ(bpt("run --bogus"), 1);
  EXPECT_EQ(bpt("run -s S1 --workers 0 -o " + out("o")), 1);
  EXPECT_EQ(bpt("run -s S1 --sampler random -o " + out("o")), 1);
  EXPECT_EQ(bpt("run -c /nonexistent.cfg"), 1);
  EXPECT_EQ(bpt("run -s NotAScenario -o " + out("o")), 1);
  EXPECT_EQ(bpt("report /nonexistent/report.json"), 1);
}

TEST_F(Cli, ParseErrorsExitTwo) {
  std::ofstream(dir / "bad.tsc") << "map straight(n_lanes = 1, length = 100, lane_width = 3.5)\nego car on\n";
  const auto log = dir / "log.txt";
  EXPECT_EQ(bpt("validate " + out("bad.tsc"), log), 2);
  EXPECT_NE(test::read_file(log).find("bad.tsc:2:"), std::string::npos) << test::read_file(log);
  EXPECT_EQ(bpt("run -s " + out("bad.tsc") + " -o " + out("o")), 2);
}

TEST_F(Cli, PredictorFailureExitsThree) {
  EXPECT_EQ(bpt("run -s S1 --samples 2 --timepoints 20 --predictor external --predictor-cmd /nonexistent/x -o " +
                out("o")),
            3);
}

TEST_F(Cli, ValidateShippedLibrary) {
  const auto log = dir / "log.txt";
  EXPECT_EQ(bpt("validate", log), 0);
  EXPECT_NE(test::read_file(log).find("9 scenarios valid"), std::string::npos);
  EXPECT_EQ(bpt("validate '" + (test::scenario_dir() / "cut_in.tsc").string() + "'"), 0);
}

TEST_F(Cli, RunReportReplay) {
  ASSERT_EQ(bpt("run -s S1 -s S4 --samples 4 --timepoints 20,40 --min-fde 0.05 --seed 3 -o " + out("run")), 0);
  for (const char* f : {"report.json", "samples.jsonl", "errors.jsonl", "errors.csv", "timings.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "run" / f)) << f;
  }
  const auto log = dir / "log.txt";
  EXPECT_EQ(bpt("report " + out("run/report.json") + " --csv", log), 0);
  EXPECT_EQ(test::read_file(log).substr(0, 9), "scenario,");
  EXPECT_EQ(bpt("replay -e " + out("run/errors.jsonl") + " --min-fde 0.05", log), 0);
  EXPECT_NE(test::read_file(log).find("reproduced"), std::string::npos);
  EXPECT_EQ(test::read_file(log).find("MISMATCH"), std::string::npos);
  EXPECT_EQ(bpt("replay -e " + out("run/errors.jsonl") + " --row 100000"), 1);
}

TEST_F(Cli, ExternalAdapterAgreesWithBuiltin) {
  const std::string common = "run -s S2 --samples 3 --timepoints 20,60 --seed 9 ";
  ASSERT_EQ(bpt(common + "-o " + out("cv")), 0);
  ASSERT_EQ(bpt(common + "--predictor external --predictor-cmd '" + kEcho + "' -o " + out("ext")), 0);
  const auto a = nlohmann::json::parse(test::read_file(dir / "cv" / "report.json"));
  const auto b = nlohmann::json::parse(test::read_file(dir / "ext" / "report.json"));
  const auto& sa = a["scenarios"][0];
  const auto& sb = b["scenarios"][0];
  EXPECT_NEAR(sa["minFDE"].get<double>(), sb["minFDE"].get<double>(), 1e-6);
  EXPECT_NEAR(sa["minADE"].get<double>(), sb["minADE"].get<double>(), 1e-6);
  EXPECT_EQ(sa["n_counterexamples"], sb["n_counterexamples"]);
}

TEST_F(Cli, Benchmark) {
  const auto log = dir / "log.txt";
  ASSERT_EQ(bpt("benchmark --worker-counts 1,2 --iterations 4,8 --work-ms 5 -o " + out("b"), log), 0);
  const std::string csv = test::read_file(dir / "b" / "benchmark.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,w1,w2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(bpt("benchmark --mode warp -o " + out("b")), 1);
}

}  // namespace
}  // namespace bpt
