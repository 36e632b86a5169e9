#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <sys/wait.h>

#include "json.hpp"
#include "tgan/commands.hpp"

using namespace tgan;
using namespace tgan::commands;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() / "tgan_tests" / (std::string(info->test_suite_name()) + "." +
                                                            info->name() + "." + name);
  fs::remove_all(p);
  return p;
}

const std::string kTinyText =
    "K = 4\ntotal_steps = 6\nbatch_size = 8\neval_every = 3\neval_sample_size = 64\nwrite_samples = false\n"
    "[generator]\nhidden_dims = 8\n"
    "[discriminator]\nhidden_dims = 8\n"
    "[lens]\nblock_count = 1\nblock_hidden_dim = 4\n";

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Invocation {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with stdout and stderr captured to files.
Invocation run_cli(const std::string& args, const std::string& env = "") {
  const fs::path dir = fs::temp_directory_path() / "tgan_tests" / "cli";
  fs::create_directories(dir);
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = env + " \"" + std::string(TGAN_LAB_EXE) + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Invocation r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace

TEST(Schedule, CsvMatchesClosedForm) {
  const auto rows = lines_of(cmd_schedule(4, 8));
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0], "t,lambda");
  const double pi = std::numbers::pi;
  const double expected[] = {1.0, 1.0 - std::sin(pi / 8), 1.0 - std::sqrt(2.0) / 2, 1.0 - std::sin(3 * pi / 8)};
  for (int t = 0; t <= 8; ++t) {
    const auto& row = rows[static_cast<std::size_t>(t) + 1];
    const auto comma = row.find(',');
    EXPECT_EQ(std::stoi(row.substr(0, comma)), t);
    const double v = std::stod(row.substr(comma + 1));
    if (t < 4) {
      EXPECT_NEAR(v, expected[t], 1e-15) << "t=" << t;
    } else {
      EXPECT_EQ(v, 0.0) << "t=" << t;
    }
  }
  EXPECT_EQ(rows[1], "0,1");
}

TEST(Schedule, RejectsBadArguments) {
  EXPECT_THROW(cmd_schedule(0, 5), ConfigError);
  EXPECT_THROW(cmd_schedule(3, -1), ConfigError);
}

TEST(Median, OddEvenAndEmpty) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_EQ(median({7.0}), 7.0);
  EXPECT_THROW(median({}), Error);
}

TEST(Compare, ZeroStepsGivesIdenticalStartingPoint) {
  ExperimentConfig base = parse_config(kTinyText, {{"total_steps", "0"}});
  const fs::path out = scratch("out");
  const CompareSummary s = cmd_compare(base, {5}, out);
  ASSERT_EQ(s.arms.size(), 2u);
  ASSERT_TRUE(s.all_ok());
  const auto& lens = s.arms[0];
  const auto& baseline = s.arms[1];
  EXPECT_EQ(lens.arm, "lens");
  EXPECT_EQ(baseline.arm, "baseline");
  ASSERT_TRUE(lens.final_record && baseline.final_record);
  EXPECT_EQ(lens.final_record->step, 0);
  EXPECT_EQ(baseline.final_record->step, 0);
  // Same G and same eval stream, so the generated-sample metrics agree exactly.
  EXPECT_EQ(lens.final_record->frechet, baseline.final_record->frechet);
  EXPECT_EQ(lens.final_record->modes_covered, baseline.final_record->modes_covered);
}

TEST(Compare, ThreeSeedsWriteSixRunsAndSummary) {
  const ExperimentConfig base = parse_config(kTinyText);
  const fs::path out = scratch("out");
  const CompareSummary s = cmd_compare(base, {1, 2, 3}, out);
  ASSERT_EQ(s.arms.size(), 6u);
  EXPECT_TRUE(s.all_ok());
  for (int seed : {1, 2, 3}) {
    for (const char* arm : {"lens", "baseline"}) {
      EXPECT_TRUE(fs::exists(out / ("seed_" + std::to_string(seed)) / arm / "metrics.csv")) << seed << arm;
    }
  }
  ASSERT_TRUE(fs::exists(out / "summary.csv"));
  const auto rows = lines_of(slurp(out / "summary.csv"));
  ASSERT_EQ(rows.size(), 1u + 6u + 2u);
  EXPECT_EQ(rows[0], "run,arm,status,final_step,final_frechet,modes_covered,hq_fraction");
  EXPECT_EQ(rows[7].rfind("median,lens,", 0), 0u);
  EXPECT_EQ(rows[8].rfind("median,baseline,", 0), 0u);
  ASSERT_TRUE(s.lens_median && s.baseline_median);
  std::vector<double> lens_frechet;
  for (const auto& a : s.arms) {
    if (a.arm == "lens") lens_frechet.push_back(a.final_record->frechet);
  }
  EXPECT_EQ(s.lens_median->frechet, median(lens_frechet));
}

TEST(Compare, ParallelMatchesSerial) {
  const ExperimentConfig base = parse_config(kTinyText);
  const CompareSummary a = cmd_compare(base, {1, 2}, scratch("serial"), false);
  const CompareSummary b = cmd_compare(base, {1, 2}, scratch("parallel"), true);
  ASSERT_EQ(a.arms.size(), b.arms.size());
  for (std::size_t i = 0; i < a.arms.size(); ++i) {
    EXPECT_EQ(a.arms[i].label, b.arms[i].label);
    EXPECT_EQ(a.arms[i].final_record->frechet, b.arms[i].final_record->frechet);
  }
}

TEST(Compare, FailingArmIsReportedAndOthersStillRun) {
  const ExperimentConfig base = parse_config(kTinyText);
  const fs::path out = scratch("out");
  // A regular file where seed_2's directory should go makes both seed_2 arms fail.
  fs::create_directories(out);
  std::ofstream(out / "seed_2") << "occupied";
  const CompareSummary s = cmd_compare(base, {1, 2}, out);
  ASSERT_EQ(s.arms.size(), 4u);
  EXPECT_FALSE(s.all_ok());
  EXPECT_TRUE(s.arms[0].ok && s.arms[1].ok);
  EXPECT_FALSE(s.arms[2].ok);
  EXPECT_FALSE(s.arms[2].error.empty());

  const auto j = nlohmann::json::parse(failure_json(s));
  EXPECT_EQ(j["status"], "failed");
  ASSERT_EQ(j["failures"].size(), 2u);
  EXPECT_EQ(j["failures"][0]["run"], "seed=2");
  EXPECT_EQ(j["failures"][0]["arm"], "lens");
  EXPECT_FALSE(j["failures"][0]["reason"].get<std::string>().empty());
  EXPECT_NE(summary_csv(s).find("seed=2,lens,failed,"), std::string::npos);
}

TEST(Compare, FailureJsonWhenAllOk) {
  CompareSummary s;
  s.arms.push_back({"seed=1", "lens", true, {}, std::nullopt, {}});
  const auto j = nlohmann::json::parse(failure_json(s));
  EXPECT_EQ(j["status"], "ok");
  EXPECT_TRUE(j["failures"].empty());
}

TEST(Sweep, OneRunPerValue) {
  const fs::path out = scratch("out");
  const CompareSummary s = cmd_sweep(kTinyText, "K", {"2", "5"}, out);
  ASSERT_EQ(s.arms.size(), 2u);
  EXPECT_TRUE(s.all_ok());
  EXPECT_EQ(s.arms[0].label, "K=2");
  EXPECT_EQ(s.arms[1].label, "K=5");
  EXPECT_TRUE(fs::exists(out / "K=2" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(out / "K=5" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.csv"));
  EXPECT_NE(slurp(out / "K=5" / "resolved_config.txt").find("K = 5"), std::string::npos);
}

TEST(Sweep, BadValueIsAConfigError) {
  EXPECT_THROW(cmd_sweep(kTinyText, "K", {"0"}, scratch("out")), ConfigError);
  EXPECT_THROW(cmd_sweep(kTinyText, "K", {}, scratch("out")), ConfigError);
}

TEST(Eval, CheckpointMatchesInProcessEvaluation) {
  ExperimentConfig c = parse_config(kTinyText, {{"lens_enabled", "true"}});
  c.output_dir = scratch("run").string();
  const RunResult r = run_experiment(c);
  ASSERT_FALSE(r.aborted);
  const MetricsRecord from_file = cmd_eval(r.checkpoint, 300);
  const Checkpoint cp = load_checkpoint(r.checkpoint);
  const MetricsRecord direct = evaluate(cp.state, cp.config, 300);
  EXPECT_EQ(from_file.step, 6);
  EXPECT_EQ(to_csv_row(from_file), to_csv_row(direct));
  EXPECT_THROW(cmd_eval(r.checkpoint, 1), ConfigError);
}

TEST(Cli, ValidateConfigAcceptsShippedConfigs) {
  for (const auto& entry : fs::directory_iterator(TGAN_CONFIG_DIR)) {
    const Invocation r = run_cli("validate-config --config \"" + entry.path().string() + "\"");
    EXPECT_EQ(r.exit_code, 0) << entry.path() << "\n" << r.err;
    EXPECT_NE(r.out.find("variant = "), std::string::npos);
  }
}

TEST(Cli, ValidateConfigRejectsBadFixtures) {
  for (const auto& entry : fs::directory_iterator(TGAN_FIXTURE_DIR)) {
    std::ifstream in(entry.path());
    std::string first;
    std::getline(in, first);
    const std::string expected = first.substr(std::string("# expect: ").size());
    const Invocation r = run_cli("validate-config --config \"" + entry.path().string() + "\"");
    EXPECT_NE(r.exit_code, 0) << entry.path();
    EXPECT_NE(r.err.find(expected), std::string::npos) << entry.path() << "\n" << r.err;
  }
}

TEST(Cli, UnknownFlagIsAnError) {
  const Invocation r = run_cli("schedule --k 4 --steps 2 --bogus 1");
  EXPECT_NE(r.exit_code, 0);
  const Invocation none = run_cli("");
  EXPECT_NE(none.exit_code, 0);
}

TEST(Cli, SchedulePrintsCsv) {
  const Invocation r = run_cli("schedule --k 4 --steps 8");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, cmd_schedule(4, 8));
}

TEST(Cli, CompareFailureExitsNonzeroWithJson) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path cfg = dir / "tiny.cfg";
  std::ofstream(cfg) << kTinyText;
  const fs::path out = dir / "out";
  fs::create_directories(out);
  std::ofstream(out / "seed_2") << "occupied";
  const Invocation r = run_cli("compare --config \"" + cfg.string() + "\" --seeds 1,2 --out \"" + out.string() + "\"",
                               "TGAN_DETERMINISTIC=1");
  EXPECT_EQ(r.exit_code, 1);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["status"], "failed");
  EXPECT_EQ(j["failures"].size(), 2u);
  EXPECT_NE(r.out.find("seed=1,lens,ok,"), std::string::npos);
}

TEST(Cli, TrainWritesOutputsAndHonoursOverrides) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path cfg = dir / "tiny.cfg";
  std::ofstream(cfg) << kTinyText;
  const Invocation r =
      run_cli("train --config \"" + cfg.string() + "\" --seed 42 --out \"" + (dir / "run").string() + "\"");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "run" / "checkpoint.bin"));
  EXPECT_NE(slurp(dir / "run" / "resolved_config.txt").find("weight_init_seed = 42"), std::string::npos);
}
