#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(GACL_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gacl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* kSmallTrain =
    " --set data.sequences=3 --set data.length=40 --set data.test_length=60"
    " --set data.validation_split=0.34 --set model.lstm_sizes=8 --set model.head_hidden=8"
    " --set schedule.alphas=0,1 --set schedule.patience=1 --set train.samples_per_sequence=3"
    " --set train.min_length=8 --set train.max_length=12 --max-epochs 2 --threads 1";

}  // namespace

TEST_F(Cli, HelpAndVersion) {
  auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"gen-data", "train", "ablate", "alpha-sweep", "eval", "plot"}) {
    EXPECT_NE(r.output.find(sub), std::string::npos) << sub;
  }
  r = run("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("0.1.0"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("train").code, 1);
  EXPECT_EQ(run("no-such-command").code, 1);
  const auto r = run("train --out " + path("o") + " --set train.bogus=1 --set train.learning_rate=x");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("train.bogus"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("train.learning_rate"), std::string::npos) << r.output;
}

TEST_F(Cli, GenDataIsDeterministic) {
  const std::string args = " --preset walker --sequences 2 --length 30 --seed 4";
  ASSERT_EQ(run("gen-data --out " + path("a") + args).code, 0);
  ASSERT_EQ(run("gen-data --out " + path("b") + args).code, 0);
  for (const char* f : {"meta.txt", "poses/00.txt", "poses/01.txt", "features/01.csv"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(dir_ / "a" / "manifest.txt"));
}

TEST_F(Cli, TrainEvalPlotPipeline) {
  ASSERT_EQ(run("gen-data --out " + path("data") + " --sequences 3 --length 40 --seed 2").code, 0);
  auto r = run("train --data " + path("data") + " --out " + path("run") + kSmallTrain);
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"runlog.csv", "timing.csv", "transitions.csv", "stages.csv", "manifest.txt",
                        "checkpoints/final.ckpt", "test_gt_00.txt", "test_est_00.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  }

  r = run("train --config " + path("run/manifest.txt") + " --out " + path("rerun"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(slurp(dir_ / "run" / "runlog.csv"), slurp(dir_ / "rerun" / "runlog.csv"));
  EXPECT_EQ(slurp(dir_ / "run" / "checkpoints/final.ckpt"), slurp(dir_ / "rerun" / "checkpoints/final.ckpt"));

  r = run("eval --gt " + path("run/test_gt_00.txt") + " --est " + path("run/test_est_00.txt") +
          " --segments 5,10 --out " + path("eval"));
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"rpe.csv", "ate.csv", "ate_cdf.csv", "segments.csv", "trajectory.svg", "manifest.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "eval" / f)) << f;
  }

  ASSERT_EQ(run("plot --runlog " + path("run/runlog.csv") + " --out " + path("loss.svg")).code, 0);
  ASSERT_EQ(run("plot --runlog " + path("run/runlog.csv") + " --out " + path("loss2.svg")).code, 0);
  EXPECT_EQ(slurp(dir_ / "loss.svg"), slurp(dir_ / "loss2.svg"));
  EXPECT_EQ(run("plot --report " + path("eval/segments.csv") + " --out " + path("seg.svg")).code, 0);
}

TEST_F(Cli, EvalRejectsBadInput) {
  {
    std::ofstream gt(path("gt.txt"));
    gt << "1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 1 0 1 0 0 0 0 1\n";
  }
  const auto r = run("eval --gt " + path("gt.txt") + " --est " + path("gt.txt") + " --out " + path("e"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find(":2"), std::string::npos) << r.output;
}

TEST_F(Cli, AblateAndSweepWriteReports) {
  auto r = run("ablate --seeds 1,2 --out " + path("abl") + kSmallTrain);
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"ablation_summary.csv", "ablation_stages.csv", "ablation_curves.csv", "ablation_curves.svg"}) {
    EXPECT_TRUE(fs::exists(dir_ / "abl" / f)) << f;
  }
  EXPECT_EQ(run("ablate --seeds 1 --out " + path("abl1") + kSmallTrain).code, 1);
  r = run("alpha-sweep --alphas 0,1 --epochs 1 --out " + path("sweep") + kSmallTrain);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "sweep" / "alpha_sweep.svg"));
}
