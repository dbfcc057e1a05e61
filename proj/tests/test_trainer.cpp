#include "gacl/trainer.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace gacl;
using namespace gacl::train;

namespace {

RunConfig tiny() {
  RunConfig c;
  c.data.sequences = 3;
  c.data.length = 40;
  c.data.test_length = 60;
  c.data.validation_split = 0.34;
  c.model.lstm_sizes = {8};
  c.model.head_hidden = 8;
  c.schedule.alphas = {0.0, 1.0};
  c.schedule.limits = {2, 1, 1e-4};
  c.sampling = {3, 8, 12};
  c.threads = 1;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gacl_trainer_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Seeds, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 8; ++a) {
    for (std::uint64_t b = 0; b < 8; ++b) seen.insert(derive_seed(1, a, b));
  }
  EXPECT_EQ(seen.size(), 64u);
  EXPECT_EQ(derive_seed(5, 1, 2), derive_seed(5, 1, 2));
  EXPECT_NE(derive_seed(5, 1, 2), derive_seed(6, 1, 2));
}

TEST(Parallel, VisitsEveryIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Config, RoundTripAndProblems) {
  RunConfig c = tiny();
  c.schedule.window = 4;
  c.data.noise = 0.02;
  const RunConfig back = RunConfig::from_config(c.to_config());
  EXPECT_EQ(back.to_config().dump(), c.to_config().dump());

  config::KeyValueConfig bad;
  bad.set("train.learning_rate", "fast");
  bad.set("train.unknown_key", "1");
  bad.set("manifest.tool", "gacl");
  try {
    RunConfig::from_config(bad);
    FAIL();
  } catch (const config::ConfigError& e) {
    EXPECT_EQ(e.problems().size(), 2u);
  }

  RunConfig invalid = tiny();
  invalid.learning_rate = -1.0;
  invalid.sampling.min_length = 30;
  invalid.schedule.alphas = {0.0, 1.5};
  try {
    invalid.validate();
    FAIL();
  } catch (const config::ConfigError& e) {
    EXPECT_GE(e.problems().size(), 3u);
  }
}

TEST(Data, SplitAndNormalization) {
  const auto d = prepare_data(tiny());
  EXPECT_EQ(d.train.size(), 2u);
  EXPECT_EQ(d.validation.size(), 1u);
  EXPECT_EQ(d.test.size(), 1u);
  EXPECT_EQ(d.test[0].length(), 60);
  for (const auto& t : d.train) EXPECT_NE(t.relatives, d.validation[0].relatives);
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(d.feature_dim);
  for (const auto& s : d.train) sum += s.features.colwise().sum();
  EXPECT_LT((sum / 80.0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Train, StagesAndLogsAreConsistent) {
  std::vector<int> epochs;
  const auto r = train::train(tiny(), [&](const EpochRecord& e) { epochs.push_back(e.epoch); });
  const auto& log = r.log;
  ASSERT_FALSE(log.epochs.empty());
  EXPECT_LE(log.epochs.size(), 4u);
  EXPECT_EQ(epochs.size(), log.epochs.size());
  for (std::size_t k = 0; k < log.epochs.size(); ++k) {
    EXPECT_EQ(log.epochs[k].epoch, static_cast<int>(k) + 1);
    EXPECT_TRUE(std::isfinite(log.epochs[k].train_loss));
  }
  EXPECT_EQ(log.transitions.size(), 2u);
  EXPECT_EQ(log.transitions.back().to_stage, 0);
  ASSERT_EQ(log.stages.size(), 2u);
  EXPECT_EQ(log.stages[0].alpha, 0.0);
  EXPECT_EQ(log.stages[1].alpha, 1.0);
  EXPECT_EQ(log.epochs.back().alpha, 1.0);
  EXPECT_FALSE(log.final_metrics.segments.rows.empty());
}

TEST(Train, SameSeedGivesIdenticalFiles) {
  RunConfig a = tiny();
  a.output_dir = fresh("a").string();
  RunConfig b = tiny();
  b.output_dir = fresh("b").string();
  train::train(a);
  train::train(b);
  for (const char* f : {"runlog.csv", "transitions.csv", "stages.csv", "test_segments.csv",
                        "checkpoints/final.ckpt", "checkpoints/stage_1.ckpt"}) {
    ASSERT_TRUE(std::filesystem::exists(std::filesystem::path(a.output_dir) / f)) << f;
    EXPECT_EQ(slurp(std::filesystem::path(a.output_dir) / f), slurp(std::filesystem::path(b.output_dir) / f)) << f;
  }
  const auto manifest = config::KeyValueConfig::load(std::filesystem::path(a.output_dir) / "manifest.txt");
  EXPECT_EQ(manifest.get("train.seed"), "1");
  EXPECT_NO_THROW(RunConfig::from_config(manifest));

  RunConfig c = tiny();
  c.seed = 2;
  c.output_dir = fresh("c").string();
  train::train(c);
  EXPECT_NE(slurp(std::filesystem::path(a.output_dir) / "runlog.csv"),
            slurp(std::filesystem::path(c.output_dir) / "runlog.csv"));
  for (const auto& d : {a.output_dir, b.output_dir, c.output_dir}) std::filesystem::remove_all(d);
}

TEST(Train, DivergenceIsReported) {
  RunConfig c = tiny();
  c.learning_rate = 1e300;
  c.grad_clip = 1e300;
  try {
    train::train(c);
    FAIL() << "expected divergence";
  } catch (const NonFiniteLoss& e) {
    EXPECT_GE(e.epoch(), 1);
  }
}

TEST(Ablation, ModesAndCells) {
  RunConfig c = tiny();
  const auto modes = ablation_modes(c);
  ASSERT_EQ(modes.size(), 4u);
  EXPECT_EQ(modes[0].name, "curriculum");
  EXPECT_EQ(modes[1].schedule.stages.front().weights.alpha, 1.0);
  EXPECT_EQ(modes[2].schedule.stages.size(), 1u);
  EXPECT_EQ(modes[2].schedule.stages[0].max_epochs, 4);
  EXPECT_EQ(modes[3].schedule.stages[0].weights.alpha, 0.5);
  EXPECT_EQ(modes[3].schedule.stages[0].weights.window, 2);

  EXPECT_THROW(ablate(c, {1}), std::invalid_argument);
  c.threads = 2;
  const auto report = ablate(c, {3, 4});
  ASSERT_EQ(report.cells.size(), 8u);
  EXPECT_EQ(report.cells[0].mode, "curriculum");
  EXPECT_EQ(report.cells[1].seed, 4u);
  for (const auto& cell : report.cells) {
    EXPECT_TRUE(std::isfinite(cell.final_bounded_validation_loss));
    EXPECT_GT(cell.first_stage_validation_relative_loss, 0.0);
  }
  std::ostringstream out;
  write_ablation_summary_csv(out, report);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
}

TEST(Sweep, NormalizedToMaximum) {
  const auto r = alpha_sweep(tiny(), {0.0, 0.5, 1.0}, 2);
  ASSERT_EQ(r.points.size(), 3u);
  double max_t = 0.0, max_r = 0.0;
  for (const auto& p : r.points) {
    EXPECT_LE(p.normalized_translation, 1.0);
    max_t = std::max(max_t, p.normalized_translation);
    max_r = std::max(max_r, p.normalized_rotation);
  }
  EXPECT_DOUBLE_EQ(max_t, 1.0);
  EXPECT_DOUBLE_EQ(max_r, 1.0);
}

TEST(Train, NoiselessDataIsLearnable) {
  RunConfig c = tiny();
  c.data.noise = 0.0;
  c.schedule.mode = curriculum::Mode::Fixed;
  c.schedule.alpha = 1.0;
  c.schedule.limits = {50, 50, 0.0};
  c.sampling = {10, 8, 12};
  const auto log = train::train(c).log;
  ASSERT_EQ(log.epochs.size(), 50u);
  const double first = log.epochs.front().validation_relative_loss;
  double best = first;
  for (const auto& e : log.epochs) best = std::min(best, e.validation_relative_loss);
  EXPECT_LE(best * 10.0, first) << "first " << first << " best " << best;
}

TEST(Train, ThreeStagesGiveThreeSegments) {
  RunConfig c = tiny();
  c.schedule.alphas = {1.0, 0.5, 0.1};
  const auto log = train::train(c).log;
  ASSERT_EQ(log.stages.size(), 3u);
  int stage = 1;
  for (const auto& e : log.epochs) {
    EXPECT_GE(e.stage, stage);
    stage = e.stage;
  }
  EXPECT_EQ(stage, 3);
  for (std::size_t k = 0; k < log.transitions.size(); ++k) {
    EXPECT_NE(log.transitions[k].reason, curriculum::TransitionReason::None);
    EXPECT_EQ(log.transitions[k].epoch, log.stages[k].end_epoch);
  }
}

TEST(Train, LaterStagesDoNotAlterEarlierRecords) {
  RunConfig a = tiny();
  a.schedule.alphas = {1.0, 0.5, 0.1};
  RunConfig b = a;
  b.schedule.alphas = {1.0, 0.5, 0.9};
  const auto la = train::train(a).log;
  const auto lb = train::train(b).log;
  ASSERT_EQ(la.stages[0].end_epoch, lb.stages[0].end_epoch);
  for (int k = 0; k < la.stages[1].end_epoch; ++k) {
    EXPECT_EQ(la.epochs[k].train_loss, lb.epochs[k].train_loss);
    EXPECT_EQ(la.epochs[k].validation_loss, lb.epochs[k].validation_loss);
  }
  EXPECT_NE(la.epochs.back().validation_loss, lb.epochs.back().validation_loss);
}

TEST(Train, PresetLossWeights) {
  RunConfig c = tiny();
  EXPECT_EQ(c.loss_weights().delta, 10.0);
  EXPECT_EQ(c.loss_weights().zeta, 1.0);
  c.data.preset = "vehicle";
  EXPECT_EQ(c.loss_weights().zeta, 100.0);
  c.schedule.zeta = 3.0;
  EXPECT_EQ(c.loss_weights().zeta, 3.0);
  EXPECT_EQ(c.loss_weights().delta, 1.0);
  EXPECT_EQ(RunConfig::from_config(c.to_config()).loss_weights().zeta, 3.0);
}

TEST(Ablation, ModesShareDataAndInitialization) {
  RunConfig c = tiny();
  c.schedule.alphas = {1.0, 0.5};
  c.schedule.limits = {1, 1, 0.0};
  const auto report = ablate(c, {5, 6});
  // Modes whose first stage has the same objective see the same weights and
  // samples in their first epoch.
  const auto first_epoch = [&](const std::string& mode, std::uint64_t seed) {
    for (const auto& cell : report.cells) {
      if (cell.mode == mode && cell.seed == seed) return cell.log.epochs.front();
    }
    throw std::logic_error("missing cell");
  };
  for (std::uint64_t seed : {5u, 6u}) {
    EXPECT_EQ(first_epoch("curriculum", seed).train_loss, first_epoch("fixed-relative", seed).train_loss);
    EXPECT_EQ(first_epoch("anti-curriculum", seed).train_loss, first_epoch("fixed-bounded", seed).train_loss);
  }
  EXPECT_NE(first_epoch("curriculum", 5).train_loss, first_epoch("curriculum", 6).train_loss);
}
