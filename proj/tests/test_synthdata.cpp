#include "gacl/synthdata.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace gacl;
using namespace gacl::synth;

namespace {

MotionModel still_straight(double v) {
  MotionModel m;
  m.speed = {v, 1.0, 0.0};
  m.lateral = {0.0, 1.0, 0.0};
  m.vertical = {0.0, 1.0, 0.0};
  m.yaw_rate = {0.0, 1.0, 0.0};
  m.pitch_rate = {0.0, 1.0, 0.0};
  m.roll_rate = {0.0, 1.0, 0.0};
  m.timestep = 0.5;
  return m;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gacl_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Generate, IdentityEncodingReproducesRelatives) {
  FeatureModel f;
  f.encoded_dim = 6;
  f.identity_encoding = true;
  const auto s = generate(MotionModel::walker(), f, 50, 3);
  EXPECT_EQ(s.features, s.relatives);
}

TEST(Generate, DeterministicAndSeedIsolated) {
  const auto m = MotionModel::walker();
  const auto f = FeatureModel::preset("walker");
  const auto a = generate(m, f, 40, 9);
  const auto b = generate(m, f, 40, 9);
  const auto c = generate(m, f, 40, 10);
  EXPECT_EQ(a.relatives, b.relatives);
  EXPECT_EQ(a.features, b.features);
  EXPECT_NE(a.relatives, c.relatives);
  EXPECT_EQ(a.length(), 40);
  EXPECT_EQ(a.trajectory.size(), 41u);
  EXPECT_EQ(a.features.cols(), 20);
}

TEST(Generate, NoiselessOuIsStraightLine) {
  const auto s = generate(still_straight(2.0), FeatureModel{}, 30, 1);
  for (Eigen::Index k = 0; k < s.length(); ++k) {
    Vector6 expected = Vector6::Zero();
    expected(0) = 2.0 * 0.5;
    EXPECT_LT((s.relatives.row(k).transpose() - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Generate, ConsistencyInvariant) {
  for (const char* preset : {"vehicle", "walker"}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto s = generate(MotionModel::preset(preset), FeatureModel::preset(preset), 200, seed);
      EXPECT_LT(consistency_error(s), 1e-9) << preset << " seed " << seed;
    }
  }
}

TEST(Generate, NoiselessFeaturesDecodeExactly) {
  auto f = FeatureModel::preset("vehicle");
  f.noise_sigma = 0.0;
  const auto s = generate(MotionModel::vehicle(), f, 100, 4);
  const Eigen::MatrixXd enc = f.encoding();
  Eigen::MatrixXd decoded = enc.colPivHouseholderQr().solve(s.features.leftCols(f.encoded_dim).transpose());
  for (Eigen::Index k = 0; k < decoded.cols(); ++k) {
    const Vector6 scaled = s.relatives.row(k).transpose().cwiseProduct(f.channel_scale);
    EXPECT_LT((decoded.col(k) - scaled).cwiseAbs().maxCoeff(), 1e-9);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(enc);
  EXPECT_EQ(qr.rank(), 6);
}

TEST(Generate, PitchStaysClamped) {
  auto m = MotionModel::walker();
  m.pitch_rate = {0.0, 0.01, 3.0};
  m.roll_rate = {0.0, 0.01, 3.0};
  const auto s = generate(m, FeatureModel{}, 400, 5);
  for (const auto& p : s.trajectory.poses()) {
    EXPECT_LE(std::abs(pose_to_euler(p).rotation.y()), std::numbers::pi / 2 - m.pitch_margin + 1e-9);
  }
}

TEST(Generate, WalkerTurnsMoreThanVehicle) {
  double walker = 0.0, vehicle = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto w = generate(MotionModel::walker(), FeatureModel::preset("walker"), 200, seed);
    const auto v = generate(MotionModel::vehicle(), FeatureModel::preset("vehicle"), 200, seed);
    walker += w.relatives.col(5).cwiseAbs().mean() / MotionModel::walker().timestep;
    vehicle += v.relatives.col(5).cwiseAbs().mean() / MotionModel::vehicle().timestep;
  }
  EXPECT_GT(walker, vehicle);
}

TEST(Generate, ValidationErrors) {
  auto m = MotionModel::walker();
  m.pitch_margin = 0.05;
  EXPECT_THROW(generate(m, FeatureModel{}, 10, 1), std::invalid_argument);
  m = MotionModel::walker();
  m.timestep = 0.0;
  EXPECT_THROW(generate(m, FeatureModel{}, 10, 1), std::invalid_argument);
  EXPECT_THROW(generate(MotionModel::walker(), FeatureModel{}, 1, 1), std::invalid_argument);
  FeatureModel f;
  f.encoded_dim = 5;
  EXPECT_THROW(generate(MotionModel::walker(), f, 10, 1), std::invalid_argument);
  EXPECT_THROW(MotionModel::preset("boat"), std::invalid_argument);
}

TEST(Subsequences, FullLengthIsReanchoredCopy) {
  auto m = MotionModel::walker();
  const auto s = generate(m, FeatureModel::preset("walker"), 30, 6);
  const auto subs = sample_subsequences(s, 1, 30, 30, 1);
  ASSERT_EQ(subs.size(), 1u);
  EXPECT_EQ(subs[0].relatives, s.relatives);
  EXPECT_EQ(subs[0].features, s.features);
  EXPECT_TRUE(is_close(subs[0].trajectory[0], Pose::identity(), 1e-12));
}

TEST(Subsequences, SamplesAreConsistentContiguousSlices) {
  const auto s = generate(MotionModel::walker(), FeatureModel::preset("walker"), 120, 7);
  const auto subs = sample_subsequences(s, 10, 5, 20, 99);
  ASSERT_EQ(subs.size(), 10u);
  for (const auto& sub : subs) {
    EXPECT_GE(sub.length(), 5);
    EXPECT_LE(sub.length(), 20);
    EXPECT_LT(consistency_error(sub), 1e-9);
    EXPECT_TRUE(is_close(sub.trajectory[0], Pose::identity(), 1e-12));
    bool found = false;
    for (Eigen::Index start = 0; start + sub.length() <= s.length() && !found; ++start) {
      found = s.features.middleRows(start, sub.length()) == sub.features &&
              s.relatives.middleRows(start, sub.length()) == sub.relatives;
    }
    EXPECT_TRUE(found);
  }
  EXPECT_THROW(sample_subsequences(s, 1, 10, 121, 1), InvalidRange);
  EXPECT_THROW(sample_subsequences(s, 1, 10, 5, 1), InvalidRange);
  EXPECT_THROW(sample_subsequences(s, 1, 0, 5, 1), InvalidRange);
}

TEST(Subsequences, ChunksCoverSequence) {
  const auto s = generate(MotionModel::walker(), FeatureModel::preset("walker"), 45, 8);
  const auto chunks = split_chunks(s, 20);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[2].length(), 5);
  EXPECT_EQ(chunks[1].relatives, s.relatives.middleRows(20, 20));
}

TEST(Normalize, Examples) {
  const auto s = generate(MotionModel::walker(), FeatureModel::preset("walker"), 80, 9);
  const auto t = generate(MotionModel::walker(), FeatureModel::preset("walker"), 60, 10);
  auto [norm, stats] = normalize_features({s, t});
  Eigen::RowVectorXd sum = norm[0].features.colwise().sum() + norm[1].features.colwise().sum();
  EXPECT_LT((sum / 140.0).cwiseAbs().maxCoeff(), 1e-9);

  auto [again, stats2] = normalize_features(norm);
  EXPECT_LT((again[0].features - norm[0].features).cwiseAbs().maxCoeff(), 1e-12);

  Sequence constant = s;
  constant.features.col(2).setConstant(3.5);
  auto [c, cs] = normalize_features({constant});
  EXPECT_EQ(c[0].features.col(2), Eigen::VectorXd::Zero(80));
  EXPECT_EQ(cs.stddev(2), 0.0);

  Sequence test = t;
  apply_normalization(test, stats);
  EXPECT_EQ(test.features, norm[1].features);
}

TEST(Dataset, RoundTripAndByteIdenticalRewrite) {
  std::vector<Sequence> seqs;
  for (std::uint64_t i = 0; i < 3; ++i) {
    seqs.push_back(generate(MotionModel::walker(), FeatureModel::preset("walker"), 25, i));
  }
  const auto a = temp_dir("dataset_a");
  const auto b = temp_dir("dataset_b");
  write_dataset(a, seqs, {{"preset", "walker"}});
  write_dataset(b, seqs, {{"preset", "walker"}});
  Meta meta;
  const auto back = read_dataset(a, &meta);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(meta.at("sequences"), "3");
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].features, seqs[i].features);
    EXPECT_LT((back[i].relatives - seqs[i].relatives).cwiseAbs().maxCoeff(), 1e-9);
    for (const char* sub : {"poses/", "features/"}) {
      const std::string name = std::string(sub) + sequence_name(i) + (sub[0] == 'p' ? ".txt" : ".csv");
      EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    }
  }
  EXPECT_EQ(slurp(a / "meta.txt"), slurp(b / "meta.txt"));
  EXPECT_TRUE(slurp(a / "features/00.csv").rfind("f0,f1,", 0) == 0);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Dataset, MissingDirectoryNamesPath) {
  try {
    read_dataset("/nonexistent/gacl_dataset");
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/gacl_dataset"), std::string::npos) << e.what();
  }
}
