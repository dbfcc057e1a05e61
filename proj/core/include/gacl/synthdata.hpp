#pragma once

#include "gacl/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gacl::synth {

/// Ornstein-Uhlenbeck process dx = reversion (mean - x) dt + sigma dW,
/// sampled with its exact discretization. Starts at the mean.
struct OuParams {
  double mean = 0.0;
  double reversion = 1.0;
  double sigma = 0.0;
};

struct MotionModel {
  OuParams speed{1.4, 1.0, 0.2};  // forward body velocity, m/s
  OuParams lateral{0.0, 2.0, 0.0};
  OuParams vertical{0.0, 2.0, 0.0};
  OuParams yaw_rate{0.0, 1.0, 0.0};  // rad/s
  OuParams pitch_rate{0.0, 1.0, 0.0};
  OuParams roll_rate{0.0, 1.0, 0.0};
  /// Deterministic sinusoid added to the yaw rate (rad/s, Hz); models a
  /// sweeping head/hand motion.
  double yaw_oscillation_amplitude = 0.0;
  double yaw_oscillation_frequency = 0.0;
  double timestep = 0.1;
  /// |pitch| and |roll| are clamped to pi/2 - margin.
  double pitch_margin = 0.2;

  void validate() const;

  static MotionModel vehicle();
  static MotionModel walker();
  static MotionModel preset(const std::string& name);
};

struct FeatureModel {
  int encoded_dim = 16;
  int nuisance_dim = 0;
  double noise_sigma = 0.0;
  double nuisance_sigma = 1.0;
  /// Per-component scale applied to the relative 6-vector before encoding.
  Vector6 channel_scale = Vector6::Ones();
  std::uint64_t encoding_seed = 17;
  /// Use [I; 0] instead of a random encoding (requires encoded_dim >= 6).
  bool identity_encoding = false;

  void validate() const;
  int total_dim() const { return encoded_dim + nuisance_dim; }
  /// encoded_dim x 6, full column rank; fixed for a given seed.
  Eigen::MatrixXd encoding() const;

  static FeatureModel preset(const std::string& name);
};

struct Sequence {
  Trajectory trajectory{std::vector<Pose>{Pose::identity()}};  // T + 1 absolute poses
  Eigen::MatrixXd relatives;  // T x 6 (translation, XYZ Euler)
  Eigen::MatrixXd features;   // T x feature dim
  std::uint64_t seed = 0;

  Eigen::Index length() const { return relatives.rows(); }
};

class InvalidRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// `length` relative steps (length + 1 poses). Deterministic in `seed`.
Sequence generate(const MotionModel& motion, const FeatureModel& features, int length,
                  std::uint64_t seed);

/// Random contiguous windows with random start and length in
/// [min_len, max_len]; each window's trajectory is re-anchored at identity.
std::vector<Sequence> sample_subsequences(const Sequence& seq, int count, int min_len,
                                          int max_len, std::uint64_t seed);

/// Contiguous non-overlapping chunks of `chunk_len` steps (last may be shorter).
std::vector<Sequence> split_chunks(const Sequence& seq, int chunk_len);

Sequence slice(const Sequence& seq, Eigen::Index start, Eigen::Index length);

struct FeatureStats {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd stddev;
};

FeatureStats compute_feature_stats(const std::vector<Sequence>& dataset);
/// Subtracts the stored per-dimension mean.
void apply_normalization(Sequence& seq, const FeatureStats& stats);
std::pair<std::vector<Sequence>, FeatureStats> normalize_features(std::vector<Sequence> dataset);

/// Largest |accumulate(relatives)[k] - trajectory[k]| over translation and
/// rotation-matrix entries.
double consistency_error(const Sequence& seq);

using Meta = std::map<std::string, std::string>;

// Dataset directory layout:
//   poses/NN.txt     KITTI 3x4 absolute poses, length + 1 lines
//   features/NN.csv  header f0,f1,...; one row per relative step
//   meta.txt         key = value lines
void write_dataset(const std::filesystem::path& dir, const std::vector<Sequence>& sequences,
                   const Meta& meta);
std::vector<Sequence> read_dataset(const std::filesystem::path& dir, Meta* meta = nullptr);

Meta read_meta(const std::filesystem::path& path);
void write_meta(const std::filesystem::path& path, const Meta& meta);

std::string sequence_name(std::size_t index);

}  // namespace gacl::synth
