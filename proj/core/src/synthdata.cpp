#include "gacl/synthdata.hpp"

#include "gacl/io.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace gacl::synth {

namespace {

class OuProcess {
 public:
  OuProcess(const OuParams& p, double dt) : p_(p), x_(p.mean) {
    decay_ = std::exp(-p.reversion * dt);
    step_sigma_ = p.reversion > 0.0
                      ? p.sigma * std::sqrt((1.0 - decay_ * decay_) / (2.0 * p.reversion))
                      : p.sigma * std::sqrt(dt);
  }

  double value() const { return x_; }

  double step(std::mt19937_64& rng, std::normal_distribution<double>& normal) {
    const double noise = step_sigma_ > 0.0 ? step_sigma_ * normal(rng) : 0.0;
    x_ = p_.mean + (x_ - p_.mean) * decay_ + noise;
    return x_;
  }

 private:
  OuParams p_;
  double x_;
  double decay_ = 1.0;
  double step_sigma_ = 0.0;
};

void check_ou(std::ostringstream& err, const char* name, const OuParams& p) {
  if (!(p.reversion >= 0.0)) err << ' ' << name << ".reversion must be >= 0;";
  if (!(p.sigma >= 0.0)) err << ' ' << name << ".sigma must be >= 0;";
}

}  // namespace

void MotionModel::validate() const {
  std::ostringstream err;
  check_ou(err, "speed", speed);
  check_ou(err, "lateral", lateral);
  check_ou(err, "vertical", vertical);
  check_ou(err, "yaw_rate", yaw_rate);
  check_ou(err, "pitch_rate", pitch_rate);
  check_ou(err, "roll_rate", roll_rate);
  if (!(timestep > 0.0)) err << " timestep must be > 0;";
  if (!(pitch_margin >= 0.1 && pitch_margin < std::numbers::pi / 2)) {
    err << " pitch_margin must be in [0.1, pi/2);";
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("invalid motion model:" + msg);
}

MotionModel MotionModel::vehicle() {
  MotionModel m;
  m.speed = {10.0, 0.2, 1.0};
  m.yaw_rate = {0.0, 0.5, 0.06};
  m.pitch_rate = {0.0, 2.0, 0.005};
  m.roll_rate = {0.0, 2.0, 0.005};
  m.timestep = 0.1;
  return m;
}

MotionModel MotionModel::walker() {
  MotionModel m;
  m.speed = {1.4, 1.0, 0.25};
  m.lateral = {0.0, 2.0, 0.15};
  m.vertical = {0.0, 4.0, 0.05};
  m.yaw_rate = {0.0, 1.0, 0.4};
  m.pitch_rate = {0.0, 2.0, 0.05};
  m.roll_rate = {0.0, 2.0, 0.05};
  m.yaw_oscillation_amplitude = 0.8;
  m.yaw_oscillation_frequency = 0.5;
  m.timestep = 0.2;
  return m;
}

MotionModel MotionModel::preset(const std::string& name) {
  if (name == "vehicle") return vehicle();
  if (name == "walker") return walker();
  throw std::invalid_argument("unknown motion preset '" + name + "' (expected vehicle|walker)");
}

void FeatureModel::validate() const {
  std::ostringstream err;
  if (encoded_dim < 6) err << " encoded_dim must be >= 6;";
  if (nuisance_dim < 0) err << " nuisance_dim must be >= 0;";
  if (!(noise_sigma >= 0.0)) err << " noise_sigma must be >= 0;";
  if (!(nuisance_sigma >= 0.0)) err << " nuisance_sigma must be >= 0;";
  if (!(channel_scale.array() > 0.0).all()) err << " channel_scale entries must be > 0;";
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("invalid feature model:" + msg);
}

Eigen::MatrixXd FeatureModel::encoding() const {
  validate();
  if (identity_encoding) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(encoded_dim, 6);
    e.topRows(6).setIdentity();
    return e;
  }
  std::mt19937_64 rng(encoding_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    Eigen::MatrixXd e(encoded_dim, 6);
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
      for (Eigen::Index c = 0; c < 6; ++c) e(r, c) = normal(rng) / std::sqrt(6.0);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e);
    if (qr.rank() == 6) return e;
  }
}

FeatureModel FeatureModel::preset(const std::string& name) {
  FeatureModel f;
  if (name == "vehicle") {
    f.channel_scale << 1.0, 1.0, 1.0, 50.0, 50.0, 50.0;
    f.noise_sigma = 0.05;
  } else if (name == "walker") {
    f.channel_scale << 4.0, 4.0, 4.0, 10.0, 10.0, 10.0;
    f.noise_sigma = 0.05;
    f.nuisance_dim = 4;
  } else {
    throw std::invalid_argument("unknown feature preset '" + name + "' (expected vehicle|walker)");
  }
  return f;
}

Sequence generate(const MotionModel& motion, const FeatureModel& features, int length,
                  std::uint64_t seed) {
  motion.validate();
  features.validate();
  if (length < 2) throw std::invalid_argument("generate: length must be >= 2");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = motion.timestep;
  OuProcess speed(motion.speed, dt);
  OuProcess lateral(motion.lateral, dt);
  OuProcess vertical(motion.vertical, dt);
  OuProcess yaw_rate(motion.yaw_rate, dt);
  OuProcess pitch_rate(motion.pitch_rate, dt);
  OuProcess roll_rate(motion.roll_rate, dt);
  const double limit = std::numbers::pi / 2 - motion.pitch_margin;

  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(length) + 1);
  Vector3 position = Vector3::Zero();
  Vector3 rpy = Vector3::Zero();
  poses.push_back(Pose::identity());
  for (int k = 0; k < length; ++k) {
    const Vector3 body_velocity(speed.value(), lateral.value(), vertical.value());
    position += poses.back().rotation() * (body_velocity * dt);
    const double time = k * dt;
    const double yaw_osc = motion.yaw_oscillation_amplitude *
                           std::sin(2.0 * std::numbers::pi * motion.yaw_oscillation_frequency * time);
    rpy.x() = std::clamp(rpy.x() + roll_rate.value() * dt, -limit, limit);
    rpy.y() = std::clamp(rpy.y() + pitch_rate.value() * dt, -limit, limit);
    rpy.z() += (yaw_rate.value() + yaw_osc) * dt;
    rpy.z() = std::remainder(rpy.z(), 2.0 * std::numbers::pi);
    poses.push_back(euler_to_pose(position, rpy));

    speed.step(rng, normal);
    lateral.step(rng, normal);
    vertical.step(rng, normal);
    yaw_rate.step(rng, normal);
    pitch_rate.step(rng, normal);
    roll_rate.step(rng, normal);
  }

  Sequence seq;
  seq.seed = seed;
  seq.trajectory = Trajectory(std::move(poses));
  seq.relatives.resize(length, 6);
  const auto rel = seq.trajectory.relatives();
  for (int k = 0; k < length; ++k) seq.relatives.row(k) = to_vector6(rel[k]).transpose();

  const Eigen::MatrixXd enc = features.encoding();
  seq.features.resize(length, features.total_dim());
  for (int k = 0; k < length; ++k) {
    const Vector6 scaled = seq.relatives.row(k).transpose().cwiseProduct(features.channel_scale);
    Eigen::VectorXd f = enc * scaled;
    if (features.noise_sigma > 0.0) {
      for (Eigen::Index i = 0; i < f.size(); ++i) f(i) += features.noise_sigma * normal(rng);
    }
    seq.features.row(k).head(features.encoded_dim) = f.transpose();
    for (int i = 0; i < features.nuisance_dim; ++i) {
      seq.features(k, features.encoded_dim + i) = features.nuisance_sigma * normal(rng);
    }
  }
  return seq;
}

Sequence slice(const Sequence& seq, Eigen::Index start, Eigen::Index length) {
  if (start < 0 || length < 1 || start + length > seq.length()) {
    throw InvalidRange("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                       ") outside sequence of length " + std::to_string(seq.length()));
  }
  Sequence out;
  out.seed = seq.seed;
  out.relatives = seq.relatives.middleRows(start, length);
  out.features = seq.features.middleRows(start, length);
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(length) + 1);
  const Pose& anchor = seq.trajectory[static_cast<std::size_t>(start)];
  for (Eigen::Index k = 0; k <= length; ++k) {
    poses.push_back(relative_between(anchor, seq.trajectory[static_cast<std::size_t>(start + k)]));
  }
  out.trajectory = Trajectory(std::move(poses));
  return out;
}

std::vector<Sequence> sample_subsequences(const Sequence& seq, int count, int min_len,
                                          int max_len, std::uint64_t seed) {
  if (count < 0 || min_len < 1 || min_len > max_len || max_len > seq.length()) {
    throw InvalidRange("sample_subsequences: need 1 <= min_len <= max_len <= " +
                       std::to_string(seq.length()) + ", got [" + std::to_string(min_len) +
                       ", " + std::to_string(max_len) + "] and count " + std::to_string(count));
  }
  std::mt19937_64 rng(seed);
  std::vector<Sequence> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> len_dist(min_len, max_len);
    const int len = len_dist(rng);
    std::uniform_int_distribution<Eigen::Index> start_dist(0, seq.length() - len);
    const Eigen::Index start = start_dist(rng);
    out.push_back(slice(seq, start, len));
  }
  return out;
}

std::vector<Sequence> split_chunks(const Sequence& seq, int chunk_len) {
  if (chunk_len < 1) throw InvalidRange("split_chunks: chunk length must be >= 1");
  std::vector<Sequence> out;
  for (Eigen::Index start = 0; start < seq.length(); start += chunk_len) {
    out.push_back(slice(seq, start, std::min<Eigen::Index>(chunk_len, seq.length() - start)));
  }
  return out;
}

FeatureStats compute_feature_stats(const std::vector<Sequence>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("normalize_features: empty dataset");
  const Eigen::Index dim = dataset.front().features.cols();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim);
  double rows = 0.0;
  for (const Sequence& s : dataset) {
    if (s.features.cols() != dim) throw std::invalid_argument("normalize_features: feature dims differ");
    sum += s.features.colwise().sum();
    rows += static_cast<double>(s.features.rows());
  }
  FeatureStats stats;
  stats.mean = sum / rows;
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(dim);
  for (const Sequence& s : dataset) {
    sq += (s.features.rowwise() - stats.mean).array().square().matrix().colwise().sum();
  }
  stats.stddev = (sq / rows).array().sqrt().matrix();
  return stats;
}

void apply_normalization(Sequence& seq, const FeatureStats& stats) {
  if (seq.features.cols() != stats.mean.size()) {
    throw std::invalid_argument("apply_normalization: feature dimension mismatch");
  }
  seq.features.rowwise() -= stats.mean;
}

std::pair<std::vector<Sequence>, FeatureStats> normalize_features(std::vector<Sequence> dataset) {
  FeatureStats stats = compute_feature_stats(dataset);
  for (Sequence& s : dataset) apply_normalization(s, stats);
  return {std::move(dataset), std::move(stats)};
}

double consistency_error(const Sequence& seq) {
  std::vector<Pose> rel;
  rel.reserve(static_cast<std::size_t>(seq.length()));
  for (Eigen::Index k = 0; k < seq.length(); ++k) {
    rel.push_back(from_vector6(seq.relatives.row(k).transpose()));
  }
  const Trajectory acc = accumulate(rel, seq.trajectory[0]);
  if (acc.size() != seq.trajectory.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t k = 0; k < acc.size(); ++k) {
    worst = std::max(worst, (acc[k].translation() - seq.trajectory[k].translation()).cwiseAbs().maxCoeff());
    worst = std::max(worst, (acc[k].rotation_matrix() - seq.trajectory[k].rotation_matrix()).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::string sequence_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02zu", index);
  return buf;
}

void write_meta(const std::filesystem::path& path, const Meta& meta) {
  auto out = io::open_output(path);
  for (const auto& [key, value] : meta) out << key << " = " << value << '\n';
  if (!out) throw io::IoError("failed writing " + path.string());
}

Meta read_meta(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  Meta meta;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw io::ParseError(path.string(), line_no, "expected key = value");
    meta[std::string(io::trim(body.substr(0, eq)))] = std::string(io::trim(body.substr(eq + 1)));
  }
  return meta;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<Sequence>& sequences,
                   const Meta& meta) {
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const Sequence& s = sequences[i];
    io::write_kitti_poses(dir / "poses" / (sequence_name(i) + ".txt"), s.trajectory);
    const auto path = dir / "features" / (sequence_name(i) + ".csv");
    auto out = io::open_output(path);
    for (Eigen::Index c = 0; c < s.features.cols(); ++c) out << (c ? ",f" : "f") << c;
    out << '\n';
    for (Eigen::Index r = 0; r < s.features.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.features.cols(); ++c) {
        if (c) out << ',';
        out << io::format_double(s.features(r, c));
      }
      out << '\n';
    }
    if (!out) throw io::IoError("failed writing " + path.string());
  }
  Meta full = meta;
  full["sequences"] = std::to_string(sequences.size());
  write_meta(dir / "meta.txt", full);
}

namespace {

Eigen::MatrixXd read_feature_csv(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw io::ParseError(path.string(), 1, "missing header row");
  ++line_no;
  const std::size_t cols = io::split(io::trim(line), ',').size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty()) continue;
    const auto tokens = io::split(body, ',');
    if (tokens.size() != cols) {
      throw io::ParseError(path.string(), line_no,
                           "expected " + std::to_string(cols) + " columns, found " +
                               std::to_string(tokens.size()));
    }
    for (const auto& tok : tokens) {
      double v = 0.0;
      if (!io::parse_double(io::trim(tok), v)) {
        throw io::ParseError(path.string(), line_no, "not a number: '" + std::string(tok) + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < values.size(); ++i) {
    m(static_cast<Eigen::Index>(i / cols), static_cast<Eigen::Index>(i % cols)) = values[i];
  }
  return m;
}

}  // namespace

std::vector<Sequence> read_dataset(const std::filesystem::path& dir, Meta* meta) {
  const Meta m = read_meta(dir / "meta.txt");
  if (meta) *meta = m;
  const auto it = m.find("sequences");
  double count = 0.0;
  if (it == m.end() || !io::parse_double(it->second, count) || count < 1) {
    throw io::IoError(dir.string() + "/meta.txt: missing or invalid 'sequences' entry");
  }
  std::vector<Sequence> out;
  for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
    Sequence s;
    s.trajectory = io::read_kitti_poses(dir / "poses" / (sequence_name(i) + ".txt"));
    const auto rel = s.trajectory.relatives();
    s.relatives.resize(static_cast<Eigen::Index>(rel.size()), 6);
    for (std::size_t k = 0; k < rel.size(); ++k) {
      s.relatives.row(static_cast<Eigen::Index>(k)) = to_vector6(rel[k]).transpose();
    }
    const auto feature_path = dir / "features" / (sequence_name(i) + ".csv");
    s.features = read_feature_csv(feature_path);
    if (s.features.rows() != s.relatives.rows()) {
      throw io::IoError(feature_path.string() + ": " + std::to_string(s.features.rows()) +
                        " feature rows but " + std::to_string(s.relatives.rows()) +
                        " relative steps");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gacl::synth
