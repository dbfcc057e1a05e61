#include "gacl/trainer.hpp"

#include "gacl/io.hpp"
#include "gacl/version.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace gacl::train {

namespace fs = std::filesystem;
using io::format_double;

namespace {

std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

template <typename T>
std::string join_ints(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<std::uint64_t> to_seeds(config::Reader& r, const std::string& key,
                                    const std::vector<std::uint64_t>& fallback) {
  std::vector<double> fb(fallback.begin(), fallback.end());
  const auto values = r.reals(key, fb);
  std::vector<std::uint64_t> out;
  for (double v : values) {
    if (v < 0 || v != std::floor(v) || v > 9.0e15) {
      r.error(key, "seeds must be non-negative integers");
      return fallback;
    }
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

}  // namespace

// ---- config ---------------------------------------------------------------

RunConfig RunConfig::from_config(const config::KeyValueConfig& cfg) {
  RunConfig c;
  config::KeyValueConfig relevant;
  for (const auto& [k, v] : cfg.entries()) {
    if (k.rfind("manifest.", 0) != 0) relevant.set(k, v);
  }
  config::Reader r(relevant);

  c.data.path = r.text("data.path", c.data.path);
  c.data.preset = r.text("data.preset", c.data.preset);
  c.data.sequences = r.integer("data.sequences", c.data.sequences);
  c.data.length = r.integer("data.length", c.data.length);
  c.data.test_length = r.integer("data.test_length", c.data.test_length);
  if (relevant.has("data.noise")) c.data.noise = r.real("data.noise", 0.0);
  if (relevant.has("data.seed")) c.data.seed = r.seed("data.seed", 0);
  c.data.validation_split = r.real("data.validation_split", c.data.validation_split);

  c.model.lstm_sizes = r.integers("model.lstm_sizes", c.model.lstm_sizes);
  c.model.head_layers = r.integer("model.head_layers", c.model.head_layers);
  c.model.head_hidden = r.integer("model.head_hidden", c.model.head_hidden);
  c.model.dropout = r.real("model.dropout", c.model.dropout);

  const auto mode = r.text("schedule.mode", curriculum::to_string(c.schedule.mode));
  try {
    c.schedule.mode = curriculum::parse_mode(mode);
  } catch (const std::exception& e) {
    r.error("schedule.mode", e.what());
  }
  c.schedule.alphas = r.reals("schedule.alphas", c.schedule.alphas);
  c.schedule.alpha = r.real("schedule.alpha", c.schedule.alpha);
  if (cfg.has("schedule.delta")) c.schedule.delta = r.real("schedule.delta", 0.0);
  if (cfg.has("schedule.zeta")) c.schedule.zeta = r.real("schedule.zeta", 0.0);
  c.schedule.window = r.integer("schedule.window", c.schedule.window);
  c.schedule.limits.max_epochs = r.integer("schedule.max_epochs", c.schedule.limits.max_epochs);
  c.schedule.limits.patience = r.integer("schedule.patience", c.schedule.limits.patience);
  c.schedule.limits.min_delta = r.real("schedule.min_delta", c.schedule.limits.min_delta);

  c.sampling.per_sequence = r.integer("train.samples_per_sequence", c.sampling.per_sequence);
  c.sampling.min_length = r.integer("train.min_length", c.sampling.min_length);
  c.sampling.max_length = r.integer("train.max_length", c.sampling.max_length);
  c.learning_rate = r.real("train.learning_rate", c.learning_rate);
  c.grad_clip = r.real("train.grad_clip", c.grad_clip);
  c.seed = r.seed("train.seed", c.seed);
  c.threads = r.integer("train.threads", c.threads);
  c.output_dir = r.text("output.dir", c.output_dir);

  c.ablation_seeds = to_seeds(r, "ablate.seeds", c.ablation_seeds);
  c.sweep_alphas = r.reals("sweep.alphas", c.sweep_alphas);
  c.sweep_epochs = r.integer("sweep.epochs", c.sweep_epochs);

  r.reject_unknown();
  r.finish();
  c.validate();
  return c;
}

config::KeyValueConfig RunConfig::to_config() const {
  config::KeyValueConfig k;
  k.set("data.path", data.path);
  k.set("data.preset", data.preset);
  k.set("data.sequences", std::to_string(data.sequences));
  k.set("data.length", std::to_string(data.length));
  k.set("data.test_length", std::to_string(data.test_length));
  k.set("data.noise", format_double(data.noise.value_or(
                          synth::FeatureModel::preset(data.preset).noise_sigma)));
  k.set("data.seed", std::to_string(data.seed.value_or(seed)));
  k.set("data.validation_split", format_double(data.validation_split));
  k.set("model.lstm_sizes", join_ints(model.lstm_sizes));
  k.set("model.head_layers", std::to_string(model.head_layers));
  k.set("model.head_hidden", std::to_string(model.head_hidden));
  k.set("model.dropout", format_double(model.dropout));
  k.set("schedule.mode", curriculum::to_string(schedule.mode));
  k.set("schedule.alphas", join_reals(schedule.alphas));
  const auto w = loss_weights();
  k.set("schedule.alpha", format_double(w.alpha));
  k.set("schedule.delta", format_double(w.delta));
  k.set("schedule.zeta", format_double(w.zeta));
  k.set("schedule.window", std::to_string(w.window));
  k.set("schedule.max_epochs", std::to_string(schedule.limits.max_epochs));
  k.set("schedule.patience", std::to_string(schedule.limits.patience));
  k.set("schedule.min_delta", format_double(schedule.limits.min_delta));
  k.set("train.samples_per_sequence", std::to_string(sampling.per_sequence));
  k.set("train.min_length", std::to_string(sampling.min_length));
  k.set("train.max_length", std::to_string(sampling.max_length));
  k.set("train.learning_rate", format_double(learning_rate));
  k.set("train.grad_clip", format_double(grad_clip));
  k.set("train.seed", std::to_string(seed));
  k.set("train.threads", std::to_string(threads));
  k.set("output.dir", output_dir);
  k.set("ablate.seeds", join_ints(ablation_seeds));
  k.set("sweep.alphas", join_reals(sweep_alphas));
  k.set("sweep.epochs", std::to_string(sweep_epochs));
  return k;
}

void RunConfig::validate() const {
  std::vector<std::string> p;
  auto need = [&p](bool ok, const std::string& key, const std::string& msg) {
    if (!ok) p.push_back(key + ": " + msg);
  };
  if (data.path.empty()) {
    need(data.preset == "walker" || data.preset == "vehicle", "data.preset",
         "expected walker or vehicle, got '" + data.preset + "'");
    need(data.sequences >= 2, "data.sequences", "need at least 2 sequences");
    need(data.test_length >= 2, "data.test_length", "must be >= 2");
    need(!data.noise || *data.noise >= 0.0, "data.noise", "must be >= 0");
  } else {
    need(fs::is_directory(data.path), "data.path",
         "dataset directory '" + data.path + "' does not exist");
  }
  need(data.length >= 2, "data.length", "must be >= 2");
  need(data.validation_split > 0.0 && data.validation_split < 1.0, "data.validation_split",
       "must be in (0, 1)");
  need(!model.lstm_sizes.empty() &&
           std::all_of(model.lstm_sizes.begin(), model.lstm_sizes.end(), [](int n) { return n > 0; }),
       "model.lstm_sizes", "need at least one positive layer size");
  need(model.head_layers == 1 || model.head_layers == 2, "model.head_layers", "must be 1 or 2");
  need(model.head_hidden > 0, "model.head_hidden", "must be > 0");
  need(model.dropout >= 0.0 && model.dropout < 1.0, "model.dropout", "must be in [0, 1)");
  need(!schedule.alphas.empty(), "schedule.alphas", "must not be empty");
  for (double a : schedule.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      need(false, "schedule.alphas", "every alpha must be in [0, 1]");
      break;
    }
  }
  need(schedule.alpha >= 0.0 && schedule.alpha <= 1.0, "schedule.alpha",
       "must be in [0, 1]");
  need(!schedule.delta || *schedule.delta >= 0.0, "schedule.delta", "must be >= 0");
  need(!schedule.zeta || *schedule.zeta >= 0.0, "schedule.zeta", "must be >= 0");
  need(schedule.window >= 1, "schedule.window", "must be >= 1");
  need(schedule.limits.max_epochs >= 1, "schedule.max_epochs", "must be >= 1");
  need(schedule.limits.patience >= 1, "schedule.patience", "must be >= 1");
  need(schedule.limits.min_delta >= 0.0, "schedule.min_delta", "must be >= 0");
  need(sampling.per_sequence >= 1, "train.samples_per_sequence", "must be >= 1");
  need(sampling.min_length >= 1, "train.min_length", "must be >= 1");
  need(sampling.max_length >= sampling.min_length, "train.max_length", "must be >= train.min_length");
  need(sampling.max_length <= data.length, "train.max_length", "must not exceed data.length");
  need(learning_rate > 0.0, "train.learning_rate", "must be > 0");
  need(grad_clip > 0.0, "train.grad_clip", "must be > 0");
  need(threads >= 0, "train.threads", "must be >= 0");
  need(ablation_seeds.size() >= 2, "ablate.seeds", "needs at least two seeds");
  for (double a : sweep_alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      need(false, "sweep.alphas", "every alpha must be in [0, 1]");
      break;
    }
  }
  need(sweep_epochs >= 1, "sweep.epochs", "must be >= 1");
  if (!p.empty()) throw config::ConfigError(std::move(p));
}

loss::LossWeights preset_loss_weights(const std::string& preset) {
  if (preset == "vehicle") return {1.0, 1.0, 100.0, 2};
  if (preset == "walker") return {1.0, 10.0, 1.0, 2};
  throw std::invalid_argument("unknown preset '" + preset + "'");
}

loss::LossWeights RunConfig::loss_weights() const {
  loss::LossWeights w = preset_loss_weights(data.preset);
  w.alpha = schedule.alpha;
  w.window = schedule.window;
  if (schedule.delta) w.delta = *schedule.delta;
  if (schedule.zeta) w.zeta = *schedule.zeta;
  return w;
}

curriculum::Schedule RunConfig::make_schedule() const {
  switch (schedule.mode) {
    case curriculum::Mode::Curriculum:
      return curriculum::make_curriculum(loss_weights(), schedule.limits, schedule.alphas);
    case curriculum::Mode::AntiCurriculum:
      return curriculum::make_anti_curriculum(loss_weights(), schedule.limits, schedule.alphas);
    case curriculum::Mode::Fixed:
      return curriculum::make_fixed(loss_weights(), schedule.limits);
  }
  throw std::logic_error("unreachable schedule mode");
}

NonFiniteLoss::NonFiniteLoss(int epoch, const std::string& what)
    : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) + ": " + what),
      epoch_(epoch) {}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---- data -----------------------------------------------------------------

std::vector<synth::Sequence> generate_sequences(const DataConfig& data, std::uint64_t seed) {
  const auto motion = synth::MotionModel::preset(data.preset);
  auto features = synth::FeatureModel::preset(data.preset);
  if (data.noise) features.noise_sigma = *data.noise;
  std::vector<synth::Sequence> out;
  for (int i = 0; i < data.sequences; ++i) {
    out.push_back(synth::generate(motion, features, data.length,
                                  derive_seed(seed, 1, static_cast<std::uint64_t>(i))));
  }
  return out;
}

PreparedData prepare_data(const RunConfig& config) {
  config.validate();
  std::vector<synth::Sequence> all;
  std::vector<synth::Sequence> test;
  if (!config.data.path.empty()) {
    all = synth::read_dataset(config.data.path);
    if (all.size() < 2) {
      throw config::ConfigError({"data.path: dataset needs at least 2 sequences"});
    }
  } else {
    const std::uint64_t base = config.data.seed.value_or(config.seed);
    all = generate_sequences(config.data, base);
    auto features = synth::FeatureModel::preset(config.data.preset);
    if (config.data.noise) features.noise_sigma = *config.data.noise;
    test.push_back(synth::generate(synth::MotionModel::preset(config.data.preset), features,
                                   config.data.test_length, derive_seed(base, 2)));
  }

  const auto n = static_cast<int>(all.size());
  const int n_val = std::clamp(static_cast<int>(std::lround(config.data.validation_split * n)), 1, n - 1);
  PreparedData data;
  data.train.assign(all.begin(), all.end() - n_val);
  data.validation.assign(all.end() - n_val, all.end());
  // A loaded dataset has no separate test sequence; score on validation.
  data.test = test.empty() ? data.validation : test;

  data.stats = synth::compute_feature_stats(data.train);
  for (auto* group : {&data.train, &data.validation, &data.test}) {
    for (auto& s : *group) synth::apply_normalization(s, data.stats);
  }
  data.feature_dim = static_cast<int>(data.train.front().features.cols());
  for (const auto* group : {&data.validation, &data.test}) {
    for (const auto& s : *group) {
      if (s.features.cols() != data.feature_dim) {
        throw std::invalid_argument("sequences disagree on feature dimension");
      }
    }
  }
  return data;
}

// ---- evaluation helpers -----------------------------------------------------

namespace {

struct ChunkPredictions {
  std::vector<Eigen::MatrixXd> predicted;  // per chunk, rows x 6
  std::vector<Eigen::MatrixXd> truth;
};

ChunkPredictions predict_chunks(const model::PoseRegressor& model, ad::ParamStore& params,
                                const std::vector<synth::Sequence>& sequences, int chunk_length) {
  ChunkPredictions out;
  for (const auto& seq : sequences) {
    for (const auto& chunk : synth::split_chunks(seq, chunk_length)) {
      out.predicted.push_back(model.predict(params, chunk.features));
      out.truth.push_back(chunk.relatives);
    }
  }
  return out;
}

double objective_per_step(const ChunkPredictions& p, const loss::LossWeights& weights) {
  double total = 0.0;
  Eigen::Index steps = 0;
  for (std::size_t c = 0; c < p.predicted.size(); ++c) {
    ad::Tape tape;
    std::vector<ad::Value> preds;
    for (Eigen::Index t = 0; t < p.predicted[c].rows(); ++t) {
      preds.push_back(tape.constant(p.predicted[c].row(t).transpose()));
    }
    total += loss::sequence_loss(tape, preds, p.truth[c], weights).scalar();
    steps += p.predicted[c].rows();
  }
  return steps ? total / static_cast<double>(steps) : 0.0;
}

std::vector<Pose> to_poses(const Eigen::MatrixXd& rows) {
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index t = 0; t < rows.rows(); ++t) out.push_back(from_vector6(rows.row(t).transpose()));
  return out;
}

eval::RpeReport frame_errors(const ChunkPredictions& p) {
  std::vector<Pose> gt_rel;
  std::vector<Pose> est_rel;
  for (std::size_t c = 0; c < p.predicted.size(); ++c) {
    for (const auto& q : to_poses(p.truth[c])) gt_rel.push_back(q);
    for (const auto& q : to_poses(p.predicted[c])) est_rel.push_back(q);
  }
  return eval::rpe(accumulate(gt_rel), accumulate(est_rel));
}

void check_finite(double v, int epoch, const std::string& what) {
  if (!std::isfinite(v)) throw NonFiniteLoss(epoch, what);
}

}  // namespace

double validation_loss(const model::PoseRegressor& model, ad::ParamStore& params,
                       const std::vector<synth::Sequence>& sequences, int chunk_length,
                       const loss::LossWeights& weights) {
  return objective_per_step(predict_chunks(model, params, sequences, chunk_length), weights);
}

Trajectory predict_trajectory(const model::PoseRegressor& model, ad::ParamStore& params,
                              const synth::Sequence& sequence, int chunk_length) {
  std::vector<Pose> rel;
  for (const auto& chunk : synth::split_chunks(sequence, chunk_length)) {
    for (const auto& q : to_poses(model.predict(params, chunk.features))) rel.push_back(q);
  }
  return accumulate(rel);
}

HeldOutMetrics evaluate_held_out(const model::PoseRegressor& model, ad::ParamStore& params,
                                 const std::vector<synth::Sequence>& sequences, int chunk_length) {
  HeldOutMetrics m;
  std::vector<eval::SegmentErrorReport> seg_reports;
  double sq = 0.0;
  std::size_t frames = 0;
  double rpe_t = 0.0;
  double rpe_r = 0.0;
  std::size_t rpe_t_frames = 0;
  for (const auto& seq : sequences) {
    const auto gt = accumulate(to_poses(seq.relatives));
    const auto est = predict_trajectory(model, params, seq, chunk_length);
    const auto lengths = eval::default_segment_lengths(gt);
    if (!lengths.empty()) seg_reports.push_back(eval::segment_errors(gt, est, lengths));
    const auto r = eval::rpe(gt, est);
    const std::size_t tf = r.frames - r.degenerate_frames;
    rpe_t += r.translation_pct * static_cast<double>(tf);
    rpe_t_frames += tf;
    rpe_r += r.rotation_deg * static_cast<double>(r.frames);
    m.rpe.frames += r.frames;
    m.rpe.degenerate_frames += r.degenerate_frames;
    const auto a = eval::ate(gt, est);
    for (double e : a.errors) sq += e * e;
    frames += a.errors.size();
  }
  m.rpe.translation_pct = rpe_t_frames ? rpe_t / static_cast<double>(rpe_t_frames) : 0.0;
  m.rpe.rotation_deg = m.rpe.frames ? rpe_r / static_cast<double>(m.rpe.frames) : 0.0;
  m.ate_rmse = frames ? std::sqrt(sq / static_cast<double>(frames)) : 0.0;

  // Segment rows are merged per length, weighted by segment count.
  for (const auto& rep : seg_reports) {
    for (const auto& row : rep.rows) {
      auto it = std::find_if(m.segments.rows.begin(), m.segments.rows.end(),
                             [&](const eval::SegmentError& e) { return e.length == row.length; });
      if (it == m.segments.rows.end()) {
        m.segments.rows.push_back(row);
        continue;
      }
      const double n0 = static_cast<double>(it->segments);
      const double n1 = static_cast<double>(row.segments);
      it->translation_pct = (it->translation_pct * n0 + row.translation_pct * n1) / (n0 + n1);
      it->rotation_deg_per_m = (it->rotation_deg_per_m * n0 + row.rotation_deg_per_m * n1) / (n0 + n1);
      it->segments += row.segments;
    }
  }
  std::sort(m.segments.rows.begin(), m.segments.rows.end(),
            [](const auto& a, const auto& b) { return a.length < b.length; });
  return m;
}

// ---- training -------------------------------------------------------------

namespace {

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  auto out = io::open_output(path);
  fn(out);
  if (!out) throw io::IoError("failed writing " + path.string());
}

std::string stage_checkpoint_name(int stage) {
  return "checkpoints/stage_" + std::to_string(stage) + ".ckpt";
}

}  // namespace

TrainResult train(const RunConfig& config, const EpochCallback& on_epoch) {
  const auto data = prepare_data(config);
  return train(config, data, config.make_schedule(), on_epoch);
}

TrainResult train(const RunConfig& config, const PreparedData& data,
                  const curriculum::Schedule& schedule, const EpochCallback& on_epoch) {
  schedule.validate();
  auto model_cfg = config.model;
  model_cfg.input_dim = data.feature_dim;
  const model::PoseRegressor model(model_cfg);
  TrainResult result{model.init_params(derive_seed(config.seed, 3)), {}};
  auto& params = result.params;
  auto& log = result.log;
  log.seed = config.seed;

  const bool write = !config.output_dir.empty();
  const fs::path out_dir = config.output_dir;
  std::vector<std::string> files;
  const ad::AdamOptions adam{config.learning_rate};
  const loss::LossWeights relative_weights{1.0, schedule.stages.front().weights.delta,
                                           schedule.stages.front().weights.zeta, 1};

  curriculum::StageProgress progress;
  int epoch = 0;
  while (!progress.complete) {
    ++epoch;
    const auto start = std::chrono::steady_clock::now();
    const auto& weights = curriculum::current_weights(progress, schedule);
    const int stage = static_cast<int>(progress.stage_index) + 1;

    // Sub-trajectories depend only on (seed, epoch, sequence), never on the
    // schedule, so every mode sees the same samples.
    std::vector<synth::Sequence> batch;
    for (std::size_t i = 0; i < data.train.size(); ++i) {
      auto subs = synth::sample_subsequences(
          data.train[i], config.sampling.per_sequence, config.sampling.min_length,
          std::min<int>(config.sampling.max_length, static_cast<int>(data.train[i].length())),
          derive_seed(config.seed, 4 + static_cast<std::uint64_t>(epoch), i));
      for (auto& s : subs) batch.push_back(std::move(s));
    }
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, 5, static_cast<std::uint64_t>(epoch)));
    std::shuffle(batch.begin(), batch.end(), shuffle_rng);
    std::mt19937_64 dropout_rng(derive_seed(config.seed, 6, static_cast<std::uint64_t>(epoch)));

    double train_total = 0.0;
    Eigen::Index train_steps = 0;
    for (const auto& sub : batch) {
      ad::Tape tape;
      const auto out = model.forward_sequence(tape, params, sub.features, model.zero_state(),
                                              model_cfg.dropout > 0.0 ? &dropout_rng : nullptr);
      const auto total = loss::sequence_loss(tape, out.poses, sub.relatives, weights);
      const double value = total.scalar();
      check_finite(value, epoch, "training objective");
      tape.backward(total);
      check_finite(ad::clip_grad_norm(params, config.grad_clip), epoch, "gradient norm");
      ad::adam_step(params, adam);
      train_total += value;
      train_steps += sub.length();
    }

    const auto val_pred = predict_chunks(model, params, data.validation, config.sampling.max_length);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = stage;
    rec.alpha = weights.alpha;
    rec.train_loss = train_total / static_cast<double>(std::max<Eigen::Index>(train_steps, 1));
    rec.validation_loss = objective_per_step(val_pred, weights);
    rec.validation_relative_loss =
        weights.alpha == 1.0 ? rec.validation_loss : objective_per_step(val_pred, relative_weights);
    check_finite(rec.validation_loss, epoch, "validation objective");
    const auto frame = frame_errors(val_pred);
    rec.validation_translation_pct = frame.translation_pct;
    rec.validation_rotation_deg = frame.rotation_deg;

    const auto adv = curriculum::advance(progress, rec.validation_loss, schedule);
    rec.transition = adv.reason;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.epochs.push_back(rec);

    if (adv.transition) {
      const int to = adv.progress.complete ? 0 : static_cast<int>(adv.progress.stage_index) + 1;
      log.transitions.push_back({epoch, stage, to, weights.alpha, rec.validation_loss, adv.reason});
      StageRecord sr;
      sr.stage = stage;
      sr.end_epoch = epoch;
      sr.alpha = weights.alpha;
      sr.validation_loss = rec.validation_loss;
      sr.validation_relative_loss = rec.validation_relative_loss;
      sr.test = evaluate_held_out(model, params, data.test, config.sampling.max_length);
      log.stages.push_back(sr);
      if (write) {
        const auto name = stage_checkpoint_name(stage);
        ad::save_checkpoint(params, out_dir / name);
        files.push_back(name);
      }
    }
    progress = adv.progress;
    if (on_epoch) on_epoch(rec);
  }
  log.final_metrics = log.stages.back().test;

  if (write) {
    ad::save_checkpoint(params, out_dir / "checkpoints/final.ckpt");
    files.push_back("checkpoints/final.ckpt");
    write_text(out_dir / "runlog.csv", [&](std::ostream& o) { write_runlog_csv(o, log); });
    write_text(out_dir / "timing.csv", [&](std::ostream& o) { write_timing_csv(o, log); });
    write_text(out_dir / "transitions.csv", [&](std::ostream& o) { write_transitions_csv(o, log); });
    write_text(out_dir / "stages.csv", [&](std::ostream& o) { write_stage_csv(o, log); });
    write_text(out_dir / "test_segments.csv",
               [&](std::ostream& o) { eval::write_segment_csv(o, log.final_metrics.segments); });
    files.insert(files.end(), {"runlog.csv", "timing.csv", "transitions.csv", "stages.csv",
                               "test_segments.csv"});
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      const auto name = synth::sequence_name(i);
      io::write_kitti_poses(out_dir / ("test_gt_" + name + ".txt"),
                            accumulate(to_poses(data.test[i].relatives)));
      io::write_kitti_poses(out_dir / ("test_est_" + name + ".txt"),
                            predict_trajectory(model, params, data.test[i], config.sampling.max_length));
      files.push_back("test_gt_" + name + ".txt");
      files.push_back("test_est_" + name + ".txt");
    }
    write_manifest(out_dir, "train", config, files);
  }
  return result;
}

// ---- CSV ------------------------------------------------------------------

namespace {

std::string reason_text(curriculum::TransitionReason r) {
  return r == curriculum::TransitionReason::None ? "" : curriculum::to_string(r);
}

}  // namespace

void write_runlog_csv(std::ostream& out, const RunLog& log) {
  out << "epoch,stage,alpha,train_loss,validation_loss,validation_relative_loss,"
         "validation_translation_pct,validation_rotation_deg,transition\n";
  for (const auto& e : log.epochs) {
    out << e.epoch << ',' << e.stage << ',' << format_double(e.alpha) << ','
        << format_double(e.train_loss) << ',' << format_double(e.validation_loss) << ','
        << format_double(e.validation_relative_loss) << ','
        << format_double(e.validation_translation_pct) << ','
        << format_double(e.validation_rotation_deg) << ',' << reason_text(e.transition) << '\n';
  }
}

void write_timing_csv(std::ostream& out, const RunLog& log) {
  out << "epoch,wall_seconds\n";
  for (const auto& e : log.epochs) out << e.epoch << ',' << format_double(e.wall_seconds) << '\n';
}

void write_transitions_csv(std::ostream& out, const RunLog& log) {
  out << "epoch,from_stage,to_stage,alpha,validation_loss,reason\n";
  for (const auto& t : log.transitions) {
    out << t.epoch << ',' << t.from_stage << ',' << t.to_stage << ',' << format_double(t.alpha)
        << ',' << format_double(t.validation_loss) << ',' << reason_text(t.reason) << '\n';
  }
}

void write_stage_csv(std::ostream& out, const RunLog& log) {
  out << "stage,end_epoch,alpha,validation_loss,validation_relative_loss,segment_translation_pct,"
         "segment_rotation_deg_per_m,rpe_translation_pct,rpe_rotation_deg,ate_rmse_m\n";
  for (const auto& s : log.stages) {
    out << s.stage << ',' << s.end_epoch << ',' << format_double(s.alpha) << ','
        << format_double(s.validation_loss) << ',' << format_double(s.validation_relative_loss)
        << ',' << format_double(s.test.segments.mean_translation_pct()) << ','
        << format_double(s.test.segments.mean_rotation_deg_per_m()) << ','
        << format_double(s.test.rpe.translation_pct) << ','
        << format_double(s.test.rpe.rotation_deg) << ',' << format_double(s.test.ate_rmse) << '\n';
  }
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& config,
                    const std::vector<std::string>& files) {
  auto kv = config.to_config();
  kv.set("manifest.tool", kToolName);
  kv.set("manifest.version", kVersion);
  kv.set("manifest.command", command);
  kv.set("manifest.seed", std::to_string(config.seed));
  std::string list;
  for (const auto& f : files) list += (list.empty() ? "" : " ") + f;
  kv.set("manifest.files", list);
  write_text(dir / "manifest.txt", [&](std::ostream& o) { o << kv.dump(); });
}

// ---- ablation -------------------------------------------------------------

std::vector<AblationMode> ablation_modes(const RunConfig& config) {
  const auto base = config.loss_weights();
  const auto& limits = config.schedule.limits;
  auto fixed_limits = limits;
  fixed_limits.max_epochs = limits.max_epochs * static_cast<int>(config.schedule.alphas.size());
  loss::LossWeights relative = base;
  relative.alpha = 1.0;
  loss::LossWeights bounded = base;
  bounded.alpha = 0.5;
  bounded.window = 2;
  return {
      {"curriculum", curriculum::make_curriculum(base, limits, config.schedule.alphas)},
      {"anti-curriculum", curriculum::make_anti_curriculum(base, limits, config.schedule.alphas)},
      {"fixed-relative", curriculum::make_fixed(relative, fixed_limits)},
      {"fixed-bounded", curriculum::make_fixed(bounded, fixed_limits)},
  };
}

AblationReport ablate(const RunConfig& config, const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw std::invalid_argument("ablate: need at least 2 seeds");
  const auto modes = ablation_modes(config);
  const auto& bounded_weights = modes.back().schedule.stages.front().weights;

  std::vector<RunConfig> seed_configs;
  std::vector<PreparedData> seed_data(seeds.size());
  for (auto s : seeds) {
    auto c = config;
    c.seed = s;
    c.output_dir.clear();
    seed_configs.push_back(c);
  }
  parallel_for(seeds.size(), config.threads,
               [&](std::size_t i) { seed_data[i] = prepare_data(seed_configs[i]); });

  AblationReport report;
  report.cells.resize(modes.size() * seeds.size());
  parallel_for(report.cells.size(), config.threads, [&](std::size_t idx) {
    const std::size_t m = idx / seeds.size();
    const std::size_t s = idx % seeds.size();
    auto run_cfg = seed_configs[s];
    if (!config.output_dir.empty()) {
      run_cfg.output_dir =
          (fs::path(config.output_dir) / "runs" / (modes[m].name + "-seed" + std::to_string(seeds[s])))
              .string();
    }
    auto result = train(run_cfg, seed_data[s], modes[m].schedule);
    AblationCell cell;
    cell.mode = modes[m].name;
    cell.seed = seeds[s];
    cell.first_stage_validation_relative_loss = result.log.stages.front().validation_relative_loss;
    auto model_cfg = run_cfg.model;
    model_cfg.input_dim = seed_data[s].feature_dim;
    cell.final_bounded_validation_loss =
        validation_loss(model::PoseRegressor(model_cfg), result.params, seed_data[s].validation,
                        run_cfg.sampling.max_length, bounded_weights);
    cell.log = std::move(result.log);
    report.cells[idx] = std::move(cell);
  });
  return report;
}

void write_ablation_summary_csv(std::ostream& out, const AblationReport& report) {
  out << "mode,seed,epochs,first_stage_validation_relative_loss,final_bounded_validation_loss,"
         "segment_translation_pct,segment_rotation_deg_per_m,rpe_translation_pct,"
         "rpe_rotation_deg,ate_rmse_m\n";
  for (const auto& c : report.cells) {
    const auto& m = c.log.final_metrics;
    out << c.mode << ',' << c.seed << ',' << c.log.epochs.size() << ','
        << format_double(c.first_stage_validation_relative_loss) << ','
        << format_double(c.final_bounded_validation_loss) << ','
        << format_double(m.segments.mean_translation_pct()) << ','
        << format_double(m.segments.mean_rotation_deg_per_m()) << ','
        << format_double(m.rpe.translation_pct) << ',' << format_double(m.rpe.rotation_deg) << ','
        << format_double(m.ate_rmse) << '\n';
  }
}

void write_ablation_stages_csv(std::ostream& out, const AblationReport& report) {
  out << "mode,seed,stage,end_epoch,alpha,validation_loss,segment_translation_pct,"
         "segment_rotation_deg_per_m\n";
  for (const auto& c : report.cells) {
    for (const auto& s : c.log.stages) {
      out << c.mode << ',' << c.seed << ',' << s.stage << ',' << s.end_epoch << ','
          << format_double(s.alpha) << ',' << format_double(s.validation_loss) << ','
          << format_double(s.test.segments.mean_translation_pct()) << ','
          << format_double(s.test.segments.mean_rotation_deg_per_m()) << '\n';
    }
  }
}

void write_ablation_curves_csv(std::ostream& out, const AblationReport& report) {
  out << "mode,seed,epoch,validation_translation_pct,validation_rotation_deg\n";
  for (const auto& c : report.cells) {
    for (const auto& e : c.log.epochs) {
      out << c.mode << ',' << c.seed << ',' << e.epoch << ','
          << format_double(e.validation_translation_pct) << ','
          << format_double(e.validation_rotation_deg) << '\n';
    }
  }
}

// ---- alpha sweep ----------------------------------------------------------

SweepResult alpha_sweep(const RunConfig& config, const std::vector<double>& alphas, int epochs) {
  if (alphas.empty()) throw std::invalid_argument("alpha_sweep: empty alpha list");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha_sweep: alpha outside [0, 1]");
  }
  if (epochs < 1) throw std::invalid_argument("alpha_sweep: epochs must be >= 1");
  auto run_cfg = config;
  run_cfg.output_dir.clear();
  const auto data = prepare_data(run_cfg);
  auto limits = config.schedule.limits;
  limits.max_epochs = epochs;

  SweepResult result;
  result.seed = config.seed;
  result.points.resize(alphas.size());
  parallel_for(alphas.size(), config.threads, [&](std::size_t i) {
    auto weights = config.loss_weights();
    weights.alpha = alphas[i];
    auto trained = train(run_cfg, data, curriculum::make_fixed(weights, limits));
    const auto& last = trained.log.epochs.back();
    result.points[i] = {alphas[i], last.validation_translation_pct, last.validation_rotation_deg, 0, 0};
  });
  double max_t = 0.0;
  double max_r = 0.0;
  for (const auto& p : result.points) {
    max_t = std::max(max_t, p.translation_pct);
    max_r = std::max(max_r, p.rotation_deg);
  }
  for (auto& p : result.points) {
    p.normalized_translation = max_t > 0.0 ? p.translation_pct / max_t : 0.0;
    p.normalized_rotation = max_r > 0.0 ? p.rotation_deg / max_r : 0.0;
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepResult>& results) {
  out << "seed,alpha,translation_pct,rotation_deg,normalized_translation,normalized_rotation\n";
  for (const auto& r : results) {
    for (const auto& p : r.points) {
      out << r.seed << ',' << format_double(p.alpha) << ',' << format_double(p.translation_pct)
          << ',' << format_double(p.rotation_deg) << ',' << format_double(p.normalized_translation)
          << ',' << format_double(p.normalized_rotation) << '\n';
    }
  }
}

}  // namespace gacl::train
