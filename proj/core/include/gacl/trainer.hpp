#pragma once

#include "gacl/config.hpp"
#include "gacl/curriculum.hpp"
#include "gacl/evaluation.hpp"
#include "gacl/model.hpp"
#include "gacl/param_store.hpp"
#include "gacl/synthdata.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gacl::train {

struct DataConfig {
  /// Existing dataset directory; empty means "generate from the preset".
  std::string path;
  std::string preset = "walker";
  int sequences = 5;
  int length = 200;
  /// Held-out test sequence length (generated datasets only).
  int test_length = 1000;
  /// Feature noise; unset uses the preset's value.
  std::optional<double> noise;
  /// Unset uses the master seed.
  std::optional<std::uint64_t> seed;
  double validation_split = 0.2;
};

struct ScheduleConfig {
  curriculum::Mode mode = curriculum::Mode::Curriculum;
  std::vector<double> alphas = curriculum::kDefaultCurriculumAlphas;
  /// Used by the fixed mode only.
  double alpha = 1.0;
  int window = 2;
  /// Unset uses preset_loss_weights(data.preset).
  std::optional<double> delta;
  std::optional<double> zeta;
  curriculum::StageLimits limits{30, 5, 1e-4};
};

struct SamplingConfig {
  int per_sequence = 10;
  int min_length = 10;
  int max_length = 20;
};

struct RunConfig {
  DataConfig data;
  model::RegressorConfig model{0, {32, 32}, 1, 32, 0.0};
  ScheduleConfig schedule;
  SamplingConfig sampling;
  double learning_rate = 1e-3;
  double grad_clip = 5.0;
  std::uint64_t seed = 1;
  std::string output_dir;
  /// Worker threads for ablate/alpha-sweep; 0 means hardware concurrency.
  int threads = 0;
  std::vector<std::uint64_t> ablation_seeds{1, 2};
  std::vector<double> sweep_alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  int sweep_epochs = 30;

  /// Reads every known key; unknown keys and bad values are reported together
  /// in one config::ConfigError. Keys under [manifest] are ignored.
  static RunConfig from_config(const config::KeyValueConfig& cfg);
  /// Fully resolved form; from_config(to_config()) round-trips.
  config::KeyValueConfig to_config() const;

  /// Throws config::ConfigError listing every problem.
  void validate() const;
  /// schedule.alpha and window with delta/zeta resolved against the preset.
  loss::LossWeights loss_weights() const;
  curriculum::Schedule make_schedule() const;
};

/// Translation/rotation weights for a data preset: 1/100 for vehicle, 10/1
/// for walker. Each balances the per-step variance of translation against
/// rotation at that motion scale.
loss::LossWeights preset_loss_weights(const std::string& preset);

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(int epoch, const std::string& what);
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Normalized train/validation/test split shared by every run on one seed.
struct PreparedData {
  std::vector<synth::Sequence> train;
  std::vector<synth::Sequence> validation;
  std::vector<synth::Sequence> test;
  synth::FeatureStats stats;
  int feature_dim = 0;
};

/// The `data.sequences` generated sequences for a seed (what gen-data writes).
std::vector<synth::Sequence> generate_sequences(const DataConfig& data, std::uint64_t seed);

PreparedData prepare_data(const RunConfig& config);

struct EpochRecord {
  int epoch = 0;  // 1-based, monotone across stages
  int stage = 0;  // 1-based
  double alpha = 0.0;
  double train_loss = 0.0;       // per step, current stage objective
  double validation_loss = 0.0;  // per step, current stage objective
  double validation_relative_loss = 0.0;  // per step, alpha = 1 objective
  double validation_translation_pct = 0.0;  // frame-to-frame
  double validation_rotation_deg = 0.0;
  double wall_seconds = 0.0;
  curriculum::TransitionReason transition = curriculum::TransitionReason::None;
};

struct TransitionRecord {
  int epoch = 0;
  int from_stage = 0;
  int to_stage = 0;  // 0 once the schedule is complete
  double alpha = 0.0;
  double validation_loss = 0.0;
  curriculum::TransitionReason reason = curriculum::TransitionReason::None;
};

struct HeldOutMetrics {
  eval::SegmentErrorReport segments;
  eval::RpeReport rpe;
  double ate_rmse = 0.0;
};

struct StageRecord {
  int stage = 0;
  int end_epoch = 0;
  double alpha = 0.0;
  double validation_loss = 0.0;
  double validation_relative_loss = 0.0;
  HeldOutMetrics test;
};

struct RunLog {
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  std::vector<TransitionRecord> transitions;
  std::vector<StageRecord> stages;
  HeldOutMetrics final_metrics;
};

struct TrainResult {
  ad::ParamStore params;
  RunLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs the configured schedule to completion. Writes artifacts when
/// config.output_dir is non-empty.
TrainResult train(const RunConfig& config, const EpochCallback& on_epoch = {});
TrainResult train(const RunConfig& config, const PreparedData& data,
                  const curriculum::Schedule& schedule, const EpochCallback& on_epoch = {});

/// Per-step objective of the model on fixed chunks of `sequences`.
double validation_loss(const model::PoseRegressor& model, ad::ParamStore& params,
                       const std::vector<synth::Sequence>& sequences, int chunk_length,
                       const loss::LossWeights& weights);

/// Predicts every sequence in chunks (state reset per chunk) and scores the
/// accumulated trajectory against ground truth.
HeldOutMetrics evaluate_held_out(const model::PoseRegressor& model, ad::ParamStore& params,
                                 const std::vector<synth::Sequence>& sequences, int chunk_length);

/// Predicted absolute trajectory for one sequence, anchored at identity.
Trajectory predict_trajectory(const model::PoseRegressor& model, ad::ParamStore& params,
                              const synth::Sequence& sequence, int chunk_length);

// runlog.csv columns:
//   epoch,stage,alpha,train_loss,validation_loss,validation_relative_loss,
//   validation_translation_pct,validation_rotation_deg,transition
// Wall time is kept out of it (timing.csv) so reruns compare byte-for-byte.
void write_runlog_csv(std::ostream& out, const RunLog& log);
void write_timing_csv(std::ostream& out, const RunLog& log);
void write_transitions_csv(std::ostream& out, const RunLog& log);
void write_stage_csv(std::ostream& out, const RunLog& log);

/// manifest.txt: the resolved config plus a [manifest] section, so it can be
/// passed back as --config.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const RunConfig& config, const std::vector<std::string>& files);

// ---- ablation -----------------------------------------------------------

struct AblationMode {
  std::string name;
  curriculum::Schedule schedule;
};

/// curriculum, anti-curriculum, fixed-relative (alpha 1) and fixed-bounded
/// (alpha 0.5, w 2). Fixed modes get one stage with the total epoch budget of
/// the staged modes.
std::vector<AblationMode> ablation_modes(const RunConfig& config);

struct AblationCell {
  std::string mode;
  std::uint64_t seed = 0;
  RunLog log;
  /// Relative (alpha 1) validation loss when the first stage ended.
  double first_stage_validation_relative_loss = 0.0;
  /// Validation loss under the fixed-bounded objective after training.
  double final_bounded_validation_loss = 0.0;
};

struct AblationReport {
  std::vector<AblationCell> cells;  // mode-major, then seed, in input order
};

/// Requires at least two seeds. Cells run in parallel with config.threads.
AblationReport ablate(const RunConfig& config, const std::vector<std::uint64_t>& seeds);

// ablation_summary.csv: mode,seed,epochs,first_stage_validation_relative_loss,
//   final_bounded_validation_loss,segment_translation_pct,
//   segment_rotation_deg_per_m,rpe_translation_pct,rpe_rotation_deg,ate_rmse_m
// ablation_stages.csv: mode,seed,stage,end_epoch,alpha,validation_loss,
//   segment_translation_pct,segment_rotation_deg_per_m
// ablation_curves.csv: mode,seed,epoch,validation_translation_pct,
//   validation_rotation_deg
void write_ablation_summary_csv(std::ostream& out, const AblationReport& report);
void write_ablation_stages_csv(std::ostream& out, const AblationReport& report);
void write_ablation_curves_csv(std::ostream& out, const AblationReport& report);

// ---- alpha sweep --------------------------------------------------------

struct SweepPoint {
  double alpha = 0.0;
  double translation_pct = 0.0;  // validation frame-to-frame error
  double rotation_deg = 0.0;
  double normalized_translation = 0.0;  // divided by the sweep maximum
  double normalized_rotation = 0.0;
};

struct SweepResult {
  std::uint64_t seed = 0;
  std::vector<SweepPoint> points;
};

/// One fixed-alpha stage of at most `epochs` epochs per alpha.
SweepResult alpha_sweep(const RunConfig& config, const std::vector<double>& alphas, int epochs);

// alpha_sweep.csv: seed,alpha,translation_pct,rotation_deg,
//   normalized_translation,normalized_rotation
void write_sweep_csv(std::ostream& out, const std::vector<SweepResult>& results);

/// Mixes extra stream identifiers into a seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Runs fn(0..count-1) on up to `threads` workers; rethrows the first error.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace gacl::train
