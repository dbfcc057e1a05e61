#pragma once

#include "gacl/loss.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gacl::curriculum {

enum class Mode { Curriculum, AntiCurriculum, Fixed };

std::string to_string(Mode mode);
/// Accepts "curriculum", "anti-curriculum", "fixed".
Mode parse_mode(const std::string& text);

struct Stage {
  loss::LossWeights weights;
  int max_epochs = 200;
  int patience = 5;
  double min_delta = 1e-4;  // relative improvement threshold

  void validate() const;
};

struct Schedule {
  std::vector<Stage> stages;
  Mode mode = Mode::Curriculum;

  void validate() const;
  std::vector<double> alphas() const;
};

/// Plateau settings shared by every stage of a generated schedule.
struct StageLimits {
  int max_epochs = 200;
  int patience = 5;
  double min_delta = 1e-4;
};

inline const std::vector<double> kDefaultCurriculumAlphas{1.0, 0.5, 0.1};

/// One stage per alpha, in the given order; delta, zeta, window from `base`.
Schedule make_curriculum(const loss::LossWeights& base, const StageLimits& limits,
                         const std::vector<double>& alphas = kDefaultCurriculumAlphas);
/// The curriculum stages in reverse order.
Schedule make_anti_curriculum(const loss::LossWeights& base, const StageLimits& limits,
                              const std::vector<double>& alphas = kDefaultCurriculumAlphas);
Schedule make_fixed(const loss::LossWeights& weights, const StageLimits& limits);

struct StageProgress {
  std::size_t stage_index = 0;
  int epochs_in_stage = 0;
  std::optional<double> best_validation_loss;
  int epochs_since_improvement = 0;
  bool complete = false;
};

enum class TransitionReason { None, Plateau, MaxEpochs };
std::string to_string(TransitionReason reason);

struct AdvanceResult {
  StageProgress progress;
  bool transition = false;
  TransitionReason reason = TransitionReason::None;
};

class TrainingComplete : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Records one epoch's validation loss. A relative improvement
/// (best - loss) / max(|best|, eps) above min_delta resets patience; the stage
/// ends when patience is exhausted or max_epochs is reached. Past the last
/// stage, progress.complete is set.
AdvanceResult advance(const StageProgress& progress, double validation_loss,
                      const Schedule& schedule);

/// Throws TrainingComplete once every stage has finished.
const loss::LossWeights& current_weights(const StageProgress& progress, const Schedule& schedule);

}  // namespace gacl::curriculum
