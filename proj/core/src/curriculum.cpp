#include "gacl/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gacl::curriculum {

namespace {

constexpr double kEps = 1e-12;

Stage make_stage(const loss::LossWeights& base, double alpha, const StageLimits& limits) {
  Stage s;
  s.weights = base;
  s.weights.alpha = alpha;
  s.max_epochs = limits.max_epochs;
  s.patience = limits.patience;
  s.min_delta = limits.min_delta;
  return s;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Curriculum:
      return "curriculum";
    case Mode::AntiCurriculum:
      return "anti-curriculum";
    case Mode::Fixed:
      return "fixed";
  }
  return "unknown";
}

Mode parse_mode(const std::string& text) {
  if (text == "curriculum") return Mode::Curriculum;
  if (text == "anti-curriculum" || text == "anti") return Mode::AntiCurriculum;
  if (text == "fixed") return Mode::Fixed;
  throw std::invalid_argument("unknown schedule mode '" + text + "'");
}

std::string to_string(TransitionReason reason) {
  switch (reason) {
    case TransitionReason::None:
      return "none";
    case TransitionReason::Plateau:
      return "plateau";
    case TransitionReason::MaxEpochs:
      return "max-epochs";
  }
  return "unknown";
}

void Stage::validate() const {
  weights.validate();
  std::ostringstream err;
  if (max_epochs < 1) err << " max_epochs must be >= 1;";
  if (patience < 1) err << " patience must be >= 1;";
  if (!(min_delta >= 0.0)) err << " min_delta must be >= 0;";
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("invalid stage:" + msg);
}

void Schedule::validate() const {
  if (stages.empty()) throw std::invalid_argument("schedule has no stages");
  if (mode == Mode::Fixed && stages.size() != 1) {
    throw std::invalid_argument("fixed schedule must have exactly one stage");
  }
  for (const Stage& s : stages) s.validate();
}

std::vector<double> Schedule::alphas() const {
  std::vector<double> out;
  for (const Stage& s : stages) out.push_back(s.weights.alpha);
  return out;
}

Schedule make_curriculum(const loss::LossWeights& base, const StageLimits& limits,
                         const std::vector<double>& alphas) {
  Schedule s;
  s.mode = Mode::Curriculum;
  for (double a : alphas) s.stages.push_back(make_stage(base, a, limits));
  s.validate();
  return s;
}

Schedule make_anti_curriculum(const loss::LossWeights& base, const StageLimits& limits,
                              const std::vector<double>& alphas) {
  Schedule s = make_curriculum(base, limits, alphas);
  std::reverse(s.stages.begin(), s.stages.end());
  s.mode = Mode::AntiCurriculum;
  return s;
}

Schedule make_fixed(const loss::LossWeights& weights, const StageLimits& limits) {
  Schedule s;
  s.mode = Mode::Fixed;
  s.stages.push_back(make_stage(weights, weights.alpha, limits));
  s.validate();
  return s;
}

AdvanceResult advance(const StageProgress& progress, double validation_loss,
                      const Schedule& schedule) {
  if (progress.complete || progress.stage_index >= schedule.stages.size()) {
    throw TrainingComplete("advance called after the final stage");
  }
  if (!std::isfinite(validation_loss)) {
    throw std::invalid_argument("advance: validation loss is not finite");
  }
  const Stage& stage = schedule.stages[progress.stage_index];

  AdvanceResult r;
  r.progress = progress;
  StageProgress& p = r.progress;
  ++p.epochs_in_stage;
  if (!p.best_validation_loss) {
    p.best_validation_loss = validation_loss;
    p.epochs_since_improvement = 0;
  } else {
    const double best = *p.best_validation_loss;
    const double improvement = (best - validation_loss) / std::max(std::abs(best), kEps);
    if (improvement > stage.min_delta) {
      p.best_validation_loss = validation_loss;
      p.epochs_since_improvement = 0;
    } else {
      ++p.epochs_since_improvement;
    }
  }

  if (p.epochs_since_improvement >= stage.patience) {
    r.reason = TransitionReason::Plateau;
  } else if (p.epochs_in_stage >= stage.max_epochs) {
    r.reason = TransitionReason::MaxEpochs;
  }
  if (r.reason != TransitionReason::None) {
    r.transition = true;
    ++p.stage_index;
    p.epochs_in_stage = 0;
    p.best_validation_loss.reset();
    p.epochs_since_improvement = 0;
    p.complete = p.stage_index >= schedule.stages.size();
  }
  return r;
}

const loss::LossWeights& current_weights(const StageProgress& progress, const Schedule& schedule) {
  if (progress.complete || progress.stage_index >= schedule.stages.size()) {
    throw TrainingComplete("training schedule is complete");
  }
  return schedule.stages[progress.stage_index].weights;
}

}  // namespace gacl::curriculum
