#pragma once

#include "gacl/autodiff.hpp"
#include "gacl/geometry.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace gacl::loss {

/// Weights of the bounded pose regression loss.
struct LossWeights {
  double alpha = 1.0;   // relative vs. composite balance, in [0, 1]
  double delta = 1.0;   // translation weight
  double zeta = 100.0;  // rotation weight
  int window = 2;       // composition window w >= 1

  void validate() const;
};

/// Raw (ungated) window loss from the previous step, absent until one exists.
struct WindowState {
  std::optional<double> previous_window_loss;
};

class InsufficientHistory : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// delta * |t_est - t|^2 + zeta * |r_est - r|^2 for 6-vectors (t, r).
ad::Value pose_error(ad::Tape& tape, ad::Value estimate, const Vector6& truth, double delta,
                     double zeta);
double pose_error(const Vector6& estimate, const Vector6& truth, double delta, double zeta);

/// Chronological composition rel[0] ⊕ rel[1] ⊕ ... in 6-DoF coordinates.
Vector6 compose_chain(std::span<const Vector6> relatives);

/// Composes the last `window` entries of `history` (chronological order) into
/// the window-relative pose. Gradients reach every input through the chained
/// compose Jacobians. Throws InsufficientHistory if history.size() < window.
ad::Value windowed_compose(ad::Tape& tape, std::span<const ad::Value> history, int window);

struct CompositeTerm {
  ad::Value contribution;  // 1x1; the exact constant 0 when gated off
  WindowState next;        // carries the raw window loss regardless of gating
  double raw = 0.0;
  bool active = false;
};

/// Gated composite term: contributes the window loss only when it exceeds the
/// previous step's raw window loss (strictly), or when there is none.
CompositeTerm composite_loss(ad::Tape& tape, ad::Value composed, const Vector6& truth,
                             const WindowState& state, const LossWeights& weights);

/// alpha * sum(relative) + (1 - alpha) * sum(composite). A term whose
/// coefficient is exactly zero is omitted.
ad::Value bounded_total(ad::Tape& tape, std::span<const ad::Value> relative_losses,
                        std::span<const ad::Value> composite_losses, double alpha);

/// Ground-truth window relative ending at step `end` (0-based), i.e. the
/// composition of gt rows end-window+1 .. end.
Vector6 window_truth(const Eigen::MatrixXd& gt_relatives, Eigen::Index end, int window);

struct SequenceLoss {
  ad::Value total;
  std::vector<double> relative;            // per step
  std::vector<double> composite_raw;       // per step; 0 before the first full window
  std::vector<double> composite_contrib;   // per step; 0 where gated or no full window
};

/// Full objective over T predicted relatives (each 6x1) against gt (T x 6).
SequenceLoss sequence_loss_terms(ad::Tape& tape, std::span<const ad::Value> predictions,
                                 const Eigen::MatrixXd& gt_relatives, const LossWeights& weights);
ad::Value sequence_loss(ad::Tape& tape, std::span<const ad::Value> predictions,
                        const Eigen::MatrixXd& gt_relatives, const LossWeights& weights);

}  // namespace gacl::loss
