#include "gacl/loss.hpp"

#include <sstream>
#include <string>

namespace gacl::loss {

void LossWeights::validate() const {
  std::ostringstream err;
  if (!(alpha >= 0.0 && alpha <= 1.0)) err << " alpha=" << alpha << " not in [0,1];";
  if (!(delta >= 0.0)) err << " delta=" << delta << " must be >= 0;";
  if (!(zeta >= 0.0)) err << " zeta=" << zeta << " must be >= 0;";
  if (window < 1) err << " window=" << window << " must be >= 1;";
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("invalid loss weights:" + msg);
}

ad::Value pose_error(ad::Tape& tape, ad::Value estimate, const Vector6& truth, double delta,
                     double zeta) {
  if (estimate.rows() != 6 || estimate.cols() != 1) {
    throw ad::ShapeMismatch("pose_error", estimate.rows(), estimate.cols(), 6, 1);
  }
  const ad::Value diff = tape.sub(estimate, tape.constant(truth));
  const ad::Value t = tape.sum(tape.square(tape.slice_rows(diff, 0, 3)));
  const ad::Value r = tape.sum(tape.square(tape.slice_rows(diff, 3, 3)));
  return tape.add(tape.scale(t, delta), tape.scale(r, zeta));
}

double pose_error(const Vector6& estimate, const Vector6& truth, double delta, double zeta) {
  const Vector6 d = estimate - truth;
  return delta * d.head<3>().squaredNorm() + zeta * d.tail<3>().squaredNorm();
}

Vector6 compose_chain(std::span<const Vector6> relatives) {
  if (relatives.empty()) throw InsufficientHistory("compose_chain: no relatives");
  if (relatives.size() == 1) return relatives.front();
  Pose acc = from_vector6(relatives.front());
  for (std::size_t k = 1; k < relatives.size(); ++k) acc = compose(acc, from_vector6(relatives[k]));
  return to_vector6(acc);
}

ad::Value windowed_compose(ad::Tape& tape, std::span<const ad::Value> history, int window) {
  if (window < 1) throw std::invalid_argument("windowed_compose: window must be >= 1");
  if (history.size() < static_cast<std::size_t>(window)) {
    throw InsufficientHistory("windowed_compose: window " + std::to_string(window) + " needs " +
                              std::to_string(window) + " predictions, have " +
                              std::to_string(history.size()));
  }
  const auto inputs = history.last(static_cast<std::size_t>(window));
  for (const ad::Value& v : inputs) {
    if (v.rows() != 6 || v.cols() != 1) {
      throw ad::ShapeMismatch("windowed_compose", v.rows(), v.cols(), 6, 1);
    }
  }
  if (window == 1) return inputs.front();

  // acc_k = acc_{k-1} ⊕ rel_k; keep each step's Jacobians for the reverse sweep.
  std::vector<Matrix6> left_jac;
  std::vector<Matrix6> right_jac;
  Pose acc = from_vector6(inputs[0].data());
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    auto [out, jac] = compose_with_jacobians(acc, from_vector6(inputs[k].data()));
    left_jac.push_back(jac.d_out_d_left);
    right_jac.push_back(jac.d_out_d_right);
    acc = out;
  }
  const Vector6 composed = to_vector6(acc);

  std::vector<ad::Value> in(inputs.begin(), inputs.end());
  return tape.custom(in, composed,
                     [in, left_jac = std::move(left_jac), right_jac = std::move(right_jac)](
                         ad::Tape& t, const ad::Matrix& grad_out) {
                       Vector6 g = grad_out;
                       for (std::size_t k = in.size() - 1; k >= 1; --k) {
                         t.inject_external_gradient(in[k], right_jac[k - 1].transpose() * g);
                         g = left_jac[k - 1].transpose() * g;
                       }
                       t.inject_external_gradient(in[0], g);
                     });
}

CompositeTerm composite_loss(ad::Tape& tape, ad::Value composed, const Vector6& truth,
                             const WindowState& state, const LossWeights& weights) {
  const ad::Value err = pose_error(tape, composed, truth, weights.delta, weights.zeta);
  CompositeTerm term;
  term.raw = err.scalar();
  term.active = !state.previous_window_loss || term.raw > *state.previous_window_loss;
  term.contribution = term.active ? err : tape.constant(ad::Matrix::Zero(1, 1));
  term.next.previous_window_loss = term.raw;
  return term;
}

namespace {

ad::Value chain_sum(ad::Tape& tape, std::span<const ad::Value> values) {
  ad::Value acc = values.front();
  for (std::size_t k = 1; k < values.size(); ++k) acc = tape.add(acc, values[k]);
  return acc;
}

}  // namespace

ad::Value bounded_total(ad::Tape& tape, std::span<const ad::Value> relative_losses,
                        std::span<const ad::Value> composite_losses, double alpha) {
  std::optional<ad::Value> total;
  if (alpha != 0.0 && !relative_losses.empty()) {
    total = tape.scale(chain_sum(tape, relative_losses), alpha);
  }
  if (alpha != 1.0 && !composite_losses.empty()) {
    const ad::Value com = tape.scale(chain_sum(tape, composite_losses), 1.0 - alpha);
    total = total ? tape.add(*total, com) : com;
  }
  return total ? *total : tape.constant(ad::Matrix::Zero(1, 1));
}

Vector6 window_truth(const Eigen::MatrixXd& gt_relatives, Eigen::Index end, int window) {
  if (end + 1 < window || end >= gt_relatives.rows()) {
    throw InsufficientHistory("window_truth: step " + std::to_string(end) +
                              " has no complete window of " + std::to_string(window));
  }
  std::vector<Vector6> rel;
  rel.reserve(static_cast<std::size_t>(window));
  for (Eigen::Index k = end - window + 1; k <= end; ++k) {
    rel.push_back(gt_relatives.row(k).transpose());
  }
  return compose_chain(rel);
}

SequenceLoss sequence_loss_terms(ad::Tape& tape, std::span<const ad::Value> predictions,
                                 const Eigen::MatrixXd& gt_relatives, const LossWeights& weights) {
  weights.validate();
  const auto steps = static_cast<Eigen::Index>(predictions.size());
  if (steps < 1) throw std::invalid_argument("sequence_loss: empty prediction sequence");
  if (gt_relatives.rows() != steps || gt_relatives.cols() != 6) {
    throw ad::ShapeMismatch("sequence_loss ground truth", gt_relatives.rows(),
                            gt_relatives.cols(), steps, 6);
  }

  SequenceLoss out;
  out.relative.assign(predictions.size(), 0.0);
  out.composite_raw.assign(predictions.size(), 0.0);
  out.composite_contrib.assign(predictions.size(), 0.0);

  std::vector<ad::Value> rel_terms;
  std::vector<ad::Value> com_terms;
  WindowState state;
  const bool with_composite = weights.alpha != 1.0;
  for (Eigen::Index t = 0; t < steps; ++t) {
    const auto k = static_cast<std::size_t>(t);
    const Vector6 truth = gt_relatives.row(t).transpose();
    const ad::Value rel = pose_error(tape, predictions[k], truth, weights.delta, weights.zeta);
    out.relative[k] = rel.scalar();
    rel_terms.push_back(rel);

    if (!with_composite || t + 1 < weights.window) continue;
    const ad::Value composed =
        windowed_compose(tape, predictions.first(k + 1), weights.window);
    const CompositeTerm term =
        composite_loss(tape, composed, window_truth(gt_relatives, t, weights.window), state,
                       weights);
    state = term.next;
    out.composite_raw[k] = term.raw;
    out.composite_contrib[k] = term.active ? term.raw : 0.0;
    com_terms.push_back(term.contribution);
  }
  out.total = bounded_total(tape, rel_terms, com_terms, weights.alpha);
  return out;
}

ad::Value sequence_loss(ad::Tape& tape, std::span<const ad::Value> predictions,
                        const Eigen::MatrixXd& gt_relatives, const LossWeights& weights) {
  return sequence_loss_terms(tape, predictions, gt_relatives, weights).total;
}

}  // namespace gacl::loss
