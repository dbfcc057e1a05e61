#pragma once

#include "gacl/autodiff.hpp"
#include "gacl/param_store.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gacl::model {

struct RegressorConfig {
  static constexpr int kOutputDim = 6;

  int input_dim = 0;
  std::vector<int> lstm_sizes{32, 32};
  /// 1: linear head. 2: linear -> tanh -> linear.
  int head_layers = 1;
  int head_hidden = 32;
  /// Inverted dropout on the h vectors between layers; applied only when a
  /// generator is passed to forward_sequence.
  double dropout = 0.0;

  /// Throws std::invalid_argument listing every problem.
  void validate() const;
};

/// One LSTM layer. Rows of `weights` and `bias` are stacked in gate order
/// (i, f, o, g); columns of `weights` are [input | previous hidden].
struct LstmLayerParams {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  Eigen::Index hidden_size() const { return weights.rows() / 4; }
  Eigen::Index input_size() const { return weights.cols() - hidden_size(); }
  void validate() const;
};

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// Per-layer recurrent state, bottom layer first.
using HiddenState = std::vector<LstmState>;

struct CellValues {
  ad::Value h;
  ad::Value c;
};

/// One LSTM step on the tape: gates = W [x; h] + b, c' = f*c + i*g,
/// h' = o * tanh(c').
CellValues lstm_cell(ad::Tape& tape, ad::Value x, const CellValues& state, ad::Value weights,
                     ad::Value bias);

/// Plain numeric evaluation of the same cell (no tape).
LstmState lstm_cell(const Eigen::VectorXd& x, const LstmState& state, const LstmLayerParams& params);

/// Stacked LSTM layers followed by a fully connected head producing one
/// 6-DoF relative pose (translation, XYZ Euler) per time step.
class PoseRegressor {
 public:
  explicit PoseRegressor(RegressorConfig config);

  const RegressorConfig& config() const { return config_; }

  static std::string lstm_weight_name(std::size_t layer);
  static std::string lstm_bias_name(std::size_t layer);
  static std::string head_weight_name(std::size_t layer);
  static std::string head_bias_name(std::size_t layer);

  /// Uniform(-k, k) weights with k = 1/sqrt(fan_in); zero biases except the
  /// LSTM forget gate, which starts at +1.
  ad::ParamStore init_params(std::uint64_t seed) const;
  /// Throws ad::ShapeMismatch when a parameter is missing or mis-shaped.
  void check_params(const ad::ParamStore& params) const;

  HiddenState zero_state() const;

  struct SequenceOutput {
    std::vector<ad::Value> poses;  // T values, each 6x1
    HiddenState final_state;
  };

  /// Runs T = features.rows() steps, threading the recurrent state.
  SequenceOutput forward_sequence(ad::Tape& tape, ad::ParamStore& params,
                                  const Eigen::MatrixXd& features, const HiddenState& initial,
                                  std::mt19937_64* dropout_rng = nullptr) const;

  /// Numeric T x 6 predictions from a zero initial state.
  Eigen::MatrixXd predict(ad::ParamStore& params, const Eigen::MatrixXd& features) const;

 private:
  RegressorConfig config_;
};

}  // namespace gacl::model
