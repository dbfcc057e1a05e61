#include "gacl/model.hpp"

#include <cmath>
#include <sstream>

namespace gacl::model {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

ad::Value dropout(ad::Tape& tape, ad::Value h, double rate, std::mt19937_64* rng) {
  if (rng == nullptr || rate <= 0.0) return h;
  std::bernoulli_distribution keep(1.0 - rate);
  Eigen::MatrixXd mask(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask(i) = keep(*rng) ? 1.0 / (1.0 - rate) : 0.0;
  return tape.mul_elementwise(h, tape.constant(std::move(mask)));
}

}  // namespace

void RegressorConfig::validate() const {
  std::ostringstream err;
  if (input_dim < 1) err << " input_dim must be >= 1;";
  if (lstm_sizes.empty()) err << " lstm_sizes must be non-empty;";
  for (int n : lstm_sizes) {
    if (n < 1) err << " lstm size " << n << " must be >= 1;";
  }
  if (head_layers != 1 && head_layers != 2) err << " head_layers must be 1 or 2;";
  if (head_layers == 2 && head_hidden < 1) err << " head_hidden must be >= 1;";
  if (!(dropout >= 0.0 && dropout < 1.0)) err << " dropout must be in [0, 1);";
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("invalid regressor config:" + msg);
}

void LstmLayerParams::validate() const {
  if (weights.rows() == 0 || weights.rows() % 4 != 0 || weights.cols() <= hidden_size() ||
      bias.size() != weights.rows()) {
    throw ad::ShapeMismatch("lstm layer: weights (" + std::to_string(weights.rows()) + "x" +
                            std::to_string(weights.cols()) + ") and bias (" +
                            std::to_string(bias.size()) + ") are inconsistent");
  }
}

CellValues lstm_cell(ad::Tape& tape, ad::Value x, const CellValues& state, ad::Value weights,
                     ad::Value bias) {
  const Eigen::Index n = state.h.rows();
  if (weights.rows() != 4 * n || weights.cols() != x.rows() + n || bias.rows() != 4 * n ||
      state.c.rows() != n) {
    throw ad::ShapeMismatch("lstm_cell: weights (" + std::to_string(weights.rows()) + "x" +
                            std::to_string(weights.cols()) + ") incompatible with input " +
                            std::to_string(x.rows()) + " and hidden " + std::to_string(n));
  }
  const ad::Value gates = tape.add(tape.matmul(weights, tape.concat_rows(x, state.h)), bias);
  const ad::Value i = tape.sigmoid(tape.slice_rows(gates, 0, n));
  const ad::Value f = tape.sigmoid(tape.slice_rows(gates, n, n));
  const ad::Value o = tape.sigmoid(tape.slice_rows(gates, 2 * n, n));
  const ad::Value g = tape.tanh(tape.slice_rows(gates, 3 * n, n));
  const ad::Value c = tape.add(tape.mul_elementwise(f, state.c), tape.mul_elementwise(i, g));
  const ad::Value h = tape.mul_elementwise(o, tape.tanh(c));
  return {h, c};
}

LstmState lstm_cell(const Eigen::VectorXd& x, const LstmState& state, const LstmLayerParams& params) {
  params.validate();
  const Eigen::Index n = params.hidden_size();
  if (x.size() != params.input_size() || state.h.size() != n || state.c.size() != n) {
    throw ad::ShapeMismatch("lstm_cell", x.size(), state.h.size(), params.input_size(), n);
  }
  Eigen::VectorXd xh(x.size() + n);
  xh << x, state.h;
  const Eigen::VectorXd z = params.weights * xh + params.bias;
  LstmState out;
  out.c.resize(n);
  out.h.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double i = sigmoid(z(k));
    const double f = sigmoid(z(n + k));
    const double o = sigmoid(z(2 * n + k));
    const double g = std::tanh(z(3 * n + k));
    out.c(k) = f * state.c(k) + i * g;
    out.h(k) = o * std::tanh(out.c(k));
  }
  return out;
}

PoseRegressor::PoseRegressor(RegressorConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::string PoseRegressor::lstm_weight_name(std::size_t layer) {
  return "lstm." + std::to_string(layer) + ".weight";
}
std::string PoseRegressor::lstm_bias_name(std::size_t layer) {
  return "lstm." + std::to_string(layer) + ".bias";
}
std::string PoseRegressor::head_weight_name(std::size_t layer) {
  return "head." + std::to_string(layer) + ".weight";
}
std::string PoseRegressor::head_bias_name(std::size_t layer) {
  return "head." + std::to_string(layer) + ".bias";
}

ad::ParamStore PoseRegressor::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in) {
    const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-k, k);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
    }
    return m;
  };

  ad::ParamStore params;
  Eigen::Index prev = config_.input_dim;
  for (std::size_t l = 0; l < config_.lstm_sizes.size(); ++l) {
    const Eigen::Index n = config_.lstm_sizes[l];
    params.add(lstm_weight_name(l), uniform(4 * n, prev + n, prev + n));
    Eigen::MatrixXd bias = Eigen::MatrixXd::Zero(4 * n, 1);
    bias.middleRows(n, n).setConstant(1.0);
    params.add(lstm_bias_name(l), std::move(bias));
    prev = n;
  }
  if (config_.head_layers == 2) {
    params.add(head_weight_name(0), uniform(config_.head_hidden, prev, prev));
    params.add(head_bias_name(0), Eigen::MatrixXd::Zero(config_.head_hidden, 1));
    params.add(head_weight_name(1),
               uniform(RegressorConfig::kOutputDim, config_.head_hidden, config_.head_hidden));
    params.add(head_bias_name(1), Eigen::MatrixXd::Zero(RegressorConfig::kOutputDim, 1));
  } else {
    params.add(head_weight_name(0), uniform(RegressorConfig::kOutputDim, prev, prev));
    params.add(head_bias_name(0), Eigen::MatrixXd::Zero(RegressorConfig::kOutputDim, 1));
  }
  return params;
}

void PoseRegressor::check_params(const ad::ParamStore& params) const {
  auto expect = [&params](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (!params.contains(name)) throw ad::ShapeMismatch("missing parameter '" + name + "'");
    const auto& v = params.at(name).value;
    if (v.rows() != rows || v.cols() != cols) {
      throw ad::ShapeMismatch(name, v.rows(), v.cols(), rows, cols);
    }
  };
  Eigen::Index prev = config_.input_dim;
  for (std::size_t l = 0; l < config_.lstm_sizes.size(); ++l) {
    const Eigen::Index n = config_.lstm_sizes[l];
    expect(lstm_weight_name(l), 4 * n, prev + n);
    expect(lstm_bias_name(l), 4 * n, 1);
    prev = n;
  }
  if (config_.head_layers == 2) {
    expect(head_weight_name(0), config_.head_hidden, prev);
    expect(head_bias_name(0), config_.head_hidden, 1);
    expect(head_weight_name(1), RegressorConfig::kOutputDim, config_.head_hidden);
    expect(head_bias_name(1), RegressorConfig::kOutputDim, 1);
  } else {
    expect(head_weight_name(0), RegressorConfig::kOutputDim, prev);
    expect(head_bias_name(0), RegressorConfig::kOutputDim, 1);
  }
}

HiddenState PoseRegressor::zero_state() const {
  HiddenState s;
  for (int n : config_.lstm_sizes) s.push_back({Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)});
  return s;
}

PoseRegressor::SequenceOutput PoseRegressor::forward_sequence(ad::Tape& tape,
                                                              ad::ParamStore& params,
                                                              const Eigen::MatrixXd& features,
                                                              const HiddenState& initial,
                                                              std::mt19937_64* dropout_rng) const {
  if (features.rows() < 1) throw ad::ShapeMismatch("forward_sequence: empty feature sequence");
  if (features.cols() != config_.input_dim) {
    throw ad::ShapeMismatch("forward_sequence features", features.rows(), features.cols(),
                            features.rows(), config_.input_dim);
  }
  if (initial.size() != config_.lstm_sizes.size()) {
    throw ad::ShapeMismatch("forward_sequence: initial state has " +
                            std::to_string(initial.size()) + " layers, expected " +
                            std::to_string(config_.lstm_sizes.size()));
  }
  check_params(params);

  const std::size_t layers = config_.lstm_sizes.size();
  std::vector<ad::Value> w(layers);
  std::vector<ad::Value> b(layers);
  std::vector<CellValues> state(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    w[l] = tape.parameter(params.at(lstm_weight_name(l)));
    b[l] = tape.parameter(params.at(lstm_bias_name(l)));
    const Eigen::Index n = config_.lstm_sizes[l];
    if (initial[l].h.size() != n || initial[l].c.size() != n) {
      throw ad::ShapeMismatch("initial state layer " + std::to_string(l), initial[l].h.size(),
                              initial[l].c.size(), n, n);
    }
    state[l] = {tape.constant(initial[l].h), tape.constant(initial[l].c)};
  }
  std::vector<ad::Value> hw;
  std::vector<ad::Value> hb;
  for (int k = 0; k < config_.head_layers; ++k) {
    hw.push_back(tape.parameter(params.at(head_weight_name(k))));
    hb.push_back(tape.parameter(params.at(head_bias_name(k))));
  }

  SequenceOutput out;
  out.poses.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    ad::Value x = tape.constant(features.row(t).transpose());
    for (std::size_t l = 0; l < layers; ++l) {
      state[l] = lstm_cell(tape, x, state[l], w[l], b[l]);
      x = dropout(tape, state[l].h, config_.dropout, dropout_rng);
    }
    ad::Value y = tape.add(tape.matmul(hw[0], x), hb[0]);
    if (config_.head_layers == 2) y = tape.add(tape.matmul(hw[1], tape.tanh(y)), hb[1]);
    out.poses.push_back(y);
  }
  for (std::size_t l = 0; l < layers; ++l) {
    out.final_state.push_back({state[l].h.data(), state[l].c.data()});
  }
  return out;
}

Eigen::MatrixXd PoseRegressor::predict(ad::ParamStore& params, const Eigen::MatrixXd& features) const {
  ad::Tape tape;
  const auto out = forward_sequence(tape, params, features, zero_state());
  Eigen::MatrixXd y(features.rows(), RegressorConfig::kOutputDim);
  for (std::size_t t = 0; t < out.poses.size(); ++t) {
    y.row(static_cast<Eigen::Index>(t)) = out.poses[t].data().transpose();
  }
  return y;
}

}  // namespace gacl::model
