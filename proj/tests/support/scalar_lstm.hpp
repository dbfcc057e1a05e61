#pragma once

// Scalar-loop LSTM cell reference: plain arrays, std::exp and std::tanh.
//   i = s(W_i [x;h] + b_i)  f = s(W_f [x;h] + b_f)  o = s(W_o [x;h] + b_o)
//   g = tanh(W_g [x;h] + b_g)  c' = f c + i g  h' = o tanh(c')
// Row blocks of the weight matrix are ordered (i, f, o, g).

#include <cmath>
#include <cstddef>
#include <vector>

namespace ref {

struct Cell {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::vector<std::vector<double>> w;  // 4*hidden rows x (input + hidden) cols
  std::vector<double> b;               // 4*hidden
};

struct State {
  std::vector<double> h;
  std::vector<double> c;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline State step(const Cell& cell, const std::vector<double>& x, const State& s) {
  const std::size_t n = cell.hidden;
  std::vector<double> xh(x);
  xh.insert(xh.end(), s.h.begin(), s.h.end());
  std::vector<double> pre(4 * n);
  for (std::size_t r = 0; r < 4 * n; ++r) {
    double acc = cell.b[r];
    for (std::size_t k = 0; k < xh.size(); ++k) acc += cell.w[r][k] * xh[k];
    pre[r] = acc;
  }
  State out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const double i = sigmoid(pre[j]);
    const double f = sigmoid(pre[n + j]);
    const double o = sigmoid(pre[2 * n + j]);
    const double g = std::tanh(pre[3 * n + j]);
    out.c[j] = f * s.c[j] + i * g;
    out.h[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

}  // namespace ref
