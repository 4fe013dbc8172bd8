// Small seeded networks for finite-difference gradient checks.
#pragma once

#include <random>

#include "lidlab/nn.hpp"

namespace lidlab::testing {

inline std::vector<double> random_vector(std::size_t n, nn::Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline nn::Matrix random_matrix(std::size_t rows, std::size_t cols, nn::Rng& rng) {
  return nn::Matrix(rows, cols, random_vector(rows * cols, rng));
}

/// Dense(ReLU) -> Dense -> softmax cross-entropy; checks weights, biases and the input.
inline double dense_gradient_error(std::uint64_t seed, double eps = 1e-5) {
  nn::Rng rng(seed);
  nn::Dense hidden(5, 4, nn::Activation::relu, rng);
  nn::Dense out(4, 3, nn::Activation::identity, rng);
  std::vector<double> x = random_vector(5, rng);
  const std::size_t label = rng() % 3;

  const auto loss = [&] { return nn::softmax_cross_entropy(out.forward(hidden.forward(x)), label).loss; };

  hidden.zero_grad();
  out.zero_grad();
  nn::Dense::Tape t1, t2;
  const auto logits = out.forward(hidden.forward(x, t1), t2);
  const auto ce = nn::softmax_cross_entropy(logits, label);
  std::vector<double> dx = hidden.backward(t1, out.backward(t2, ce.grad));

  auto params = hidden.params("hidden");
  for (auto& p : out.params("out")) params.push_back(p);
  params.push_back({"input", x, dx});
  return nn::gradient_check(loss, params, eps);
}

/// Three-step LSTM; the loss reads every hidden state and the last one through a classifier.
inline double lstm_gradient_error(std::uint64_t seed, double eps = 1e-5) {
  constexpr std::size_t D = 4, H = 5, T = 3, L = 3;
  nn::Rng rng(seed);
  nn::LstmCell cell(D, H, rng);
  nn::Dense out(H, L, nn::Activation::identity, rng);
  nn::Matrix x = random_matrix(T, D, rng);
  const nn::Matrix probe = random_matrix(T, H, rng);
  const std::size_t label = rng() % L;

  const auto loss = [&] {
    const nn::Matrix h = cell.forward(x);
    double total = nn::softmax_cross_entropy(out.forward(h.row(T - 1)), label).loss;
    for (std::size_t i = 0; i < h.size(); ++i) total += 0.5 * h.values()[i] * probe.values()[i];
    return total;
  };

  cell.zero_grad();
  out.zero_grad();
  nn::LstmCell::Tape tape;
  nn::Dense::Tape dt;
  const nn::Matrix h = cell.forward(x, tape);
  const auto ce = nn::softmax_cross_entropy(out.forward(h.row(T - 1), dt), label);
  const auto dh_last = out.backward(dt, ce.grad);
  nn::Matrix grad_h(T, H);
  for (std::size_t i = 0; i < grad_h.size(); ++i) grad_h.values()[i] = 0.5 * probe.values()[i];
  for (std::size_t j = 0; j < H; ++j) grad_h(T - 1, j) += dh_last[j];
  nn::Matrix dx = cell.backward(tape, grad_h);

  auto params = cell.params("lstm");
  for (auto& p : out.params("out")) params.push_back(p);
  params.push_back({"input", x.values(), dx.values()});
  return nn::gradient_check(loss, params, eps);
}

/// Conv1d + ReLU + max-over-time pooling -> Dense -> softmax cross-entropy.
inline double conv_gradient_error(std::uint64_t seed, double eps = 1e-5) {
  constexpr std::size_t D = 3, K = 3, F = 4, T = 6, L = 3;
  nn::Rng rng(seed);
  nn::Conv1d conv(D, K, F, rng);
  nn::Dense out(F, L, nn::Activation::identity, rng);
  nn::Matrix x = random_matrix(T, D, rng);
  const std::size_t label = rng() % L;

  const auto loss = [&] { return nn::softmax_cross_entropy(out.forward(conv.forward(x)), label).loss; };

  conv.zero_grad();
  out.zero_grad();
  nn::Conv1d::Tape tape;
  nn::Dense::Tape dt;
  const auto ce = nn::softmax_cross_entropy(out.forward(conv.forward(x, tape), dt), label);
  nn::Matrix dx = conv.backward(tape, out.backward(dt, ce.grad));

  auto params = conv.params("conv");
  for (auto& p : out.params("out")) params.push_back(p);
  params.push_back({"input", x.values(), dx.values()});
  return nn::gradient_check(loss, params, eps);
}

}  // namespace lidlab::testing
