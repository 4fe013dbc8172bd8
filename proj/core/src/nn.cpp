// SPDX-License-Identifier: Apache-2.0
#include "lidlab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidlab/error.hpp"

namespace lidlab::nn {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void fill_uniform(std::span<double> values, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : values) v = dist(rng);
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    fail(ErrorKind::dimension, "matrix of " + std::to_string(rows) + "x" + std::to_string(cols) + " given " +
                                   std::to_string(data_.size()) + " values");
  }
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::size_t in, std::size_t out, Activation activation, Rng& rng)
    : weights(out, in), bias(out, 0.0), activation(activation), weight_grad(out, in), bias_grad(out, 0.0) {
  fill_uniform(weights.values(), std::sqrt(6.0 / static_cast<double>(in)), rng);
}

Dense::Dense(Matrix w, std::vector<double> b, Activation activation)
    : weights(std::move(w)), bias(std::move(b)), activation(activation) {
  if (bias.size() != weights.rows()) fail(ErrorKind::dimension, "dense bias length must equal output width");
  weight_grad = Matrix(weights.rows(), weights.cols());
  bias_grad.assign(bias.size(), 0.0);
}

std::vector<double> Dense::forward(std::span<const double> x) const {
  Tape tape;
  return forward(x, tape);
}

std::vector<double> Dense::forward(std::span<const double> x, Tape& tape) const {
  if (x.size() != in()) {
    fail(ErrorKind::dimension, "dense layer expects " + std::to_string(in()) + " inputs, got " +
                                   std::to_string(x.size()));
  }
  tape.input.assign(x.begin(), x.end());
  tape.pre_activation.resize(out());
  std::vector<double> y(out());
  for (std::size_t o = 0; o < out(); ++o) {
    const auto w = weights.row(o);
    double acc = bias[o];
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
    tape.pre_activation[o] = acc;
    y[o] = activation == Activation::relu ? std::max(acc, 0.0) : acc;
  }
  return y;
}

std::vector<double> Dense::backward(const Tape& tape, std::span<const double> grad_out) {
  if (grad_out.size() != out()) fail(ErrorKind::dimension, "dense backward: gradient width mismatch");
  std::vector<double> grad_in(in(), 0.0);
  for (std::size_t o = 0; o < out(); ++o) {
    double g = grad_out[o];
    if (activation == Activation::relu && tape.pre_activation[o] <= 0.0) g = 0.0;
    if (g == 0.0) continue;
    bias_grad[o] += g;
    const auto w = weights.row(o);
    auto gw = weight_grad.row(o);
    for (std::size_t i = 0; i < in(); ++i) {
      gw[i] += g * tape.input[i];
      grad_in[i] += g * w[i];
    }
  }
  return grad_in;
}

void Dense::zero_grad() {
  weight_grad.fill(0.0);
  std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
}

std::vector<ParamRef> Dense::params(const std::string& prefix) {
  return {{prefix + ".weight", weights.values(), weight_grad.values()}, {prefix + ".bias", bias, bias_grad}};
}

// ---------------------------------------------------------------------------
// LstmCell

LstmCell::LstmCell(std::size_t input_dim, std::size_t hidden, Rng& rng) : LstmCell(zeros(input_dim, hidden)) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(input_weights.values(), limit, rng);
  fill_uniform(recurrent_weights.values(), limit, rng);
  for (std::size_t h = 0; h < hidden; ++h) bias[forget_gate * hidden + h] = 1.0;
}

LstmCell LstmCell::zeros(std::size_t input_dim, std::size_t hidden) {
  if (input_dim == 0 || hidden == 0) fail(ErrorKind::config, "LSTM dimensions must be positive");
  LstmCell cell;
  cell.input_weights = Matrix(4 * hidden, input_dim);
  cell.recurrent_weights = Matrix(4 * hidden, hidden);
  cell.bias.assign(4 * hidden, 0.0);
  cell.input_weight_grad = Matrix(4 * hidden, input_dim);
  cell.recurrent_weight_grad = Matrix(4 * hidden, hidden);
  cell.bias_grad.assign(4 * hidden, 0.0);
  return cell;
}

Matrix LstmCell::forward(const Matrix& sequence) const {
  Tape tape;
  return forward(sequence, tape);
}

Matrix LstmCell::forward(const Matrix& sequence, Tape& tape) const {
  const std::size_t steps = sequence.rows();
  const std::size_t H = hidden();
  if (steps == 0) fail(ErrorKind::empty_input, "LSTM needs at least one timestep");
  if (sequence.cols() != input_dim()) {
    fail(ErrorKind::dimension, "LSTM expects frames of width " + std::to_string(input_dim()) + ", got " +
                                   std::to_string(sequence.cols()));
  }
  tape.input = sequence;
  tape.gates = Matrix(steps, 4 * H);
  tape.cells = Matrix(steps, H);
  tape.hidden = Matrix(steps, H);

  std::vector<double> pre(4 * H);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto x = sequence.row(t);
    for (std::size_t k = 0; k < 4 * H; ++k) {
      double acc = bias[k];
      const auto w = input_weights.row(k);
      for (std::size_t d = 0; d < x.size(); ++d) acc += w[d] * x[d];
      if (t > 0) {
        const auto u = recurrent_weights.row(k);
        const auto h_prev = tape.hidden.row(t - 1);
        for (std::size_t j = 0; j < H; ++j) acc += u[j] * h_prev[j];
      }
      pre[k] = acc;
    }
    auto gates = tape.gates.row(t);
    for (std::size_t k = 0; k < 3 * H; ++k) gates[k] = sigmoid(pre[k]);
    for (std::size_t k = 3 * H; k < 4 * H; ++k) gates[k] = std::tanh(pre[k]);
    for (std::size_t j = 0; j < H; ++j) {
      const double c_prev = t > 0 ? tape.cells(t - 1, j) : 0.0;
      const double c = gates[forget_gate * H + j] * c_prev + gates[input_gate * H + j] * gates[candidate * H + j];
      tape.cells(t, j) = c;
      tape.hidden(t, j) = gates[output_gate * H + j] * std::tanh(c);
    }
  }
  return tape.hidden;
}

Matrix LstmCell::backward(const Tape& tape, const Matrix& grad_hidden) {
  const std::size_t steps = tape.input.rows();
  const std::size_t H = hidden();
  if (grad_hidden.rows() != steps || grad_hidden.cols() != H) {
    fail(ErrorKind::dimension, "LSTM backward: hidden gradient must be T x H");
  }
  Matrix grad_input(steps, input_dim());
  std::vector<double> dh_next(H, 0.0);
  std::vector<double> dc_next(H, 0.0);
  std::vector<double> dpre(4 * H);

  for (std::size_t t = steps; t-- > 0;) {
    const auto gates = tape.gates.row(t);
    for (std::size_t j = 0; j < H; ++j) {
      const double i = gates[input_gate * H + j];
      const double f = gates[forget_gate * H + j];
      const double o = gates[output_gate * H + j];
      const double g = gates[candidate * H + j];
      const double c = tape.cells(t, j);
      const double c_prev = t > 0 ? tape.cells(t - 1, j) : 0.0;
      const double tanh_c = std::tanh(c);

      const double dh = grad_hidden(t, j) + dh_next[j];
      const double dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next[j];
      dpre[input_gate * H + j] = dc * g * i * (1.0 - i);
      dpre[forget_gate * H + j] = dc * c_prev * f * (1.0 - f);
      dpre[output_gate * H + j] = dh * tanh_c * o * (1.0 - o);
      dpre[candidate * H + j] = dc * i * (1.0 - g * g);
      dc_next[j] = dc * f;
    }

    const auto x = tape.input.row(t);
    auto dx = grad_input.row(t);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t k = 0; k < 4 * H; ++k) {
      const double d = dpre[k];
      if (d == 0.0) continue;
      bias_grad[k] += d;
      const auto w = input_weights.row(k);
      auto gw = input_weight_grad.row(k);
      for (std::size_t n = 0; n < x.size(); ++n) {
        gw[n] += d * x[n];
        dx[n] += d * w[n];
      }
      if (t > 0) {
        const auto u = recurrent_weights.row(k);
        auto gu = recurrent_weight_grad.row(k);
        const auto h_prev = tape.hidden.row(t - 1);
        for (std::size_t j = 0; j < H; ++j) {
          gu[j] += d * h_prev[j];
          dh_next[j] += d * u[j];
        }
      }
    }
  }
  return grad_input;
}

void LstmCell::zero_grad() {
  input_weight_grad.fill(0.0);
  recurrent_weight_grad.fill(0.0);
  std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
}

std::vector<ParamRef> LstmCell::params(const std::string& prefix) {
  static constexpr const char* kGateNames[] = {"i", "f", "o", "c"};
  const std::size_t H = hidden();
  const std::size_t D = input_dim();
  std::vector<ParamRef> out;
  for (std::size_t g = 0; g < 4; ++g) {
    out.push_back({prefix + ".W_" + kGateNames[g], input_weights.values().subspan(g * H * D, H * D),
                   input_weight_grad.values().subspan(g * H * D, H * D)});
  }
  for (std::size_t g = 0; g < 4; ++g) {
    out.push_back({prefix + ".U_" + kGateNames[g], recurrent_weights.values().subspan(g * H * H, H * H),
                   recurrent_weight_grad.values().subspan(g * H * H, H * H)});
  }
  for (std::size_t g = 0; g < 4; ++g) {
    out.push_back({prefix + ".b_" + kGateNames[g], std::span<double>(bias).subspan(g * H, H),
                   std::span<double>(bias_grad).subspan(g * H, H)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(std::size_t frame_dim, std::size_t kernel, std::size_t filters, Rng& rng)
    : Conv1d(frame_dim, kernel, Matrix(filters, kernel * frame_dim), std::vector<double>(filters, 0.0)) {
  fill_uniform(weights.values(), std::sqrt(6.0 / static_cast<double>(kernel * frame_dim)), rng);
}

Conv1d::Conv1d(std::size_t frame_dim, std::size_t kernel, Matrix filters, std::vector<double> b)
    : weights(std::move(filters)), bias(std::move(b)), frame_dim_(frame_dim), kernel_(kernel) {
  if (kernel_ < 1 || frame_dim_ < 1) fail(ErrorKind::config, "conv kernel height and frame width must be >= 1");
  if (weights.cols() != kernel_ * frame_dim_ || bias.size() != weights.rows()) {
    fail(ErrorKind::dimension, "conv filters must be F x (h * D) with F biases");
  }
  weight_grad = Matrix(weights.rows(), weights.cols());
  bias_grad.assign(bias.size(), 0.0);
}

double Conv1d::response(const Matrix& sequence, std::size_t filter, std::size_t position) const {
  const auto w = weights.row(filter);
  const double* x = sequence.values().data() + position * frame_dim_;
  double acc = bias[filter];
  for (std::size_t k = 0; k < kernel_ * frame_dim_; ++k) acc += w[k] * x[k];
  return acc;
}

Matrix Conv1d::feature_map(const Matrix& sequence) const {
  if (sequence.cols() != frame_dim_) {
    fail(ErrorKind::dimension, "conv expects frames of width " + std::to_string(frame_dim_) + ", got " +
                                   std::to_string(sequence.cols()));
  }
  if (sequence.rows() < kernel_) {
    fail(ErrorKind::dimension, "sequence of length " + std::to_string(sequence.rows()) +
                                   " is shorter than the kernel height " + std::to_string(kernel_));
  }
  const std::size_t positions = sequence.rows() - kernel_ + 1;
  Matrix map(positions, filters());
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t f = 0; f < filters(); ++f) map(p, f) = std::max(response(sequence, f, p), 0.0);
  }
  return map;
}

std::vector<double> Conv1d::forward(const Matrix& sequence) const {
  Tape tape;
  return forward(sequence, tape);
}

std::vector<double> Conv1d::forward(const Matrix& sequence, Tape& tape) const {
  const Matrix map = feature_map(sequence);
  tape.input = sequence;
  tape.argmax.assign(filters(), 0);
  tape.pooled.assign(filters(), 0.0);
  for (std::size_t f = 0; f < filters(); ++f) {
    double best = map(0, f);
    std::size_t best_pos = 0;
    for (std::size_t p = 1; p < map.rows(); ++p) {
      if (map(p, f) > best) {
        best = map(p, f);
        best_pos = p;
      }
    }
    tape.pooled[f] = best;
    tape.argmax[f] = best_pos;
  }
  return tape.pooled;
}

Matrix Conv1d::backward(const Tape& tape, std::span<const double> grad_pooled) {
  if (grad_pooled.size() != filters()) fail(ErrorKind::dimension, "conv backward: gradient width mismatch");
  Matrix grad_input(tape.input.rows(), tape.input.cols());
  const std::size_t span_len = kernel_ * frame_dim_;
  for (std::size_t f = 0; f < filters(); ++f) {
    // ReLU subgradient at 0 is 0, so a non-positive maximum passes nothing back.
    if (tape.pooled[f] <= 0.0 || grad_pooled[f] == 0.0) continue;
    const double g = grad_pooled[f];
    const std::size_t offset = tape.argmax[f] * frame_dim_;
    const double* x = tape.input.values().data() + offset;
    double* dx = grad_input.values().data() + offset;
    const auto w = weights.row(f);
    auto gw = weight_grad.row(f);
    bias_grad[f] += g;
    for (std::size_t k = 0; k < span_len; ++k) {
      gw[k] += g * x[k];
      dx[k] += g * w[k];
    }
  }
  return grad_input;
}

void Conv1d::zero_grad() {
  weight_grad.fill(0.0);
  std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
}

std::vector<ParamRef> Conv1d::params(const std::string& prefix) {
  return {{prefix + ".filters", weights.values(), weight_grad.values()}, {prefix + ".bias", bias, bias_grad}};
}

// ---------------------------------------------------------------------------
// Losses

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

LossAndGrad softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    fail(ErrorKind::dimension, "label " + std::to_string(label) + " outside " + std::to_string(logits.size()) +
                                   " logits");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - peak);
  const double log_sum = peak + std::log(total);

  LossAndGrad out;
  out.loss = log_sum - logits[label];
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out.grad[i] = std::exp(logits[i] - log_sum);
  out.grad[label] -= 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer

void Optimizer::update(std::span<double> value, std::span<const double> grad, std::vector<double>& m,
                       std::vector<double>& v) const {
  if (config_.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= config_.learning_rate * grad[i];
    return;
  }
  if (m.size() != value.size()) {
    m.assign(value.size(), 0.0);
    v.assign(value.size(), 0.0);
  }
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < value.size(); ++i) {
    m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
    v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

void Optimizer::step(std::span<const ParamRef> dense, std::span<const SparseRow> sparse) {
  const auto finite = [](std::span<const double> g) {
    return std::all_of(g.begin(), g.end(), [](double x) { return std::isfinite(x); });
  };
  for (const auto& p : dense) {
    if (p.value.size() != p.grad.size()) fail(ErrorKind::dimension, "parameter " + p.name + " shape mismatch");
    if (!finite(p.grad)) fail(ErrorKind::numeric, "non-finite gradient in " + p.name);
  }
  for (const auto& row : sparse) {
    if (row.value.size() != row.grad.size()) fail(ErrorKind::dimension, "sparse row shape mismatch");
    if (!finite(row.grad)) fail(ErrorKind::numeric, "non-finite gradient in table row " + std::to_string(row.key));
  }

  ++step_;
  if (dense_m_.size() < dense.size()) {
    dense_m_.resize(dense.size());
    dense_v_.resize(dense.size());
  }
  for (std::size_t i = 0; i < dense.size(); ++i) update(dense[i].value, dense[i].grad, dense_m_[i], dense_v_[i]);
  for (const auto& row : sparse) update(row.value, row.grad, sparse_m_[row.key], sparse_v_[row.key]);
}

// ---------------------------------------------------------------------------
// Gradient checking

double gradient_check(const std::function<double()>& loss, std::span<const ParamRef> params, double eps) {
  if (!(eps > 0.0)) fail(ErrorKind::config, "gradient_check step must be positive");
  double worst = 0.0;
  for (const auto& p : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double up = loss();
      p.value[i] = saved - eps;
      const double down = loss();
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p.grad[i];
      const double rel = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace lidlab::nn
