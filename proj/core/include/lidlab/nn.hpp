// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lidlab::nn {

using Rng = std::mt19937_64;

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double value);
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A trainable block and its gradient accumulator.
struct ParamRef {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
};

enum class Activation { relu, identity };

class Dense {
 public:
  struct Tape {
    std::vector<double> input;
    std::vector<double> pre_activation;
  };

  Dense() = default;
  /// He-uniform init: U(-sqrt(6/in), sqrt(6/in)) weights, zero bias.
  Dense(std::size_t in, std::size_t out, Activation activation, Rng& rng);
  Dense(Matrix weights, std::vector<double> bias, Activation activation);

  std::size_t in() const noexcept { return weights.cols(); }
  std::size_t out() const noexcept { return weights.rows(); }

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, Tape& tape) const;
  /// Accumulates dL/dW and dL/db; returns dL/dx.
  std::vector<double> backward(const Tape& tape, std::span<const double> grad_out);

  void zero_grad();
  std::vector<ParamRef> params(const std::string& prefix);

  Matrix weights;
  std::vector<double> bias;
  Activation activation = Activation::identity;
  Matrix weight_grad;
  std::vector<double> bias_grad;
};

/// Gates are stacked in the order input, forget, output, candidate; each
/// occupies H consecutive rows of the stacked weights.
class LstmCell {
 public:
  enum Gate : std::size_t { input_gate = 0, forget_gate = 1, output_gate = 2, candidate = 3 };

  struct Tape {
    Matrix input;   // T x D
    Matrix gates;   // T x 4H, post-activation
    Matrix cells;   // T x H
    Matrix hidden;  // T x H
  };

  LstmCell() = default;
  /// U(-1/sqrt(H), 1/sqrt(H)) weights, zero biases except forget = 1.
  LstmCell(std::size_t input_dim, std::size_t hidden, Rng& rng);
  /// All parameters zero (forget bias included).
  static LstmCell zeros(std::size_t input_dim, std::size_t hidden);

  std::size_t input_dim() const noexcept { return input_weights.cols(); }
  std::size_t hidden() const noexcept { return recurrent_weights.cols(); }

  /// Hidden states for every step, T x H. Throws empty_input when T = 0.
  Matrix forward(const Matrix& sequence) const;
  Matrix forward(const Matrix& sequence, Tape& tape) const;
  /// Backpropagation through time from dL/dh_t (T x H); returns dL/dx (T x D).
  Matrix backward(const Tape& tape, const Matrix& grad_hidden);

  void zero_grad();
  /// Twelve blocks: W_g, U_g, b_g for g in {i, f, o, c}.
  std::vector<ParamRef> params(const std::string& prefix);

  Matrix input_weights;      // 4H x D
  Matrix recurrent_weights;  // 4H x H
  std::vector<double> bias;  // 4H
  Matrix input_weight_grad;
  Matrix recurrent_weight_grad;
  std::vector<double> bias_grad;
};

/// Valid 1-D correlation over a T x D sequence with F filters of height h,
/// ReLU, then global max pooling over positions (ties to the lowest).
class Conv1d {
 public:
  struct Tape {
    Matrix input;
    std::vector<std::size_t> argmax;  // per filter
    std::vector<double> pooled;       // post-ReLU maxima
  };

  Conv1d() = default;
  /// He-uniform init over fan-in h * D, zero bias.
  Conv1d(std::size_t frame_dim, std::size_t kernel, std::size_t filters, Rng& rng);
  Conv1d(std::size_t frame_dim, std::size_t kernel, Matrix filters, std::vector<double> bias);

  std::size_t frame_dim() const noexcept { return frame_dim_; }
  std::size_t kernel() const noexcept { return kernel_; }
  std::size_t filters() const noexcept { return weights.rows(); }

  /// (T - h + 1) x F map after ReLU. Throws dimension error when T < h.
  Matrix feature_map(const Matrix& sequence) const;
  std::vector<double> forward(const Matrix& sequence) const;
  std::vector<double> forward(const Matrix& sequence, Tape& tape) const;
  Matrix backward(const Tape& tape, std::span<const double> grad_pooled);

  void zero_grad();
  std::vector<ParamRef> params(const std::string& prefix);

  Matrix weights;  // F x (h * D); row f is filter f flattened frame by frame
  std::vector<double> bias;
  Matrix weight_grad;
  std::vector<double> bias_grad;

 private:
  double response(const Matrix& sequence, std::size_t filter, std::size_t position) const;

  std::size_t frame_dim_ = 0;
  std::size_t kernel_ = 0;
};

std::vector<double> softmax(std::span<const double> logits);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// -log softmax(logits)[label] via log-sum-exp; grad = softmax - one_hot.
LossAndGrad softmax_cross_entropy(std::span<const double> logits, std::size_t label);

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// A row of a sparsely updated table (embedding rows touched by a batch).
struct SparseRow {
  std::size_t key;
  std::span<double> value;
  std::span<const double> grad;
};

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

  /// One update of every dense block (moments keyed by position in `dense`)
  /// and every sparse row (moments keyed by row key, bias correction from the
  /// shared step counter). All gradients are checked first; a non-finite one
  /// throws numeric error before anything is modified.
  void step(std::span<const ParamRef> dense, std::span<const SparseRow> sparse = {});

  std::size_t steps() const noexcept { return step_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  void update(std::span<double> value, std::span<const double> grad, std::vector<double>& m,
              std::vector<double>& v) const;

  OptimizerConfig config_;
  std::size_t step_ = 0;
  std::vector<std::vector<double>> dense_m_, dense_v_;
  std::unordered_map<std::size_t, std::vector<double>> sparse_m_, sparse_v_;
};

/// Central finite differences over every entry of `params`, compared with the
/// analytic gradients already stored in them. Returns the max relative error
/// |g_a - g_n| / max(1e-8, |g_a| + |g_n|). Values are restored afterwards.
double gradient_check(const std::function<double()>& loss, std::span<const ParamRef> params, double eps = 1e-5);

}  // namespace lidlab::nn
