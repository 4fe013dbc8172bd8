#include <doctest.h>

#include <cmath>
#include <limits>

#include "lidlab/error.hpp"
#include "lidlab/nn.hpp"
#include "support/gradcheck.hpp"

using namespace lidlab;
using namespace lidlab::nn;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("dense forward matches a hand-written affine map") {
  Matrix w(2, 3, {1.0, 2.0, 0.5, 0.0, 1.0, -1.0});
  Dense relu(w, {0.5, -4.0}, Activation::relu);
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto y = relu.forward(x);
  CHECK(y[0] == doctest::Approx(1.0 + 4.0 + 1.5 + 0.5));
  CHECK(y[1] == 0.0);  // 2 - 3 - 4 < 0
  Dense ident(w, {0.5, -4.0}, Activation::identity);
  CHECK(ident.forward(x)[1] == doctest::Approx(-5.0));
}

TEST_CASE("He-uniform initialization stays inside its bound") {
  Rng rng(1);
  Dense d(50, 20, Activation::relu, rng);
  const double limit = std::sqrt(6.0 / 50.0);
  for (double v : d.weights.values()) CHECK(std::abs(v) <= limit);
  for (double b : d.bias) CHECK(b == 0.0);
}

TEST_CASE("single LSTM step by hand") {
  LstmCell cell = LstmCell::zeros(1, 1);
  // Gate rows in order: input, forget, output, candidate.
  const double wi = 0.5, wf = -0.3, wo = 0.8, wc = 1.2;
  const double bi = 0.1, bf = 1.0, bo = -0.2, bc = 0.05;
  cell.input_weights = Matrix(4, 1, {wi, wf, wo, wc});
  cell.bias = {bi, bf, bo, bc};
  const double x = 0.7;
  const Matrix h = cell.forward(Matrix(1, 1, {x}));
  const double i = sigmoid(wi * x + bi);
  const double o = sigmoid(wo * x + bo);
  const double g = std::tanh(wc * x + bc);
  const double c = i * g;  // the forget gate multiplies a zero initial cell
  CHECK(h(0, 0) == doctest::Approx(o * std::tanh(c)).epsilon(1e-14));
}

TEST_CASE("LSTM initialization: forget bias one, weights within 1/sqrt(H)") {
  Rng rng(5);
  LstmCell cell(3, 8, rng);
  const double limit = 1.0 / std::sqrt(8.0);
  for (std::size_t k = 0; k < 32; ++k) CHECK(cell.bias[k] == (k >= 8 && k < 16 ? 1.0 : 0.0));
  for (double v : cell.input_weights.values()) CHECK(std::abs(v) <= limit);
  for (double v : cell.recurrent_weights.values()) CHECK(std::abs(v) <= limit);
  CHECK_THROWS_AS(cell.forward(Matrix(0, 3)), Error);
}

TEST_CASE("conv feature map and pooling against direct sums") {
  Rng rng(9);
  const Matrix x = testing::random_matrix(7, 2, rng);
  Conv1d conv(2, 3, 4, rng);
  const Matrix map = conv.feature_map(x);
  REQUIRE(map.rows() == 5);
  for (std::size_t p = 0; p < 5; ++p) {
    for (std::size_t f = 0; f < 4; ++f) {
      double acc = conv.bias[f];
      for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t d = 0; d < 2; ++d) acc += conv.weights(f, k * 2 + d) * x(p + k, d);
      }
      CHECK(map(p, f) == doctest::Approx(std::max(acc, 0.0)).epsilon(1e-14));
    }
  }
  const auto pooled = conv.forward(x);
  for (std::size_t f = 0; f < 4; ++f) {
    double best = 0.0;
    for (std::size_t p = 0; p < 5; ++p) best = std::max(best, map(p, f));
    CHECK(pooled[f] == best);
  }
  CHECK_THROWS_AS(conv.feature_map(Matrix(2, 2)), Error);
}

TEST_CASE("pooling ties resolve to the earliest position") {
  Conv1d conv(1, 1, Matrix(1, 1, std::vector<double>{1.0}), {0.0});
  Conv1d::Tape tape;
  conv.forward(Matrix(4, 1, {0.2, 0.9, 0.9, 0.1}), tape);
  CHECK(tape.argmax[0] == 1);
}

TEST_CASE("softmax cross-entropy") {
  const std::vector<double> logits{1000.0, 1001.0, 999.0};
  const auto p = softmax(logits);
  double total = 0.0;
  for (double v : p) total += v;
  CHECK(total == doctest::Approx(1.0));
  const auto ce = softmax_cross_entropy(logits, 1);
  const double denom = std::exp(-1.0) + 1.0 + std::exp(-2.0);
  CHECK(ce.loss == doctest::Approx(std::log(denom)));
  CHECK(ce.grad[1] == doctest::Approx(p[1] - 1.0));
  CHECK(ce.grad[0] == doctest::Approx(p[0]));
}

TEST_CASE("gradient checks pass for dense, LSTM and conv layers") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    CHECK(testing::dense_gradient_error(seed) < 1e-4);
    CHECK(testing::lstm_gradient_error(seed) < 1e-4);
    CHECK(testing::conv_gradient_error(seed) < 1e-4);
  }
}

TEST_CASE("first Adam step moves each coordinate by about the learning rate") {
  std::vector<double> value{1.0, -2.0, 3.0};
  std::vector<double> grad{0.5, -1e-3, 40.0};
  Optimizer opt({.kind = OptimizerKind::adam, .learning_rate = 0.01});
  const std::vector<ParamRef> params{{"p", value, grad}};
  opt.step(params);
  CHECK(value[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(value[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-4));
  CHECK(value[2] == doctest::Approx(3.0 - 0.01).epsilon(1e-6));
  CHECK(opt.steps() == 1);
}

TEST_CASE("SGD step and sparse rows agree with dense updates") {
  std::vector<double> a{1.0, 2.0}, b{1.0, 2.0};
  const std::vector<double> g{0.3, -0.6};
  Optimizer dense({.kind = OptimizerKind::adam});
  Optimizer sparse({.kind = OptimizerKind::adam});
  for (int step = 0; step < 3; ++step) {
    const std::vector<ParamRef> params{{"p", a, std::span<double>(const_cast<double*>(g.data()), 2)}};
    dense.step(params);
    const std::vector<SparseRow> rows{{7, b, g}};
    sparse.step({}, rows);
  }
  CHECK(a == b);

  std::vector<double> v{1.0};
  std::vector<double> gv{2.0};
  Optimizer sgd({.kind = OptimizerKind::sgd, .learning_rate = 0.1});
  sgd.step(std::vector<ParamRef>{{"v", v, gv}});
  CHECK(v[0] == doctest::Approx(0.8));
}

TEST_CASE("non-finite gradients are rejected before any update") {
  std::vector<double> v{1.0, 1.0};
  std::vector<double> g{0.1, std::numeric_limits<double>::quiet_NaN()};
  Optimizer opt;
  try {
    opt.step(std::vector<ParamRef>{{"v", v, g}});
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
  }
  CHECK(v == std::vector<double>{1.0, 1.0});
  CHECK(opt.steps() == 0);
}
