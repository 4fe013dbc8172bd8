// SPDX-License-Identifier: Apache-2.0
#include "lidlab/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "lidlab/error.hpp"

namespace lidlab::tsne {

namespace {

constexpr double kFloor = 1e-12;
constexpr std::size_t kMaxSearchSteps = 64;
constexpr double kSearchTolerance = 1e-7;

struct Entropy {
  double perplexity;
  std::vector<double> p;
};

// Conditional distribution for precision beta over shifted distances.
Entropy conditional(std::span<const double> shifted, double beta) {
  Entropy out{0.0, std::vector<double>(shifted.size())};
  double total = 0.0;
  for (std::size_t j = 0; j < shifted.size(); ++j) {
    out.p[j] = std::exp(-beta * shifted[j]);
    total += out.p[j];
  }
  double h = 0.0;  // nats
  for (std::size_t j = 0; j < shifted.size(); ++j) {
    out.p[j] /= total;
    if (out.p[j] > 0.0) h -= out.p[j] * std::log(out.p[j]);
  }
  out.perplexity = std::exp(h);
  return out;
}

nn::Matrix squared_distances(const nn::Matrix& x) {
  const std::size_t n = x.rows();
  nn::Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto xj = x.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) {
        const double diff = xi[k] - xj[k];
        acc += diff * diff;
      }
      d(i, j) = acc;
      d(j, i) = acc;
    }
  }
  return d;
}

}  // namespace

double perplexity_bound(std::size_t points) { return (static_cast<double>(points) - 1.0) / 3.0; }

SigmaSearch binary_search_sigma(std::span<const double> squared_distances, double target) {
  if (squared_distances.empty()) fail(ErrorKind::config, "perplexity calibration needs at least two points");
  if (!(target >= 1.0)) fail(ErrorKind::config, "target perplexity must be at least 1");

  SigmaSearch result;
  const auto [lo_it, hi_it] = std::minmax_element(squared_distances.begin(), squared_distances.end());
  const double d_min = *lo_it;
  std::vector<double> shifted(squared_distances.size());
  double spread = 0.0;
  for (std::size_t j = 0; j < shifted.size(); ++j) {
    shifted[j] = squared_distances[j] - d_min;
    spread += shifted[j];
  }
  spread /= static_cast<double>(shifted.size());
  const auto neighbours = static_cast<double>(shifted.size());
  result.unreachable = target > neighbours + kPerplexityTolerance;

  double beta = spread > 0.0 ? 1.0 / spread : 1.0;
  if (*hi_it == d_min) {
    // Every bandwidth yields the uniform distribution over the neighbours.
    result.degenerate = true;
    result.conditional.assign(shifted.size(), 1.0 / neighbours);
    result.perplexity = neighbours;
    result.sigma = std::sqrt(1.0 / (2.0 * beta));
    result.converged = std::abs(neighbours - target) <= kPerplexityTolerance;
    return result;
  }

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  Entropy e = conditional(shifted, beta);
  for (std::size_t step = 0; step < kMaxSearchSteps; ++step) {
    if (std::abs(e.perplexity - target) <= kSearchTolerance) break;
    if (e.perplexity > target) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (lo + beta);
    }
    e = conditional(shifted, beta);
  }
  result.converged = std::abs(e.perplexity - target) <= kPerplexityTolerance;
  result.perplexity = e.perplexity;
  result.sigma = std::sqrt(1.0 / (2.0 * beta));
  result.conditional = std::move(e.p);
  return result;
}

nn::Matrix pairwise_affinities(const nn::Matrix& x, double perplexity) {
  const std::size_t n = x.rows();
  if (n < 4) fail(ErrorKind::config, "t-SNE needs at least 4 points, got " + std::to_string(n));
  if (!(perplexity < perplexity_bound(n))) {
    fail(ErrorKind::config, "perplexity " + std::to_string(perplexity) + " must be below (N - 1) / 3 = " +
                                std::to_string(perplexity_bound(n)) + " for N = " + std::to_string(n));
  }
  const nn::Matrix d = squared_distances(x);
  nn::Matrix cond(n, n);
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) row[k++] = d(i, j);
    }
    const SigmaSearch s = binary_search_sigma(row, perplexity);
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) cond(i, j) = s.conditional[k++];
    }
  }

  nn::Matrix p(n, n);
  double total = 0.0;
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      p(i, j) = std::max((cond(i, j) + cond(j, i)) * scale, kFloor);
      total += p(i, j);
    }
  }
  for (auto& v : p.values()) v /= total;
  return p;
}

nn::Matrix student_affinities(const nn::Matrix& y) {
  const std::size_t n = y.rows();
  nn::Matrix q = squared_distances(y);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      q(i, j) = i == j ? 0.0 : 1.0 / (1.0 + q(i, j));
      total += q(i, j);
    }
  }
  for (auto& v : q.values()) v /= total;
  return q;
}

double kl_divergence(const nn::Matrix& p, const nn::Matrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) fail(ErrorKind::dimension, "KL: matrix shapes differ");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if (i == j) continue;
      const double pv = std::max(p(i, j), kFloor);
      const double qv = std::max(q(i, j), kFloor);
      kl += pv * std::log(pv / qv);
    }
  }
  return kl;
}

TsneResult run_tsne(const nn::Matrix& x, const TsneConfig& config) {
  if (config.output_dim != 2 && config.output_dim != 3) fail(ErrorKind::config, "output dimension must be 2 or 3");
  if (config.iterations < 1) fail(ErrorKind::config, "t-SNE needs at least one iteration");
  if (config.kl_every < 1) fail(ErrorKind::config, "KL recording interval must be positive");

  const nn::Matrix p = pairwise_affinities(x, config.perplexity);
  const std::size_t n = x.rows();
  const std::size_t dims = config.output_dim;

  nn::Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1e-4);
  nn::Matrix y(n, dims);
  for (auto& v : y.values()) v = normal(rng);

  nn::Matrix update(n, dims);
  nn::Matrix gains(n, dims, 1.0);
  nn::Matrix grad(n, dims);
  nn::Matrix num(n, n);

  TsneResult result;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const bool exaggerating = it <= config.exaggeration_iterations;
    const double exaggeration = exaggerating ? config.early_exaggeration : 1.0;
    const double momentum = it <= config.momentum_switch ? config.initial_momentum : config.final_momentum;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < dims; ++k) {
          const double diff = y(i, k) - y(j, k);
          d2 += diff * diff;
        }
        const double v = 1.0 / (1.0 + d2);
        num(i, j) = v;
        num(j, i) = v;
        total += 2.0 * v;
      }
    }

    grad.fill(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = num(i, j) / total;
        const double coeff = 4.0 * (exaggeration * p(i, j) - q) * num(i, j);
        for (std::size_t k = 0; k < dims; ++k) grad(i, k) += coeff * (y(i, k) - y(j, k));
      }
    }

    for (std::size_t idx = 0; idx < y.size(); ++idx) {
      const double g = grad.values()[idx];
      double& gain = gains.values()[idx];
      double& u = update.values()[idx];
      gain = (g > 0.0) != (u > 0.0) ? gain + 0.2 : gain * 0.8;
      gain = std::max(gain, 0.01);
      u = momentum * u - config.learning_rate * gain * g;
      y.values()[idx] += u;
    }
    for (std::size_t k = 0; k < dims; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y(i, k);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y(i, k) -= mean;
    }

    if (it % config.kl_every == 0 || it == config.iterations) {
      const double kl = kl_divergence(p, student_affinities(y));
      if (!std::isfinite(kl)) {
        fail(ErrorKind::numeric, "non-finite KL divergence at iteration " + std::to_string(it));
      }
      result.kl_trace.push_back({it, kl});
    }
  }
  result.points = std::move(y);
  return result;
}

}  // namespace lidlab::tsne
