// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lidlab/nn.hpp"

namespace lidlab::tsne {

struct TsneConfig {
  std::size_t output_dim = 2;  // 2 or 3
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  std::size_t kl_every = 50;
  std::uint64_t seed = 42;
};

struct SigmaSearch {
  double sigma = 0.0;
  double perplexity = 0.0;    // realized 2^H
  bool converged = false;     // |2^H - target| <= 1e-3
  bool degenerate = false;    // all distances equal; distribution is uniform
  bool unreachable = false;   // target exceeds the number of neighbours
  std::vector<double> conditional;  // p_{j|i} over the supplied neighbours
};

inline constexpr double kPerplexityTolerance = 1e-3;

/// Gaussian bandwidth for one point such that the conditional neighbour
/// distribution has perplexity `target`, by bisection with bracket doubling
/// (at most 64 halvings). Throws config error for fewer than one neighbour or
/// a target below 1.
SigmaSearch binary_search_sigma(std::span<const double> squared_distances, double target);

/// Symmetric joint affinities P = (P_cond + P_cond^T) / 2N, floored at 1e-12.
/// Throws config error when N < 4 or perplexity >= (N - 1) / 3.
nn::Matrix pairwise_affinities(const nn::Matrix& x, double perplexity);

/// Student-t (one degree of freedom) affinities of a low-dimensional layout.
nn::Matrix student_affinities(const nn::Matrix& y);

/// Sum over off-diagonal cells of p log(p / q), with both floored at 1e-12.
double kl_divergence(const nn::Matrix& p, const nn::Matrix& q);

struct KlRecord {
  std::size_t iteration = 0;
  double kl = 0.0;
};

struct TsneResult {
  nn::Matrix points;  // N x output_dim, centered
  std::vector<KlRecord> kl_trace;
};

/// Exact O(N^2) t-SNE with early exaggeration, a momentum schedule and
/// per-coordinate adaptive gains. KL (against the unexaggerated P) is
/// recorded every `kl_every` iterations and at the final one.
TsneResult run_tsne(const nn::Matrix& x, const TsneConfig& config);

/// Largest admissible perplexity bound (N - 1) / 3 for N points.
double perplexity_bound(std::size_t points);

}  // namespace lidlab::tsne
