// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidlab/corpus.hpp"
#include "lidlab/embed.hpp"
#include "lidlab/nn.hpp"

namespace lidlab::models {

enum class ModelKind { mlp, lstm, cnn };
enum class EmbeddingMode { hashed, external };

std::string to_string(ModelKind kind);
std::string to_string(EmbeddingMode mode);
ModelKind parse_model_kind(std::string_view name);
EmbeddingMode parse_embedding_mode(std::string_view name);

inline constexpr int kModelFormatVersion = 1;

struct Architecture {
  ModelKind kind = ModelKind::mlp;
  EmbeddingMode mode = EmbeddingMode::hashed;
  /// Hashed: embedding dimension D. External: sentence-vector width D_ext.
  std::size_t input_dim = embed::kDefaultDim;
  std::size_t hidden = 64;   // both MLP hidden layers, LSTM state size
  std::size_t filters = 64;  // CNN filter count
  std::size_t kernel = 3;    // CNN filter height
  std::size_t frame_size = 16;
  std::size_t max_tokens = 64;
  std::size_t buckets = embed::kDefaultBuckets;
  embed::NgramRange n_range;
  std::uint64_t seed = 42;
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  nn::OptimizerConfig optimizer;
  std::uint64_t seed = 42;
  double validation_fraction = 0.1;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;

  /// Header `epoch,train_loss,train_acc,val_loss,val_acc`, round-trip decimals.
  std::string to_csv() const;

  friend bool operator==(const TrainTrace&, const TrainTrace&) = default;
};

/// What a classifier consumes: token bucket lists in hashed mode, a fixed
/// sentence vector in external mode.
struct Input {
  embed::TokenBuckets tokens;
  std::vector<double> vector;
};

struct Example {
  Input input;
  std::size_t label = 0;
};

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;
};

/// Splits `v` in index order into |v| / frame_size frames (rows). Throws
/// config error when frame_size does not divide |v|.
nn::Matrix frame_vector(std::span<const double> v, std::size_t frame_size);

class Classifier {
 public:
  /// Seeded initialization of every layer (and the embedding table in hashed
  /// mode). Throws config error for fewer than two labels or zero sizes.
  Classifier(Architecture arch, LabelMap labels);

  const Architecture& architecture() const noexcept { return arch_; }
  const LabelMap& labels() const noexcept { return labels_; }
  std::size_t classes() const noexcept { return labels_.size(); }
  const embed::EmbeddingTable* table() const noexcept { return table_ ? &*table_ : nullptr; }

  /// Hashed mode: normalizes `text` and hashes its tokens.
  Input featurize(std::string_view text) const;
  /// External mode: wraps a sentence vector; throws dimension error on a
  /// width other than input_dim.
  Input featurize(std::vector<double> vector) const;

  /// MLP: 1 x D pooled vector. LSTM/CNN: T x frame sequence; hashed inputs
  /// keep at most max_tokens tokens, an empty document becomes one zero
  /// frame, and CNN inputs shorter than the kernel are zero-padded.
  nn::Matrix build_input(const Input& input) const;

  std::vector<double> logits(const Input& input) const;
  /// Argmax of softmax(logits), ties to the lowest index.
  Prediction predict(const Input& input) const;

  /// Every trainable block (table excluded), in a fixed order.
  std::vector<nn::ParamRef> params();

  /// Versioned JSON container; parameters are base64 little-endian doubles.
  std::string to_json() const;
  /// Throws version error for another format version, parse error otherwise.
  static Classifier from_json(std::string_view json);

 private:
  struct Tapes;
  friend class Trainer;

  std::vector<double> forward(const nn::Matrix& x, Tapes* tapes) const;
  /// Returns dL/d(input matrix) and accumulates layer gradients.
  nn::Matrix backward(Tapes& tapes, std::span<const double> grad_logits);
  void zero_grad();

  Architecture arch_;
  LabelMap labels_;
  std::optional<embed::EmbeddingTable> table_;
  nn::Dense hidden1_;
  nn::Dense hidden2_;
  nn::Dense output_;
  nn::LstmCell lstm_;
  nn::Conv1d conv_;
};

struct TrainResult {
  Classifier model;
  TrainTrace trace;
  std::size_t empty_sequences = 0;  // documents fed as a single zero frame
};

/// Mini-batch training over a seeded per-epoch shuffle. A stratified
/// validation slice (validation_fraction) is held out for the trace. In
/// hashed mode the embedding rows a batch touches receive gradients through
/// the mean pooling. Throws numeric error on a non-finite loss or gradient.
TrainResult train(Classifier model, std::span<const Example> examples, const TrainConfig& config);

/// Examples for every document of a corpus, hashed mode.
std::vector<Example> examples_from_corpus(const Classifier& model, const Corpus& corpus);
/// Examples from sentence vectors aligned with the corpus rows, external mode.
std::vector<Example> examples_from_vectors(const Classifier& model, const Corpus& corpus, const nn::Matrix& vectors);

}  // namespace lidlab::models
