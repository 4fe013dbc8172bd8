// SPDX-License-Identifier: Apache-2.0
#include "lidlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "lidlab/codec.hpp"
#include "lidlab/error.hpp"
#include "lidlab/unicode.hpp"

namespace lidlab::models {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::lstm: return "lstm";
    case ModelKind::cnn: return "cnn";
  }
  return "?";
}

std::string to_string(EmbeddingMode mode) { return mode == EmbeddingMode::hashed ? "hashed" : "external"; }

ModelKind parse_model_kind(std::string_view name) {
  if (name == "mlp") return ModelKind::mlp;
  if (name == "lstm") return ModelKind::lstm;
  if (name == "cnn") return ModelKind::cnn;
  fail(ErrorKind::config, "unknown model kind \"" + std::string(name) + "\"");
}

EmbeddingMode parse_embedding_mode(std::string_view name) {
  if (name == "hashed") return EmbeddingMode::hashed;
  if (name == "external") return EmbeddingMode::external;
  fail(ErrorKind::config, "unknown embedding mode \"" + std::string(name) + "\"");
}

std::string TrainTrace::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.train_accuracy) << ','
        << format_double(e.val_loss) << ',' << format_double(e.val_accuracy) << '\n';
  }
  return out.str();
}

nn::Matrix frame_vector(std::span<const double> v, std::size_t frame_size) {
  if (frame_size == 0 || v.size() % frame_size != 0) {
    fail(ErrorKind::config, "frame size " + std::to_string(frame_size) + " does not divide vector width " +
                                std::to_string(v.size()));
  }
  return nn::Matrix(v.size() / frame_size, frame_size, std::vector<double>(v.begin(), v.end()));
}

// ---------------------------------------------------------------------------
// Classifier

struct Classifier::Tapes {
  nn::Dense::Tape hidden1;
  nn::Dense::Tape hidden2;
  nn::Dense::Tape output;
  nn::LstmCell::Tape lstm;
  nn::Conv1d::Tape conv;
};

Classifier::Classifier(Architecture arch, LabelMap labels) : arch_(arch), labels_(std::move(labels)) {
  if (labels_.size() < 2) fail(ErrorKind::config, "a classifier needs at least two languages");
  if (arch_.input_dim == 0 || arch_.hidden == 0 || arch_.filters == 0 || arch_.kernel == 0 ||
      arch_.frame_size == 0 || arch_.max_tokens == 0) {
    fail(ErrorKind::config, "architecture sizes must be positive");
  }
  nn::Rng rng(arch_.seed);
  std::size_t frame_dim = arch_.input_dim;
  if (arch_.mode == EmbeddingMode::hashed) {
    table_.emplace(arch_.input_dim, arch_.buckets, arch_.n_range, arch_.seed);
  } else if (arch_.kind != ModelKind::mlp) {
    if (arch_.input_dim % arch_.frame_size != 0) {
      fail(ErrorKind::config, "frame size " + std::to_string(arch_.frame_size) + " does not divide input width " +
                                  std::to_string(arch_.input_dim));
    }
    frame_dim = arch_.frame_size;
  }

  const std::size_t L = labels_.size();
  switch (arch_.kind) {
    case ModelKind::mlp:
      hidden1_ = nn::Dense(arch_.input_dim, arch_.hidden, nn::Activation::relu, rng);
      hidden2_ = nn::Dense(arch_.hidden, arch_.hidden, nn::Activation::relu, rng);
      output_ = nn::Dense(arch_.hidden, L, nn::Activation::identity, rng);
      break;
    case ModelKind::lstm:
      lstm_ = nn::LstmCell(frame_dim, arch_.hidden, rng);
      output_ = nn::Dense(arch_.hidden, L, nn::Activation::identity, rng);
      break;
    case ModelKind::cnn:
      conv_ = nn::Conv1d(frame_dim, arch_.kernel, arch_.filters, rng);
      output_ = nn::Dense(arch_.filters, L, nn::Activation::identity, rng);
      break;
  }
}

Input Classifier::featurize(std::string_view text) const {
  if (!table_) fail(ErrorKind::config, "model uses external embeddings; text input is not supported");
  Input input;
  input.tokens = embed::document_buckets(normalize_text(text), *table_);
  return input;
}

Input Classifier::featurize(std::vector<double> vector) const {
  if (table_) fail(ErrorKind::config, "model uses hashed embeddings; vector input is not supported");
  if (vector.size() != arch_.input_dim) {
    fail(ErrorKind::dimension, "expected a sentence vector of width " + std::to_string(arch_.input_dim) +
                                   ", got " + std::to_string(vector.size()));
  }
  Input input;
  input.vector = std::move(vector);
  return input;
}

nn::Matrix Classifier::build_input(const Input& input) const {
  if (arch_.mode == EmbeddingMode::external) {
    if (input.vector.size() != arch_.input_dim) {
      fail(ErrorKind::dimension, "expected a sentence vector of width " + std::to_string(arch_.input_dim) +
                                     ", got " + std::to_string(input.vector.size()));
    }
    if (arch_.kind == ModelKind::mlp) return nn::Matrix(1, arch_.input_dim, input.vector);
    return frame_vector(input.vector, arch_.frame_size);
  }

  const std::size_t D = arch_.input_dim;
  if (arch_.kind == ModelKind::mlp) {
    nn::Matrix pooled(1, D);
    if (input.tokens.empty()) return pooled;
    std::vector<double> token(D);
    for (const auto& buckets : input.tokens) {
      embed::token_vector(buckets, *table_, token);
      for (std::size_t d = 0; d < D; ++d) pooled(0, d) += token[d];
    }
    const double inv = 1.0 / static_cast<double>(input.tokens.size());
    for (auto& v : pooled.values()) v *= inv;
    return pooled;
  }

  const std::size_t used = std::min(input.tokens.size(), arch_.max_tokens);
  std::size_t rows = std::max<std::size_t>(used, 1);
  if (arch_.kind == ModelKind::cnn) rows = std::max(rows, arch_.kernel);
  nn::Matrix sequence(rows, D);
  for (std::size_t t = 0; t < used; ++t) embed::token_vector(input.tokens[t], *table_, sequence.row(t));
  return sequence;
}

std::vector<double> Classifier::forward(const nn::Matrix& x, Tapes* tapes) const {
  Tapes scratch;
  Tapes& tp = tapes ? *tapes : scratch;
  switch (arch_.kind) {
    case ModelKind::mlp: {
      const auto a = hidden1_.forward(x.row(0), tp.hidden1);
      const auto b = hidden2_.forward(a, tp.hidden2);
      return output_.forward(b, tp.output);
    }
    case ModelKind::lstm: {
      const nn::Matrix states = lstm_.forward(x, tp.lstm);
      return output_.forward(states.row(states.rows() - 1), tp.output);
    }
    case ModelKind::cnn: {
      const auto pooled = conv_.forward(x, tp.conv);
      return output_.forward(pooled, tp.output);
    }
  }
  return {};
}

nn::Matrix Classifier::backward(Tapes& tapes, std::span<const double> grad_logits) {
  const auto d_head = output_.backward(tapes.output, grad_logits);
  switch (arch_.kind) {
    case ModelKind::mlp: {
      const auto d2 = hidden2_.backward(tapes.hidden2, d_head);
      const auto d1 = hidden1_.backward(tapes.hidden1, d2);
      return nn::Matrix(1, d1.size(), d1);
    }
    case ModelKind::lstm: {
      nn::Matrix grad_hidden(tapes.lstm.hidden.rows(), tapes.lstm.hidden.cols());
      std::copy(d_head.begin(), d_head.end(), grad_hidden.row(grad_hidden.rows() - 1).begin());
      return lstm_.backward(tapes.lstm, grad_hidden);
    }
    case ModelKind::cnn:
      return conv_.backward(tapes.conv, d_head);
  }
  return {};
}

void Classifier::zero_grad() {
  hidden1_.zero_grad();
  hidden2_.zero_grad();
  output_.zero_grad();
  lstm_.zero_grad();
  conv_.zero_grad();
}

std::vector<double> Classifier::logits(const Input& input) const { return forward(build_input(input), nullptr); }

Prediction Classifier::predict(const Input& input) const {
  Prediction p;
  p.probabilities = nn::softmax(logits(input));
  p.label = static_cast<std::size_t>(
      std::max_element(p.probabilities.begin(), p.probabilities.end()) - p.probabilities.begin());
  return p;
}

std::vector<nn::ParamRef> Classifier::params() {
  std::vector<nn::ParamRef> out;
  const auto append = [&out](std::vector<nn::ParamRef> more) {
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  };
  switch (arch_.kind) {
    case ModelKind::mlp:
      append(hidden1_.params("hidden1"));
      append(hidden2_.params("hidden2"));
      break;
    case ModelKind::lstm:
      append(lstm_.params("lstm"));
      break;
    case ModelKind::cnn:
      append(conv_.params("conv"));
      break;
  }
  append(output_.params("output"));
  return out;
}

std::string Classifier::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "lidlab-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = models::to_string(arch_.kind);
  j["embedding"] = models::to_string(arch_.mode);
  j["labels"] = labels_.codes();
  j["hyperparameters"] = {{"input_dim", arch_.input_dim},   {"hidden", arch_.hidden},
                          {"filters", arch_.filters},       {"kernel", arch_.kernel},
                          {"frame_size", arch_.frame_size}, {"max_tokens", arch_.max_tokens},
                          {"buckets", arch_.buckets},       {"n_range", {arch_.n_range.min, arch_.n_range.max}},
                          {"seed", arch_.seed}};
  auto& params_json = j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& p : const_cast<Classifier*>(this)->params()) params_json[p.name] = encode_doubles(p.value);
  if (table_) j["table"] = nlohmann::ordered_json::parse(table_->to_json());
  return j.dump();
}

Classifier Classifier::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string{}) != "lidlab-model") fail(ErrorKind::parse, "not a lidlab model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorKind::version, "model format version " + std::to_string(version) + " is not supported (expected " +
                                   std::to_string(kModelFormatVersion) + ")");
    }
    Architecture arch;
    arch.kind = parse_model_kind(j.at("kind").get<std::string>());
    arch.mode = parse_embedding_mode(j.at("embedding").get<std::string>());
    const auto& hp = j.at("hyperparameters");
    arch.input_dim = hp.at("input_dim").get<std::size_t>();
    arch.hidden = hp.at("hidden").get<std::size_t>();
    arch.filters = hp.at("filters").get<std::size_t>();
    arch.kernel = hp.at("kernel").get<std::size_t>();
    arch.frame_size = hp.at("frame_size").get<std::size_t>();
    arch.max_tokens = hp.at("max_tokens").get<std::size_t>();
    arch.buckets = hp.at("buckets").get<std::size_t>();
    const auto range = hp.at("n_range").get<std::vector<std::size_t>>();
    if (range.size() != 2) fail(ErrorKind::parse, "n_range must have two entries");
    arch.n_range = {range[0], range[1]};
    arch.seed = hp.at("seed").get<std::uint64_t>();

    Classifier model(arch, LabelMap(j.at("labels").get<std::vector<std::string>>()));
    const auto& stored = j.at("parameters");
    for (auto& p : model.params()) {
      const auto values = decode_doubles(stored.at(p.name).get<std::string>());
      if (values.size() != p.value.size()) fail(ErrorKind::dimension, "parameter " + p.name + " has the wrong size");
      std::copy(values.begin(), values.end(), p.value.begin());
    }
    if (arch.mode == EmbeddingMode::hashed) {
      model.table_ = embed::EmbeddingTable::from_json(j.at("table").dump());
      if (model.table_->dim() != arch.input_dim) fail(ErrorKind::dimension, "table width differs from input_dim");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed model file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Training

class Trainer {
 public:
  Trainer(Classifier& model, const TrainConfig& config) : model_(model), config_(config), optimizer_(config.optimizer) {}

  TrainResult run(std::span<const Example> examples);

 private:
  struct Outcome {
    double loss;
    bool correct;
  };

  Outcome accumulate(const Example& example, double weight);
  Outcome evaluate(const Example& example) const;
  void scatter_to_table(const Input& input, const nn::Matrix& grad_input);
  void apply();

  Classifier& model_;
  const TrainConfig& config_;
  nn::Optimizer optimizer_;
  std::map<std::size_t, std::vector<double>> table_grads_;
  std::size_t empty_sequences_ = 0;
};

Trainer::Outcome Trainer::evaluate(const Example& example) const {
  const auto logits = model_.forward(model_.build_input(example.input), nullptr);
  const auto [loss, grad] = nn::softmax_cross_entropy(logits, example.label);
  const auto best = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  return {loss, best == example.label};
}

Trainer::Outcome Trainer::accumulate(const Example& example, double weight) {
  Classifier::Tapes tapes;
  const nn::Matrix x = model_.build_input(example.input);
  const auto logits = model_.forward(x, &tapes);
  auto [loss, grad] = nn::softmax_cross_entropy(logits, example.label);
  const auto best = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  for (auto& g : grad) g *= weight;
  const nn::Matrix grad_input = model_.backward(tapes, grad);
  if (model_.table_) scatter_to_table(example.input, grad_input);
  return {loss, best == example.label};
}

void Trainer::scatter_to_table(const Input& input, const nn::Matrix& grad_input) {
  const std::size_t D = model_.arch_.input_dim;
  const auto add = [&](std::size_t bucket, std::span<const double> g, double scale) {
    auto& acc = table_grads_[bucket];
    if (acc.empty()) acc.assign(D, 0.0);
    for (std::size_t d = 0; d < D; ++d) acc[d] += scale * g[d];
  };
  if (model_.arch_.kind == ModelKind::mlp) {
    const double per_token = 1.0 / static_cast<double>(input.tokens.size());
    for (const auto& buckets : input.tokens) {
      const double scale = per_token / static_cast<double>(buckets.size());
      for (std::size_t b : buckets) add(b, grad_input.row(0), scale);
    }
    return;
  }
  const std::size_t used = std::min(input.tokens.size(), model_.arch_.max_tokens);
  for (std::size_t t = 0; t < used; ++t) {
    const double scale = 1.0 / static_cast<double>(input.tokens[t].size());
    for (std::size_t b : input.tokens[t]) add(b, grad_input.row(t), scale);
  }
}

void Trainer::apply() {
  std::vector<nn::SparseRow> rows;
  if (model_.table_) {
    // Materialize first: row_mut may grow the backing storage.
    for (const auto& [bucket, _] : table_grads_) model_.table_->row_mut(bucket);
    for (const auto& [bucket, grad] : table_grads_) rows.push_back({bucket, model_.table_->row_mut(bucket), grad});
  }
  const auto params = model_.params();
  optimizer_.step(params, rows);
  model_.zero_grad();
  table_grads_.clear();
}

TrainResult Trainer::run(std::span<const Example> examples) {
  if (examples.empty()) fail(ErrorKind::empty_input, "training needs at least one example");
  if (config_.epochs < 1 || config_.batch_size < 1) fail(ErrorKind::config, "epochs and batch size must be >= 1");
  if (!(config_.validation_fraction >= 0.0 && config_.validation_fraction < 1.0)) {
    fail(ErrorKind::config, "validation fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> labels;
  for (const auto& ex : examples) {
    if (ex.label >= model_.classes()) {
      fail(ErrorKind::config, "example label " + std::to_string(ex.label) + " outside the label map");
    }
    labels.push_back(ex.label);
    const bool sequence_model = model_.arch_.kind != ModelKind::mlp;
    if (sequence_model && model_.table_ && ex.input.tokens.empty()) ++empty_sequences_;
  }

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  if (config_.validation_fraction > 0.0 && examples.size() >= 2) {
    const auto mask = split_mask(labels, model_.classes(),
                                 {1.0 - config_.validation_fraction, config_.seed, /*stratified=*/true});
    for (std::size_t i = 0; i < examples.size(); ++i) (mask[i] ? train_idx : val_idx).push_back(i);
  } else {
    for (std::size_t i = 0; i < examples.size(); ++i) train_idx.push_back(i);
  }

  nn::Rng rng(config_.seed);
  TrainTrace trace;
  model_.zero_grad();
  for (std::size_t epoch = 1; epoch <= config_.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < train_idx.size(); start += config_.batch_size) {
      const std::size_t end = std::min(start + config_.batch_size, train_idx.size());
      const double weight = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto outcome = accumulate(examples[train_idx[k]], weight);
        if (!std::isfinite(outcome.loss)) {
          fail(ErrorKind::numeric, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(start / config_.batch_size + 1));
        }
        loss_sum += outcome.loss;
        correct += outcome.correct ? 1 : 0;
      }
      try {
        apply();
      } catch (const Error& e) {
        fail(e.kind(), std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(start / config_.batch_size + 1) + ")");
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(train_idx.size());
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_idx.size());
    if (!val_idx.empty()) {
      double val_loss = 0.0;
      std::size_t val_correct = 0;
      for (std::size_t i : val_idx) {
        const auto outcome = evaluate(examples[i]);
        val_loss += outcome.loss;
        val_correct += outcome.correct ? 1 : 0;
      }
      record.val_loss = val_loss / static_cast<double>(val_idx.size());
      record.val_accuracy = static_cast<double>(val_correct) / static_cast<double>(val_idx.size());
      if (!std::isfinite(record.val_loss)) {
        fail(ErrorKind::numeric, "non-finite validation loss at epoch " + std::to_string(epoch));
      }
    }
    trace.epochs.push_back(record);
  }
  return {model_, std::move(trace), empty_sequences_};
}

TrainResult train(Classifier model, std::span<const Example> examples, const TrainConfig& config) {
  Trainer trainer(model, config);
  return trainer.run(examples);
}

std::vector<Example> examples_from_corpus(const Classifier& model, const Corpus& corpus) {
  if (!model.table()) fail(ErrorKind::config, "model uses external embeddings; supply sentence vectors");
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.documents) {
    Example ex;
    ex.input.tokens = embed::document_buckets(doc.text, *model.table());
    ex.label = doc.label;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> examples_from_vectors(const Classifier& model, const Corpus& corpus, const nn::Matrix& vectors) {
  if (vectors.rows() != corpus.size()) {
    fail(ErrorKind::dimension, "embedding file has " + std::to_string(vectors.rows()) + " rows but the corpus has " +
                                   std::to_string(corpus.size()) + " documents");
  }
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto row = vectors.row(i);
    out.push_back({model.featurize(std::vector<double>(row.begin(), row.end())), corpus.documents[i].label});
  }
  return out;
}

}  // namespace lidlab::models
