// SPDX-License-Identifier: Apache-2.0
#include "cli/commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lidlab/codec.hpp"
#include "lidlab/corpus.hpp"
#include "lidlab/csv.hpp"
#include "lidlab/embed.hpp"
#include "lidlab/error.hpp"
#include "lidlab/fixture.hpp"
#include "lidlab/metrics.hpp"
#include "lidlab/models.hpp"
#include "lidlab/ngram_detector.hpp"
#include "lidlab/tsne.hpp"
#include "lidlab/unicode.hpp"

namespace lidlab::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << contents;
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

/// `dir/model.json` + ".trace.csv" -> `dir/model.trace.csv`.
fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path stem = out;
  stem.replace_extension();
  return fs::path(stem.string() + suffix);
}

fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

std::string utc_timestamp(std::chrono::system_clock::time_point when) {
  const std::time_t t = std::chrono::system_clock::to_time_t(when);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

struct EmbedSpec {
  models::EmbeddingMode mode = models::EmbeddingMode::hashed;
  std::size_t dim = embed::kDefaultDim;
  fs::path path;
};

EmbedSpec parse_embed_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
  EmbedSpec spec;
  if (kind == "hashed") {
    spec.mode = models::EmbeddingMode::hashed;
    if (!arg.empty()) {
      const double d = parse_double(arg);
      if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d))) {
        fail(ErrorKind::config, "hashed embedding dimension must be a positive integer, got \"" + arg + "\"");
      }
      spec.dim = static_cast<std::size_t>(d);
    }
  } else if (kind == "external") {
    if (arg.empty()) fail(ErrorKind::config, "external embeddings need a path: --embed external:<file>");
    spec.mode = models::EmbeddingMode::external;
    spec.path = arg;
  } else {
    fail(ErrorKind::config, "--embed must be hashed:<dim> or external:<path>, got \"" + text + "\"");
  }
  return spec;
}

/// A model file is either an n-gram detector or a neural classifier.
struct LoadedModel {
  std::optional<ngram::DetectorModel> detector;
  std::optional<models::Classifier> classifier;

  const LabelMap& labels() const { return detector ? detector->labels : classifier->labels(); }
};

LoadedModel load_model(const fs::path& path) {
  const std::string text = read_file(path);
  nlohmann::json head;
  try {
    head = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, path.string() + " is not valid JSON: " + e.what());
  }
  if (!head.is_object() || head.value("format", std::string{}) != "lidlab-model") {
    fail(ErrorKind::parse, path.string() + " is not a lidlab model file");
  }
  if (!head.contains("version") || !head["version"].is_number_integer() ||
      head["version"].get<int>() != models::kModelFormatVersion) {
    fail(ErrorKind::version, path.string() + ": unsupported model format version " +
                                 (head.contains("version") ? head["version"].dump() : std::string("<missing>")));
  }
  LoadedModel model;
  if (head.value("kind", std::string{}) == "ngram") {
    model.detector = ngram::detector_from_json(text);
  } else {
    model.classifier = models::Classifier::from_json(text);
  }
  return model;
}

std::string detector_file(const ngram::DetectorModel& detector) {
  Json j;
  j["format"] = "lidlab-model";
  j["version"] = models::kModelFormatVersion;
  j["kind"] = "ngram";
  const Json body = Json::parse(ngram::to_json(detector));
  for (const auto& [key, value] : body.items()) j[key] = value;
  return j.dump();
}

std::string classifier_display_name(models::ModelKind kind) {
  switch (kind) {
    case models::ModelKind::mlp: return "MLP";
    case models::ModelKind::lstm: return "LSTM";
    case models::ModelKind::cnn: return "CNN";
  }
  return "?";
}

/// Records provenance for one command run.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : command_(std::move(command)), args_(args), started_(std::chrono::system_clock::now()),
        clock_(std::chrono::steady_clock::now()) {}

  Json config = Json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;

  void write(const fs::path& out) const {
    Json j;
    j["command"] = command_;
    j["tool_version"] = kToolVersion;
    j["arguments"] = args_;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    if (seed) {
      j["seed"] = *seed;
    } else {
      j["seed"] = nullptr;
    }
    j["started_at"] = utc_timestamp(started_);
    j["duration_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
    write_file(manifest_path(out), j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point clock_;
};

// ---------------------------------------------------------------------------
// Option bundles

struct FixtureOptions {
  std::size_t languages = 17;
  std::size_t docs = 200;
  std::uint64_t seed = 42;
  std::string out;
};

struct IngestOptions {
  std::string input;
  std::string out;
};

struct SplitOptions {
  std::string input;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  std::string out;
};

struct TrainOptions {
  std::string corpus;
  std::string model = "mlp";
  std::optional<std::string> embed;
  std::size_t epochs = 20;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::string optimizer = "adam";
  double validation_fraction = 0.1;
  std::uint64_t seed = 42;
  std::size_t hidden = 64;
  std::size_t filters = 64;
  std::size_t kernel = 3;
  std::size_t frame_size = 16;
  std::size_t max_tokens = 64;
  std::size_t buckets = embed::kDefaultBuckets;
  std::size_t ngram_max = ngram::kDefaultMaxN;
  std::size_t ngram_cap = ngram::kDefaultCap;
  std::string out;
};

struct DetectOptions {
  std::string model;
  std::optional<std::string> text;
  std::string input = "-";
  std::optional<std::string> out;
};

struct EvaluateOptions {
  std::string model;
  std::string test;
  std::optional<std::string> embed;
  std::optional<std::string> name;
  std::string out;
};

struct EmbedOptions {
  std::string corpus;
  std::optional<std::string> model;
  std::string embed = "hashed:16";
  std::optional<std::size_t> project;
  std::size_t buckets = embed::kDefaultBuckets;
  std::uint64_t seed = 42;
  std::string out;
};

struct TsneOptions {
  std::string embeddings;
  std::optional<std::string> corpus;
  std::size_t dim = 2;
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  std::uint64_t seed = 42;
  std::string out;
};

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out;
};

// ---------------------------------------------------------------------------
// Commands

int cmd_fixture(const FixtureOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("fixture", args);
  FixtureSpec spec;
  spec.languages = o.languages;
  spec.docs_per_language = o.docs;
  spec.seed = o.seed;
  const Corpus corpus = generate_fixture(spec);
  write_csv(corpus, fs::path(o.out));
  manifest.config = {{"languages", o.languages}, {"docs_per_language", o.docs}, {"min_words", spec.min_words},
                     {"max_words", spec.max_words}, {"loanword_rate", spec.loanword_rate}};
  manifest.seed = o.seed;
  manifest.outputs = {o.out};
  manifest.write(o.out);
  out << "wrote " << corpus.size() << " documents in " << corpus.labels.size() << " languages to " << o.out << "\n";
  return kOk;
}

int cmd_ingest(const IngestOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("ingest", args);
  const LoadResult loaded = load_csv(o.input);
  write_csv(loaded.corpus, fs::path(o.out));
  const fs::path report_path = sibling(o.out, ".report.json");
  const std::string report = loaded.report.to_json();
  write_file(report_path, report + "\n");
  manifest.inputs = {o.input};
  manifest.outputs = {o.out, report_path.string()};
  manifest.write(o.out);
  out << report << "\n";
  return kOk;
}

int cmd_split(const SplitOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("split", args);
  const LoadResult loaded = load_csv(o.input);
  const Split split = stratified_split(loaded.corpus, {o.train_fraction, o.seed, true});
  const fs::path train_path = o.out + ".train.csv";
  const fs::path test_path = o.out + ".test.csv";
  write_csv(split.train, train_path);
  write_csv(split.test, test_path);
  manifest.config = {{"train_fraction", o.train_fraction}, {"stratified", true}};
  manifest.seed = o.seed;
  manifest.inputs = {o.input};
  manifest.outputs = {train_path.string(), test_path.string()};
  manifest.write(o.out);
  out << "train " << split.train.size() << " -> " << train_path.string() << "\n"
      << "test " << split.test.size() << " -> " << test_path.string() << "\n";
  return kOk;
}

int cmd_train(const TrainOptions& o, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Manifest manifest("train", args);
  const LoadResult loaded = load_csv(o.corpus);
  const Corpus& corpus = loaded.corpus;
  manifest.inputs = {o.corpus};
  manifest.seed = o.seed;

  if (o.model == "ngram") {
    if (o.embed) err << "warning: --embed is ignored for the ngram model\n";
    const auto detector = ngram::train_detector(corpus, o.ngram_max, o.ngram_cap);
    write_file(o.out, detector_file(detector));
    manifest.config = {{"model", "ngram"}, {"n_max", o.ngram_max}, {"cap", o.ngram_cap}};
    manifest.outputs = {o.out};
    manifest.write(o.out);
    out << "trained ngram detector over " << detector.labels.size() << " languages -> " << o.out << "\n";
    return kOk;
  }

  const EmbedSpec spec = parse_embed_spec(o.embed.value_or("hashed:16"));
  models::Architecture arch;
  arch.kind = models::parse_model_kind(o.model);
  arch.mode = spec.mode;
  arch.hidden = o.hidden;
  arch.filters = o.filters;
  arch.kernel = o.kernel;
  arch.frame_size = o.frame_size;
  arch.max_tokens = o.max_tokens;
  arch.buckets = o.buckets;
  arch.seed = o.seed;

  nn::Matrix vectors;
  if (spec.mode == models::EmbeddingMode::external) {
    vectors = embed::load_external_embeddings(spec.path);
    if (vectors.rows() != corpus.size()) {
      fail(ErrorKind::dimension, "external embedding file " + spec.path.string() + " has " +
                                     std::to_string(vectors.rows()) + " rows but the corpus has " +
                                     std::to_string(corpus.size()) + " documents");
    }
    arch.input_dim = vectors.cols();
    manifest.inputs.push_back(spec.path.string());
  } else {
    arch.input_dim = spec.dim;
  }

  models::TrainConfig config;
  config.epochs = o.epochs;
  config.batch_size = o.batch;
  config.optimizer.learning_rate = o.lr;
  if (o.optimizer == "sgd") {
    config.optimizer.kind = nn::OptimizerKind::sgd;
  } else if (o.optimizer != "adam") {
    fail(ErrorKind::config, "--optimizer must be adam or sgd");
  }
  config.seed = o.seed;
  config.validation_fraction = o.validation_fraction;

  models::Classifier model(arch, corpus.labels);
  const auto examples = spec.mode == models::EmbeddingMode::hashed
                            ? models::examples_from_corpus(model, corpus)
                            : models::examples_from_vectors(model, corpus, vectors);
  const auto result = models::train(std::move(model), examples, config);

  const fs::path trace_path = sibling(o.out, ".trace.csv");
  write_file(o.out, result.model.to_json());
  write_file(trace_path, result.trace.to_csv());

  manifest.config = {{"model", o.model},
                     {"embedding", models::to_string(arch.mode)},
                     {"input_dim", arch.input_dim},
                     {"hidden", arch.hidden},
                     {"filters", arch.filters},
                     {"kernel", arch.kernel},
                     {"frame_size", arch.frame_size},
                     {"max_tokens", arch.max_tokens},
                     {"buckets", arch.buckets},
                     {"n_range", {arch.n_range.min, arch.n_range.max}},
                     {"epochs", config.epochs},
                     {"batch", config.batch_size},
                     {"optimizer", o.optimizer},
                     {"lr", config.optimizer.learning_rate},
                     {"beta1", config.optimizer.beta1},
                     {"beta2", config.optimizer.beta2},
                     {"epsilon", config.optimizer.epsilon},
                     {"validation_fraction", config.validation_fraction},
                     {"empty_sequences", result.empty_sequences}};
  manifest.outputs = {o.out, trace_path.string()};
  manifest.write(o.out);

  const auto& last = result.trace.epochs.back();
  out << "trained " << o.model << " (" << models::to_string(arch.mode) << ", " << arch.input_dim << "-d) for "
      << result.trace.epochs.size() << " epochs: train_acc " << last.train_accuracy << ", val_acc "
      << last.val_accuracy << " -> " << o.out << "\n";
  if (result.empty_sequences) {
    err << "note: " << result.empty_sequences << " documents had no tokens and were fed as one zero frame\n";
  }
  return kOk;
}

std::vector<double> parse_vector_line(const std::string& line) {
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = std::min(line.find(',', start), line.size());
    values.push_back(parse_double(std::string_view(line).substr(start, end - start)));
    if (end == line.size()) break;
    start = end + 1;
  }
  return values;
}

int cmd_detect(const DetectOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("detect", args);
  const LoadedModel model = load_model(o.model);

  std::vector<std::string> lines;
  if (o.text) {
    lines.push_back(*o.text);
  } else if (o.input == "-") {
    for (std::string line; std::getline(std::cin, line);) lines.push_back(line);
  } else {
    std::ifstream in(o.input, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + o.input);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
  }

  std::ostringstream predictions;
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (model.detector) {
      if (normalize_text(line).empty()) {
        predictions << "-\t-\n";
        continue;
      }
      const auto d = ngram::detect(line, *model.detector);
      predictions << d.language.code << '\t' << d.distance << '\n';
    } else {
      const auto& clf = *model.classifier;
      const bool external = clf.architecture().mode == models::EmbeddingMode::external;
      if (external && line.find_first_not_of(" \t") == std::string::npos) {
        predictions << "-\t-\n";
        continue;
      }
      const models::Input input = external ? clf.featurize(parse_vector_line(line)) : clf.featurize(line);
      const auto p = clf.predict(input);
      predictions << clf.labels().code(p.label) << '\t' << format_double(p.probabilities[p.label]) << '\n';
    }
  }

  if (o.out) {
    write_file(*o.out, predictions.str());
    manifest.inputs = {o.model};
    if (!o.text) manifest.inputs.push_back(o.input);
    manifest.outputs = {*o.out};
    manifest.write(*o.out);
  } else {
    out << predictions.str();
  }
  return kOk;
}

int cmd_evaluate(const EvaluateOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("evaluate", args);
  const LoadedModel model = load_model(o.model);
  const Corpus test = relabel(load_csv(o.test).corpus, model.labels());
  manifest.inputs = {o.model, o.test};

  MetricsReport report;
  ConfusionMatrix cm;
  Json extras;
  if (model.detector) {
    std::vector<std::size_t> truths;
    std::vector<std::size_t> preds;
    for (const auto& doc : test.documents) {
      truths.push_back(doc.label);
      preds.push_back(ngram::detect(doc.text, *model.detector).language.index);
    }
    cm = confusion(truths, preds, test.labels.size());
    extras["classifier"] = o.name.value_or("NGram");
    extras["embedding"] = "-";
    extras["dim"] = nullptr;
  } else {
    const auto& clf = *model.classifier;
    std::vector<models::Example> examples;
    if (clf.architecture().mode == models::EmbeddingMode::external) {
      if (!o.embed) fail(ErrorKind::config, "model uses external embeddings; pass --embed external:<file>");
      const EmbedSpec spec = parse_embed_spec(*o.embed);
      if (spec.mode != models::EmbeddingMode::external) {
        fail(ErrorKind::config, "model uses external embeddings; pass --embed external:<file>");
      }
      const nn::Matrix vectors = embed::load_external_embeddings(spec.path);
      examples = models::examples_from_vectors(clf, test, vectors);
      manifest.inputs.push_back(spec.path.string());
    } else {
      examples = models::examples_from_corpus(clf, test);
    }
    std::vector<std::size_t> truths;
    std::vector<std::size_t> preds;
    for (const auto& ex : examples) {
      truths.push_back(ex.label);
      preds.push_back(clf.predict(ex.input).label);
    }
    cm = confusion(truths, preds, test.labels.size());
    extras["classifier"] = o.name.value_or(classifier_display_name(clf.architecture().kind));
    extras["embedding"] = clf.architecture().mode == models::EmbeddingMode::hashed ? "Hashed" : "External";
    extras["dim"] = clf.architecture().input_dim;
  }
  report = summarize(cm, test.labels.codes());

  const fs::path confusion_path = sibling(o.out, ".confusion.csv");
  write_file(o.out, report_to_json(report, extras.dump()) + "\n");
  write_file(confusion_path, confusion_to_csv(cm, test.labels.codes()));
  manifest.config = {{"name", extras["classifier"]}};
  manifest.outputs = {o.out, confusion_path.string()};
  manifest.write(o.out);
  out << "accuracy " << format_double(report.accuracy) << " precision " << format_double(report.precision)
      << " recall " << format_double(report.recall) << " f1 " << format_double(report.f1) << " -> " << o.out << "\n";
  return kOk;
}

int cmd_embed(const EmbedOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("embed", args);
  const Corpus corpus = load_csv(o.corpus).corpus;
  manifest.inputs = {o.corpus};
  manifest.seed = o.seed;
  nn::Matrix vectors;
  if (o.project) {
    vectors = embed::random_projection_embeddings(corpus, *o.project, o.seed);
    manifest.config = {{"source", "random_projection"}, {"dim", *o.project}};
  } else if (o.model) {
    const LoadedModel model = load_model(*o.model);
    if (!model.classifier || !model.classifier->table()) {
      fail(ErrorKind::config, *o.model + " has no hashed embedding table");
    }
    vectors = embed::embed_corpus(corpus, *model.classifier->table());
    manifest.inputs.push_back(*o.model);
    manifest.config = {{"source", "model_table"}, {"dim", vectors.cols()}};
  } else {
    const EmbedSpec spec = parse_embed_spec(o.embed);
    if (spec.mode != models::EmbeddingMode::hashed) fail(ErrorKind::config, "embed computes hashed vectors only");
    const embed::EmbeddingTable table(spec.dim, o.buckets, {}, o.seed);
    vectors = embed::embed_corpus(corpus, table);
    manifest.config = {{"source", "fresh_table"}, {"dim", spec.dim}, {"buckets", o.buckets}};
  }
  std::ostringstream csv;
  embed::write_embeddings(vectors, csv);
  write_file(o.out, csv.str());
  manifest.outputs = {o.out};
  manifest.write(o.out);
  out << "wrote " << vectors.rows() << " x " << vectors.cols() << " embeddings -> " << o.out << "\n";
  return kOk;
}

int cmd_tsne(const TsneOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("tsne", args);
  const nn::Matrix x = embed::load_external_embeddings(o.embeddings);
  manifest.inputs = {o.embeddings};
  std::optional<Corpus> corpus;
  if (o.corpus) {
    corpus = load_csv(*o.corpus).corpus;
    manifest.inputs.push_back(*o.corpus);
    if (corpus->size() != x.rows()) {
      fail(ErrorKind::dimension, "embedding file has " + std::to_string(x.rows()) + " rows but the corpus has " +
                                     std::to_string(corpus->size()) + " documents");
    }
  }
  tsne::TsneConfig config;
  config.output_dim = o.dim;
  config.perplexity = o.perplexity;
  config.iterations = o.iterations;
  config.seed = o.seed;
  const auto result = tsne::run_tsne(x, config);

  std::ostringstream points;
  points << "doc_id,language_code,x,y" << (o.dim == 3 ? ",z" : "") << "\n";
  for (std::size_t i = 0; i < result.points.rows(); ++i) {
    points << i << ',' << (corpus ? csv::quote(corpus->language(corpus->documents[i]).code) : std::string{});
    for (double v : result.points.row(i)) points << ',' << format_double(v);
    points << '\n';
  }
  std::ostringstream kl;
  kl << "iteration,kl\n";
  for (const auto& r : result.kl_trace) kl << r.iteration << ',' << format_double(r.kl) << '\n';

  const fs::path kl_path = sibling(o.out, ".kl.csv");
  write_file(o.out, points.str());
  write_file(kl_path, kl.str());
  manifest.config = {{"dim", config.output_dim},
                     {"perplexity", config.perplexity},
                     {"iterations", config.iterations},
                     {"early_exaggeration", config.early_exaggeration},
                     {"exaggeration_iterations", config.exaggeration_iterations},
                     {"learning_rate", config.learning_rate},
                     {"momentum", {config.initial_momentum, config.final_momentum}},
                     {"momentum_switch", config.momentum_switch}};
  manifest.seed = o.seed;
  manifest.outputs = {o.out, kl_path.string()};
  manifest.write(o.out);
  out << "t-SNE of " << x.rows() << " points to " << o.dim << "-d, final KL "
      << format_double(result.kl_trace.back().kl) << " -> " << o.out << "\n";
  return kOk;
}

int cmd_report(const ReportOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("report", args);
  std::vector<TableRow> rows;
  for (const auto& path : o.inputs) {
    const std::string text = read_file(path);
    try {
      const auto j = nlohmann::json::parse(text);
      TableRow row;
      row.classifier = j.at("classifier").get<std::string>();
      row.embedding = j.at("embedding").get<std::string>();
      if (!j.at("dim").is_null()) row.dim = j.at("dim").get<std::size_t>();
      row.report = report_from_json(text);
      rows.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::parse, "malformed evaluation file " + path + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorKind::parse, "malformed evaluation file " + path + ": " + e.what());
    }
  }
  sort_table(rows);
  const std::string text = table_to_text(rows);
  const fs::path text_path = sibling(o.out, ".txt");
  write_file(o.out, table_to_csv(rows));
  write_file(text_path, text);
  manifest.inputs = o.inputs;
  manifest.config = {{"order", "rule-based, MLP, LSTM, CNN; Hashed before External"}};
  manifest.outputs = {o.out, text_path.string()};
  manifest.write(o.out);
  out << text;
  return kOk;
}

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::io ? kIoError : kInvalid; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lidlab: multilingual language identification laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::uint64_t default_seed = 42;
  if (const char* env = std::getenv("LIDLAB_SEED")) {
    try {
      default_seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "error: LIDLAB_SEED must be an unsigned integer\n";
      return kInvalid;
    }
  }

  FixtureOptions fixture_opts;
  fixture_opts.seed = default_seed;
  auto* fixture = app.add_subcommand("fixture", "Generate the seeded multilingual fixture corpus");
  fixture->add_option("--languages", fixture_opts.languages, "Number of languages (2-17)")->capture_default_str();
  fixture->add_option("--docs", fixture_opts.docs, "Documents per language")->capture_default_str();
  fixture->add_option("--seed", fixture_opts.seed, "Generator seed");
  fixture->add_option("--out", fixture_opts.out, "Output CSV")->required();

  IngestOptions ingest_opts;
  auto* ingest = app.add_subcommand("ingest", "Load, validate and normalize a Text/Language CSV");
  ingest->add_option("input", ingest_opts.input, "Source CSV")->required();
  ingest->add_option("--out", ingest_opts.out, "Normalized corpus CSV")->required();

  SplitOptions split_opts;
  split_opts.seed = default_seed;
  auto* split = app.add_subcommand("split", "Stratified train/test split");
  split->add_option("input", split_opts.input, "Corpus CSV")->required();
  split->add_option("--train-fraction", split_opts.train_fraction, "Fraction per class for training")
      ->capture_default_str();
  split->add_option("--seed", split_opts.seed, "Shuffle seed");
  split->add_option("--out", split_opts.out, "Output prefix (<out>.train.csv, <out>.test.csv)")->required();

  TrainOptions train_opts;
  train_opts.seed = default_seed;
  auto* train = app.add_subcommand("train", "Train an ngram detector or a neural classifier");
  train->add_option("corpus", train_opts.corpus, "Training corpus CSV")->required();
  train->add_option("--model", train_opts.model, "ngram | mlp | lstm | cnn")
      ->check(CLI::IsMember({"ngram", "mlp", "lstm", "cnn"}))
      ->capture_default_str();
  train->add_option("--embed", train_opts.embed, "hashed:<dim> | external:<path> (default hashed:16)");
  train->add_option("--epochs", train_opts.epochs)->capture_default_str();
  train->add_option("--batch", train_opts.batch)->capture_default_str();
  train->add_option("--lr", train_opts.lr)->capture_default_str();
  train->add_option("--optimizer", train_opts.optimizer, "adam | sgd")->capture_default_str();
  train->add_option("--validation-fraction", train_opts.validation_fraction)->capture_default_str();
  train->add_option("--seed", train_opts.seed, "Initialization and shuffling seed");
  train->add_option("--hidden", train_opts.hidden)->capture_default_str();
  train->add_option("--filters", train_opts.filters)->capture_default_str();
  train->add_option("--kernel", train_opts.kernel)->capture_default_str();
  train->add_option("--frame-size", train_opts.frame_size)->capture_default_str();
  train->add_option("--max-tokens", train_opts.max_tokens)->capture_default_str();
  train->add_option("--buckets", train_opts.buckets)->capture_default_str();
  train->add_option("--ngram-max", train_opts.ngram_max)->capture_default_str();
  train->add_option("--ngram-cap", train_opts.ngram_cap)->capture_default_str();
  train->add_option("--out", train_opts.out, "Model JSON (trace: <stem>.trace.csv)")->required();

  DetectOptions detect_opts;
  auto* detect = app.add_subcommand("detect", "Predict the language of each input line");
  detect->add_option("model", detect_opts.model, "Model JSON")->required();
  detect->add_option("--text", detect_opts.text, "Single text to classify");
  detect->add_option("--input", detect_opts.input, "File of lines, or - for stdin")->capture_default_str();
  detect->add_option("--out", detect_opts.out, "Write predictions here instead of stdout");

  EvaluateOptions evaluate_opts;
  auto* evaluate = app.add_subcommand("evaluate", "Metrics report and confusion matrix on a test corpus");
  evaluate->add_option("model", evaluate_opts.model, "Model JSON")->required();
  evaluate->add_option("test", evaluate_opts.test, "Test corpus CSV")->required();
  evaluate->add_option("--embed", evaluate_opts.embed, "external:<path> for external-embedding models");
  evaluate->add_option("--name", evaluate_opts.name, "Classifier name in the comparative table");
  evaluate->add_option("--out", evaluate_opts.out, "Report JSON (confusion: <stem>.confusion.csv)")->required();

  EmbedOptions embed_opts;
  embed_opts.seed = default_seed;
  auto* embed_cmd = app.add_subcommand("embed", "Write document vectors for a corpus");
  embed_cmd->add_option("corpus", embed_opts.corpus, "Corpus CSV")->required();
  embed_cmd->add_option("--model", embed_opts.model, "Use the trained table of a hashed model");
  embed_cmd->add_option("--embed", embed_opts.embed, "hashed:<dim> for a fresh seeded table")->capture_default_str();
  embed_cmd->add_option("--project", embed_opts.project, "Random-projection sentence vectors of this width");
  embed_cmd->add_option("--buckets", embed_opts.buckets)->capture_default_str();
  embed_cmd->add_option("--seed", embed_opts.seed);
  embed_cmd->add_option("--out", embed_opts.out, "Headerless CSV of vectors")->required();

  TsneOptions tsne_opts;
  tsne_opts.seed = default_seed;
  auto* tsne_cmd = app.add_subcommand("tsne", "Exact t-SNE projection of an embedding matrix");
  tsne_cmd->add_option("embeddings", tsne_opts.embeddings, "Headerless CSV of vectors")->required();
  tsne_cmd->add_option("--corpus", tsne_opts.corpus, "Corpus CSV aligned with the vectors (for labels)");
  tsne_cmd->add_option("--dim", tsne_opts.dim, "2 or 3")->check(CLI::IsMember({2, 3}))->capture_default_str();
  tsne_cmd->add_option("--perplexity", tsne_opts.perplexity)->capture_default_str();
  tsne_cmd->add_option("--iterations", tsne_opts.iterations)->capture_default_str();
  tsne_cmd->add_option("--seed", tsne_opts.seed);
  tsne_cmd->add_option("--out", tsne_opts.out, "Points CSV (KL trace: <stem>.kl.csv)")->required();

  ReportOptions report_opts;
  auto* report = app.add_subcommand("report", "Comparative table from evaluation reports");
  report->add_option("inputs", report_opts.inputs, "Evaluation JSON files")->required();
  report->add_option("--out", report_opts.out, "Table CSV (aligned text: <stem>.txt)")->required();

  std::vector<const char*> argv{"lidlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*fixture) return cmd_fixture(fixture_opts, args, out);
    if (*ingest) return cmd_ingest(ingest_opts, args, out);
    if (*split) return cmd_split(split_opts, args, out);
    if (*train) return cmd_train(train_opts, args, out, err);
    if (*detect) return cmd_detect(detect_opts, args, out);
    if (*evaluate) return cmd_evaluate(evaluate_opts, args, out);
    if (*embed_cmd) return cmd_embed(embed_opts, args, out);
    if (*tsne_cmd) return cmd_tsne(tsne_opts, args, out);
    if (*report) return cmd_report(report_opts, args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kInvalid;
}

}  // namespace lidlab::cli
