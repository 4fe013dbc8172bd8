// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "lidlab/codec.hpp"
#include "lidlab/embed.hpp"
#include "lidlab/fixture.hpp"
#include "lidlab/metrics.hpp"
#include "lidlab/models.hpp"
#include "lidlab/ngram_detector.hpp"
#include "lidlab/tsne.hpp"
#include "lidlab/unicode.hpp"
#include "support/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace lidlab;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "lidlab %s failed (%d): %s\n", args[0].c_str(), code, err.str().c_str());
  return code;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// ---------------------------------------------------------------------------

void gradient_checks() {
  const auto start = Clock::now();
  double dense = 0.0, lstm = 0.0, conv = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    dense = std::max(dense, testing::dense_gradient_error(seed, 1e-5));
    lstm = std::max(lstm, testing::lstm_gradient_error(seed, 1e-5));
    conv = std::max(conv, testing::conv_gradient_error(seed, 1e-5));
  }
  const double elapsed = seconds_since(start);
  const double worst = std::max({dense, lstm, conv});
  report(1, worst < 1e-4 && elapsed < 10.0, "gradient checks (20 seeds each, step 1e-5)",
         fmt("max rel err dense %.2e, lstm %.2e, conv+pool %.2e (< 1e-4); %.2f s (< 10 s)", dense, lstm, conv,
             elapsed));
}

void metrics_oracle() {
  std::mt19937_64 rng(42);
  double worst = 0.0;
  bool recall_exact = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t L = 2 + rng() % 16;
    ConfusionMatrix cm(L);
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) cm.at(i, j) = rng() % (i == j ? 200 : 20);
    }
    cm.at(rng() % L, rng() % L) += 1;
    double n = 0.0, correct = 0.0, p = 0.0, r = 0.0, f = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) n += static_cast<double>(cm.at(i, j));
      correct += static_cast<double>(cm.at(i, i));
    }
    for (std::size_t c = 0; c < L; ++c) {
      double row = 0.0, col = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        row += static_cast<double>(cm.at(c, k));
        col += static_cast<double>(cm.at(k, c));
      }
      const double tp = static_cast<double>(cm.at(c, c));
      const double pc = col > 0 ? tp / col : 0.0;
      const double rc = row > 0 ? tp / row : 0.0;
      const double fc = pc + rc > 0 ? 2 * pc * rc / (pc + rc) : 0.0;
      p += row / n * pc;
      r += row / n * rc;
      f += row / n * fc;
    }
    const auto got = summarize(cm);
    worst = std::max({worst, std::abs(got.accuracy - correct / n), std::abs(got.precision - p),
                      std::abs(got.recall - r), std::abs(got.f1 - f)});
    recall_exact = recall_exact && got.recall == got.accuracy;
  }
  report(2, worst <= 1e-12 && recall_exact, "metrics vs brute force (1000 random matrices)",
         fmt("max abs diff %.2e (<= 1e-12); weighted recall == accuracy exactly: %s", worst,
             recall_exact ? "yes" : "no"));
}

struct FixtureRun {
  Split split;
  std::optional<models::Classifier> mlp;
  std::optional<models::Classifier> cnn;
  std::optional<ngram::DetectorModel> detector;
};

MetricsReport evaluate_classifier(const models::Classifier& model, const Corpus& test) {
  std::vector<std::size_t> truths, preds;
  for (const auto& ex : models::examples_from_corpus(model, test)) {
    truths.push_back(ex.label);
    preds.push_back(model.predict(ex.input).label);
  }
  return summarize(confusion(truths, preds, model.classes()), model.labels().codes());
}

void fixture_accuracy(FixtureRun& run) {
  const auto start = Clock::now();
  const Corpus corpus = generate_fixture({.languages = 17, .docs_per_language = 200, .seed = 42});
  run.split = stratified_split(corpus, {.train_fraction = 0.8, .seed = 42});

  const auto train_kind = [&](models::ModelKind kind) {
    models::Classifier model({.kind = kind}, run.split.train.labels);
    const auto examples = models::examples_from_corpus(model, run.split.train);
    return models::train(std::move(model), examples, {}).model;
  };
  run.mlp = train_kind(models::ModelKind::mlp);
  run.cnn = train_kind(models::ModelKind::cnn);
  run.detector = ngram::train_detector(run.split.train);

  const auto mlp = evaluate_classifier(*run.mlp, run.split.test);
  const auto cnn = evaluate_classifier(*run.cnn, run.split.test);
  const auto ngram = ngram::evaluate_detector(*run.detector, run.split.test);
  const double elapsed = seconds_since(start);

  const bool a = mlp.f1 >= 0.95;
  const bool b = ngram.accuracy >= 0.85 && ngram.accuracy < mlp.accuracy;
  const bool c = cnn.f1 >= 0.90;
  const bool t = elapsed < 300.0;
  report(3, a && b && c && t, "fixture 17 x 200, seed 42",
         fmt("(a) MLP hashed-16 F1 %.5f (>= 0.95) %s; (b) n-gram acc %.5f (>= 0.85, < MLP acc %.5f) %s; "
             "(c) CNN hashed-16 F1 %.5f (>= 0.90) %s; %.1f s (< 300 s)",
             mlp.f1, a ? "ok" : "FAIL", ngram.accuracy, mlp.accuracy, b ? "ok" : "FAIL", cnn.f1, c ? "ok" : "FAIL",
             elapsed));
}

void tsne_properties() {
  nn::Rng rng(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  nn::Matrix x(200, 16);
  for (auto& v : x.values()) v = normal(rng);
  const tsne::TsneConfig config;  // perplexity 30
  const std::size_t n = x.rows();

  double worst_perp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) s += (x(i, k) - x(j, k)) * (x(i, k) - x(j, k));
      d.push_back(s);
    }
    const auto search = tsne::binary_search_sigma(d, config.perplexity);
    // Perplexity of the Gaussian at the returned bandwidth, recomputed here.
    const double dmin = *std::min_element(d.begin(), d.end());
    double z = 0.0, h = 0.0;
    std::vector<double> w(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) z += w[j] = std::exp(-(d[j] - dmin) / (2 * search.sigma * search.sigma));
    for (double v : w) {
      const double p = v / z;
      if (p > 0) h -= p * std::log(p);
    }
    worst_perp = std::max(worst_perp, std::abs(std::exp(h) - config.perplexity));
  }

  const nn::Matrix p = tsne::pairwise_affinities(x, config.perplexity);
  double asym = 0.0, total = 0.0, diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diag = std::max(diag, std::abs(p(i, i)));
    for (std::size_t j = 0; j < n; ++j) {
      asym = std::max(asym, std::abs(p(i, j) - p(j, i)));
      total += p(i, j);
    }
  }
  const auto result = tsne::run_tsne(x, config);
  const auto first_after =
      std::find_if(result.kl_trace.begin(), result.kl_trace.end(),
                   [&](const tsne::KlRecord& r) { return r.iteration > config.exaggeration_iterations; });
  const bool kl_ok = first_after != result.kl_trace.end() && result.kl_trace.back().kl < first_after->kl;

  const bool pass = worst_perp <= 1e-3 && asym <= 1e-12 && std::abs(total - 1.0) <= 1e-10 && diag == 0.0 && kl_ok;
  report(4, pass, "t-SNE on 200 x 16 seeded normal matrix",
         fmt("max |perplexity - 30| %.2e (<= 1e-3); max |P - P^T| %.1e (<= 1e-12); |sum P - 1| %.1e (<= 1e-10); "
             "max |diag| %.1e; KL at %zu = %.5f -> final %.5f",
             worst_perp, asym, std::abs(total - 1.0), diag,
             first_after != result.kl_trace.end() ? first_after->iteration : std::size_t{0},
             first_after != result.kl_trace.end() ? first_after->kl : 0.0, result.kl_trace.back().kl));
}

void tsne_clusters(const FixtureRun& run) {
  const Corpus& test = run.split.test;
  const nn::Matrix vectors = embed::embed_corpus(test, *run.mlp->table());
  const auto result = tsne::run_tsne(vectors, {});
  const std::size_t L = test.labels.size();

  std::vector<std::array<double, 2>> centroid(L, {0.0, 0.0});
  std::vector<std::size_t> count(L, 0);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto l = test.documents[i].label;
    centroid[l][0] += result.points(i, 0);
    centroid[l][1] += result.points(i, 1);
    ++count[l];
  }
  for (std::size_t l = 0; l < L; ++l) {
    centroid[l][0] /= static_cast<double>(count[l]);
    centroid[l][1] /= static_cast<double>(count[l]);
  }
  std::vector<double> intra(L, 0.0);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto l = test.documents[i].label;
    intra[l] += std::hypot(result.points(i, 0) - centroid[l][0], result.points(i, 1) - centroid[l][1]);
  }
  std::size_t separated = 0;
  std::string worst;
  double worst_ratio = 1e300;
  for (std::size_t l = 0; l < L; ++l) {
    intra[l] /= static_cast<double>(count[l]);
    double inter = 0.0;
    for (std::size_t m = 0; m < L; ++m) {
      if (m != l) inter += std::hypot(centroid[l][0] - centroid[m][0], centroid[l][1] - centroid[m][1]);
    }
    inter /= static_cast<double>(L - 1);
    const double ratio = inter / intra[l];
    if (ratio > 2.0) ++separated;
    if (ratio < worst_ratio) {
      worst_ratio = ratio;
      worst = test.labels.code(l);
    }
  }
  report(5, separated >= 14, "2-D t-SNE clusters of trained hashed-16 vectors (680 test documents)",
         fmt("%zu of %zu languages with inter/intra > 2 (need >= 14); lowest ratio %.2f (%s)", separated, L,
             worst_ratio, worst.c_str()));
}

void determinism(const fs::path& work, const fs::path& train_csv, const fs::path& test_csv) {
  const auto once = [&](const std::string& tag) {
    const fs::path dir = work / tag;
    fs::create_directories(dir);
    const std::vector<std::pair<std::string, std::vector<std::string>>> models{
        {"mlp", {"--model", "mlp", "--epochs", "3"}},
        {"cnn", {"--model", "cnn", "--epochs", "2"}},
        {"ngram", {"--model", "ngram"}}};
    std::vector<std::string> bytes;
    for (const auto& [name, flags] : models) {
      std::vector<std::string> args{"train", train_csv.string()};
      args.insert(args.end(), flags.begin(), flags.end());
      args.insert(args.end(), {"--seed", "42", "--out", (dir / (name + ".json")).string()});
      if (cli(args) != 0) return std::vector<std::string>{};
      if (cli({"evaluate", (dir / (name + ".json")).string(), test_csv.string(), "--out",
               (dir / (name + ".eval.json")).string()}) != 0) {
        return std::vector<std::string>{};
      }
      for (const char* suffix : {".json", ".trace.csv", ".eval.json", ".eval.confusion.csv"}) {
        const fs::path p = dir / (name + suffix);
        bytes.push_back(fs::exists(p) ? slurp(p) : std::string("<absent>"));
      }
    }
    return bytes;
  };
  const auto a = once("run_a");
  const auto b = once("run_b");
  const bool pass = !a.empty() && a == b;
  std::size_t compared = 0;
  for (const auto& s : a) compared += s == "<absent>" ? 0 : 1;
  report(6, pass, "determinism of train + evaluate",
         fmt("%zu artifacts (models, traces, reports, confusion matrices) %s across two runs", compared,
             pass ? "byte-identical" : "DIFFER"));
}

void persistence(const fs::path& work, FixtureRun& run) {
  // Random inputs drawn from the fixture's character inventory.
  std::set<std::string> inventory;
  for (const auto& doc : run.split.train.documents) {
    for (auto& cp : split_code_points(doc.text)) inventory.insert(cp);
  }
  const std::vector<std::string> chars(inventory.begin(), inventory.end());
  std::mt19937_64 rng(42);
  std::vector<std::string> inputs;
  while (inputs.size() < 100) {
    std::string s;
    for (std::size_t i = 0, n = 1 + rng() % 60; i < n; ++i) s += chars[rng() % chars.size()];
    if (!normalize_text(s).empty()) inputs.push_back(s);
  }

  models::Classifier lstm({.kind = models::ModelKind::lstm}, run.split.train.labels);
  const auto examples = models::examples_from_corpus(lstm, run.split.train);
  models::TrainConfig one_epoch;
  one_epoch.epochs = 1;
  std::vector<std::pair<std::string, const models::Classifier*>> neural{{"mlp", &*run.mlp}, {"cnn", &*run.cnn}};
  const auto trained_lstm = models::train(std::move(lstm), examples, one_epoch).model;
  neural.emplace_back("lstm", &trained_lstm);

  std::vector<std::string> notes;
  bool pass = true;
  for (const auto& [name, model] : neural) {
    const fs::path path = work / ("persist_" + name + ".json");
    spit(path, model->to_json());
    const auto loaded = models::Classifier::from_json(slurp(path));
    std::size_t same = 0;
    for (const auto& text : inputs) {
      same += same_bits(model->predict(model->featurize(text)).probabilities,
                        loaded.predict(loaded.featurize(text)).probabilities);
    }
    pass = pass && same == inputs.size();
    notes.push_back(fmt("%s %zu/100", name.c_str(), same));
  }
  {
    const fs::path path = work / "persist_ngram.json";
    spit(path, ngram::to_json(*run.detector));
    const auto loaded = ngram::detector_from_json(slurp(path));
    std::size_t same = 0;
    for (const auto& text : inputs) {
      const auto a = ngram::detect(text, *run.detector);
      const auto b = ngram::detect(text, loaded);
      same += a.language == b.language && a.distance == b.distance;
    }
    pass = pass && same == inputs.size();
    notes.push_back(fmt("ngram %zu/100", same));
  }
  std::string detail = "bit-exact predictions after save/load:";
  for (const auto& n : notes) detail += " " + n;
  report(7, pass, "persistence round trip, all four model kinds", detail);
}

void external_path(const fs::path& work, const fs::path& train_csv, const fs::path& test_csv) {
  const fs::path dir = work / "table";
  fs::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  bool ok = cli({"embed", train_csv.string(), "--project", "384", "--seed", "42", "--out", p("train.384.csv")}) == 0 &&
            cli({"embed", test_csv.string(), "--project", "384", "--seed", "42", "--out", p("test.384.csv")}) == 0;

  std::vector<std::string> evals;
  const auto run_one = [&](const std::string& stem, std::vector<std::string> train_flags,
                           std::vector<std::string> eval_flags) {
    if (!ok) return;
    std::vector<std::string> args{"train", train_csv.string()};
    args.insert(args.end(), train_flags.begin(), train_flags.end());
    args.insert(args.end(), {"--out", p(stem + ".json")});
    std::vector<std::string> ev{"evaluate", p(stem + ".json"), test_csv.string()};
    ev.insert(ev.end(), eval_flags.begin(), eval_flags.end());
    ev.insert(ev.end(), {"--out", p(stem + ".eval.json")});
    ok = cli(args) == 0 && cli(ev) == 0;
    evals.push_back(p(stem + ".eval.json"));
  };
  run_one("ngram3", {"--model", "ngram"}, {"--name", "NGram-3/300"});
  run_one("ngram5", {"--model", "ngram", "--ngram-max", "5", "--ngram-cap", "1000"}, {"--name", "NGram-5/1000"});
  for (const std::string kind : {"mlp", "lstm", "cnn"}) {
    run_one(kind + "_hashed", {"--model", kind, "--embed", "hashed:16"}, {});
    run_one(kind + "_external", {"--model", kind, "--embed", "external:" + p("train.384.csv")},
            {"--embed", "external:" + p("test.384.csv")});
  }
  std::vector<std::string> args{"report"};
  args.insert(args.end(), evals.begin(), evals.end());
  args.insert(args.end(), {"--out", p("comparative.csv")});
  ok = ok && cli(args) == 0;

  bool shape = false;
  std::string detail = "pipeline failed";
  if (ok) {
    const auto rows = table_from_csv(slurp(p("comparative.csv")));
    const std::vector<std::pair<std::string, std::string>> expected{
        {"NGram-3/300", "-"}, {"NGram-5/1000", "-"}, {"MLP", "Hashed"}, {"MLP", "External"},
        {"LSTM", "Hashed"},   {"LSTM", "External"},  {"CNN", "Hashed"}, {"CNN", "External"}};
    shape = rows.size() == expected.size();
    for (std::size_t i = 0; shape && i < rows.size(); ++i) {
      const bool dim_ok = rows[i].embedding == "-" ? !rows[i].dim
                                                    : rows[i].dim == (rows[i].embedding == "Hashed" ? 16u : 384u);
      shape = rows[i].classifier == expected[i].first && rows[i].embedding == expected[i].second && dim_ok;
    }
    const std::string text = slurp(p("comparative.txt"));
    shape = shape && std::count(text.begin(), text.end(), '\n') == 9;
    double mlp_external = 0.0;
    for (const auto& r : rows) {
      if (r.classifier == "MLP" && r.embedding == "External") mlp_external = r.report.f1;
    }
    detail = fmt("%zu rows in table order, header and dims %s; MLP external-384 F1 %.5f", rows.size(),
                 shape ? "as expected" : "WRONG", mlp_external);
    std::printf("%s", text.c_str());
  }
  report(8, ok && shape, "external 384-d embeddings and comparative report", detail);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "lidlab_acceptance";
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--workdir") work = argv[i + 1];
  }
  fs::remove_all(work);
  fs::create_directories(work);

  try {
    gradient_checks();
    metrics_oracle();
    FixtureRun run;
    fixture_accuracy(run);
    tsne_properties();
    tsne_clusters(run);

    const fs::path train_csv = work / "fixture.train.csv";
    const fs::path test_csv = work / "fixture.test.csv";
    write_csv(run.split.train, train_csv);
    write_csv(run.split.test, test_csv);
    determinism(work, train_csv, test_csv);
    persistence(work, run);
    external_path(work, train_csv, test_csv);
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
