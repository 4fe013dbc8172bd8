#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli/commands.hpp"

namespace fs = std::filesystem;
using lidlab::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome lidlab_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("lidlab_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (scratch() / name).string(); }

void write(const std::string& name, const std::string& text) { std::ofstream(at(name), std::ios::binary) << text; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void make_split() {
  if (fs::exists(at("s.train.csv"))) return;
  REQUIRE(lidlab_cli({"fixture", "--languages", "5", "--docs", "40", "--out", at("fx.csv")}).code == 0);
  REQUIRE(lidlab_cli({"split", at("fx.csv"), "--out", at("s")}).code == 0);
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  CHECK(lidlab_cli({}).code == 2);
  CHECK(lidlab_cli({"frobnicate"}).code == 2);
  CHECK(lidlab_cli({"train", "x.csv"}).code == 2);  // --out is required
  CHECK(lidlab_cli({"--help"}).code == 0);
}

TEST_CASE("ingest: report, schema errors and missing files") {
  write("raw.csv", "Text,Language\n\"Hello,  World\",en\n  ,fr\nBonjour,fr\n");
  const auto ok = lidlab_cli({"ingest", at("raw.csv"), "--out", at("clean.csv")});
  CHECK(ok.code == 0);
  const auto report = nlohmann::json::parse(ok.out);
  CHECK(report["rows_kept"] == 2);
  CHECK(report["rows_skipped"] == 1);
  CHECK(slurp(at("clean.csv")) == "Text,Language\n\"hello, world\",en\nbonjour,fr\n");
  CHECK(fs::exists(at("clean.csv.manifest.json")));

  write("bad.csv", "Text,Lang\na,b\n");
  const auto bad = lidlab_cli({"ingest", at("bad.csv"), "--out", at("x.csv")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("Language") != std::string::npos);
  CHECK(lidlab_cli({"ingest", at("missing.csv"), "--out", at("x.csv")}).code == 1);
}

TEST_CASE("train, detect and evaluate with the ngram detector") {
  make_split();
  const auto tr = lidlab_cli({"train", at("s.train.csv"), "--model", "ngram", "--embed", "hashed:16", "--out",
                              at("ng.json")});
  CHECK(tr.code == 0);
  CHECK(tr.err.find("ignored") != std::string::npos);
  const auto d = lidlab_cli({"detect", at("ng.json"), "--text", "  "});
  CHECK(d.code == 0);
  CHECK(d.out == "-\t-\n");
  write("empty.txt", "");
  const auto none = lidlab_cli({"detect", at("ng.json"), "--input", at("empty.txt")});
  CHECK(none.code == 0);
  CHECK(none.out.empty());
  CHECK(lidlab_cli({"evaluate", at("ng.json"), at("s.test.csv"), "--out", at("ng.eval.json")}).code == 0);
  CHECK(fs::exists(at("ng.eval.confusion.csv")));
}

TEST_CASE("neural training, manifests and traces") {
  make_split();
  const auto tr = lidlab_cli({"train", at("s.train.csv"), "--model", "mlp", "--epochs", "2", "--buckets", "4096",
                              "--out", at("mlp.json")});
  REQUIRE(tr.code == 0);
  const auto manifest = nlohmann::json::parse(slurp(at("mlp.json.manifest.json")));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["seed"] == 42);
  CHECK(manifest["config"]["buckets"] == 4096);
  CHECK(slurp(at("mlp.trace.csv")).rfind("epoch,train_loss,train_acc,val_loss,val_acc\n", 0) == 0);

  const auto d = lidlab_cli({"detect", at("mlp.json"), "--text", "hello there"});
  CHECK(d.code == 0);
  CHECK(d.out.find('\t') != std::string::npos);

  CHECK(lidlab_cli({"evaluate", at("mlp.json"), at("s.test.csv"), "--out", at("mlp.eval.json")}).code == 0);
  CHECK(lidlab_cli({"train", at("s.train.csv"), "--model", "ngram", "--out", at("ng2.json")}).code == 0);
  CHECK(lidlab_cli({"evaluate", at("ng2.json"), at("s.test.csv"), "--out", at("ng2.eval.json")}).code == 0);
  const auto rep = lidlab_cli({"report", at("mlp.eval.json"), at("ng2.eval.json"), "--out", at("table.csv")});
  CHECK(rep.code == 0);
  CHECK(rep.out.rfind("Classifier", 0) == 0);
  CHECK(rep.out.find("NGram") < rep.out.find("MLP"));
}

TEST_CASE("corrupt inputs exit 2") {
  make_split();
  write("garbage.json", "{\"format\": \"lidlab-model\"");
  CHECK(lidlab_cli({"detect", at("garbage.json"), "--text", "x"}).code == 2);
  write("future.json", R"({"format":"lidlab-model","version":99,"kind":"mlp"})");
  const auto v = lidlab_cli({"detect", at("future.json"), "--text", "x"});
  CHECK(v.code == 2);
  CHECK(v.err.find("version") != std::string::npos);
  write("eval_bad.json", "[1,2");
  const auto r = lidlab_cli({"report", at("eval_bad.json"), "--out", at("t2.csv")});
  CHECK(r.code == 2);
  CHECK(r.err.find("eval_bad.json") != std::string::npos);

  write("short.csv", "0.1,0.2\n");
  const auto ext = lidlab_cli({"train", at("s.train.csv"), "--embed", "external:" + at("short.csv"), "--out",
                               at("ext.json")});
  CHECK(ext.code == 2);
  CHECK(ext.err.find("1 rows") != std::string::npos);
}

TEST_CASE("tsne rejects an infeasible perplexity and names the bound") {
  std::string rows;
  for (int i = 0; i < 10; ++i) rows += std::to_string(i) + "," + std::to_string(i % 3) + "\n";
  write("pts.csv", rows);
  const auto bad = lidlab_cli({"tsne", at("pts.csv"), "--perplexity", "30", "--out", at("y.csv")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("(N - 1) / 3 = 3") != std::string::npos);
  const auto ok = lidlab_cli({"tsne", at("pts.csv"), "--perplexity", "2", "--iterations", "60", "--out", at("y.csv")});
  CHECK(ok.code == 0);
  CHECK(slurp(at("y.kl.csv")).rfind("iteration,kl\n50,", 0) == 0);
}

TEST_CASE("LIDLAB_SEED sets the default seed") {
  make_split();
  ::setenv("LIDLAB_SEED", "7", 1);
  const auto a = lidlab_cli({"split", at("fx.csv"), "--out", at("env")});
  const auto b = lidlab_cli({"split", at("fx.csv"), "--seed", "7", "--out", at("flag")});
  ::unsetenv("LIDLAB_SEED");
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(slurp(at("env.train.csv")) == slurp(at("flag.train.csv")));
  CHECK(slurp(at("env.train.csv")) != slurp(at("s.train.csv")));
}
