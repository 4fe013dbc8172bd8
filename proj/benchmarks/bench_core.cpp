#include <random>

#include <benchmark/benchmark.h>

#include "lidlab/embed.hpp"
#include "lidlab/fixture.hpp"
#include "lidlab/ngram_detector.hpp"
#include "lidlab/nn.hpp"
#include "lidlab/tsne.hpp"

using namespace lidlab;

namespace {

const Corpus& fixture() {
  static const Corpus corpus = generate_fixture({});
  return corpus;
}

nn::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  nn::Rng rng(seed);
  std::normal_distribution<double> normal;
  nn::Matrix m(rows, cols);
  for (auto& v : m.values()) v = normal(rng);
  return m;
}

void BM_NgramDetect(benchmark::State& state) {
  const auto model = ngram::train_detector(fixture(), 3, static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ngram::detect(fixture().documents[i++ % fixture().size()].text, model));
  }
}
BENCHMARK(BM_NgramDetect)->Arg(300)->Arg(1000);

void BM_EmbedDocument(benchmark::State& state) {
  const embed::EmbeddingTable table(static_cast<std::size_t>(state.range(0)), embed::kDefaultBuckets, {}, 42);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(embed::embed_document(fixture().documents[i++ % fixture().size()].text, table));
  }
}
BENCHMARK(BM_EmbedDocument)->Arg(16)->Arg(64);

void BM_DenseForward(benchmark::State& state) {
  nn::Rng rng(1);
  const nn::Dense layer(64, 64, nn::Activation::relu, rng);
  const auto x = random_matrix(1, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(x.row(0)));
}
BENCHMARK(BM_DenseForward);

void BM_LstmForward(benchmark::State& state) {
  nn::Rng rng(1);
  const nn::LstmCell cell(16, 64, rng);
  const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cell.forward(x));
}
BENCHMARK(BM_LstmForward)->Arg(8)->Arg(64);

void BM_ConvForward(benchmark::State& state) {
  nn::Rng rng(1);
  const nn::Conv1d conv(16, 3, 64, rng);
  const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x));
}
BENCHMARK(BM_ConvForward)->Arg(8)->Arg(64);

void BM_TsneAffinities(benchmark::State& state) {
  const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 16, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tsne::pairwise_affinities(x, 30.0));
}
BENCHMARK(BM_TsneAffinities)->Arg(200)->Arg(680)->Unit(benchmark::kMillisecond);

void BM_TsneIterations(benchmark::State& state) {
  const auto x = random_matrix(200, 16, 4);
  tsne::TsneConfig config;
  config.iterations = 50;
  for (auto _ : state) benchmark::DoNotOptimize(tsne::run_tsne(x, config));
}
BENCHMARK(BM_TsneIterations)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
