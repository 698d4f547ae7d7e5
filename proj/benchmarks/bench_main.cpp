// Micro benchmarks for the hot paths: one augmented Gibbs sweep, neighborhood
// construction, MLP forward pass and ranking against a 40k-row index.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "cqarank/embeddings.hpp"
#include "cqarank/random.hpp"
#include "cqarank/ranker.hpp"
#include "cqarank/regressor.hpp"
#include "cqarank/synthetic.hpp"
#include "cqarank/topicmodel.hpp"

namespace {

using namespace cqarank;

EmbeddingTable random_table(std::size_t vocab, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  EmbeddingTable t(vocab, dim);
  std::vector<double> v(dim);
  for (std::size_t w = 0; w < vocab; ++w) {
    for (double& x : v) x = g(gen);
    t.set_vector(static_cast<TokenId>(w), v);
  }
  return t;
}

std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t n) {
  std::gamma_distribution<double> g(0.5, 1.0);
  std::vector<double> v(n);
  double s = 0;
  for (double& x : v) s += (x = g(gen) + 1e-12);
  for (double& x : v) x /= s;
  return v;
}

void BM_GibbsSweep(benchmark::State& state) {
  const bool augmented = state.range(0) != 0;
  LdaCorpusParams p;
  p.topics = 20;
  p.vocab_size = 2000;
  p.docs = 1000;
  p.doc_length = 40;
  const auto lda = generate_lda_corpus(p);
  std::vector<std::vector<TokenId>> docs;
  for (const auto& d : lda.collection.documents) docs.push_back(d.tokens);
  const auto nb = build_neighborhoods(random_table(2000, 50, 3), 0.3, 20);
  Hyperparams hp = Hyperparams::for_topics(50);
  GibbsSampler sampler(docs, 2000, hp, augmented ? &nb : nullptr);
  for (auto _ : state) sampler.sweep();
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.docs * p.doc_length));
}
BENCHMARK(BM_GibbsSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BuildNeighborhoods(benchmark::State& state) {
  const auto table = random_table(static_cast<std::size_t>(state.range(0)), 100, 5);
  for (auto _ : state) benchmark::DoNotOptimize(build_neighborhoods(table, 0.3, 20));
}
BENCHMARK(BM_BuildNeighborhoods)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_MlpForward(benchmark::State& state) {
  const Mlp mlp = Mlp::glorot(140, 180, 160, 9);
  std::mt19937_64 gen(1);
  const auto x = random_simplex(gen, 140);
  for (auto _ : state) benchmark::DoNotOptimize(mlp.forward(x));
}
BENCHMARK(BM_MlpForward);

void BM_Rank40k(benchmark::State& state) {
  constexpr std::size_t kRows = 40000;
  constexpr std::size_t kDim = 160;
  std::mt19937_64 gen(2);
  std::vector<std::string> ids;
  std::vector<double> rows;
  rows.reserve(kRows * kDim);
  for (std::size_t r = 0; r < kRows; ++r) {
    ids.push_back("pair-" + std::to_string(r));
    const auto v = random_simplex(gen, kDim);
    rows.insert(rows.end(), v.begin(), v.end());
  }
  const TopicIndex index(std::move(ids), std::move(rows), kDim, "bench");
  const auto q = random_simplex(gen, kDim);
  for (auto _ : state) benchmark::DoNotOptimize(rank(index, q, 10));
}
BENCHMARK(BM_Rank40k)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
