#pragma once

// Gibbs sampler fixtures shared by the unit and acceptance tests.

#include <string>
#include <vector>

#include "cqarank/embeddings.hpp"
#include "cqarank/topicmodel.hpp"
#include "gibbs_oracle.hpp"

namespace testing_support::gibbs {

using namespace cqarank;

// 3 documents over 8 words, T = 3.
inline oracle::GibbsFixture small_fixture() {
  oracle::GibbsFixture f;
  f.topics = 3;
  f.vocab = 8;
  f.alpha = 35.0 / 3;
  f.beta = 0.01;
  f.lambda = 0.9;
  f.tau = 0.5;
  f.docs = {{0, 1, 2, 1, 3}, {4, 5, 6, 7, 4, 0}, {2, 2, 7, 5, 1, 6, 3}};
  f.vectors = {{1.0, 0.1, 0.0},  {0.9, 0.3, 0.1}, {0.2, 1.0, 0.0}, {0.1, 0.9, 0.4},
               {0.0, 0.1, 1.0},  {0.3, 0.0, 0.9}, {}, {0.7, 0.7, 0.1}};
  return f;
}

inline EmbeddingTable table_of(const oracle::GibbsFixture& f) {
  EmbeddingTable t(static_cast<std::size_t>(f.vocab), 3);
  for (int w = 0; w < f.vocab; ++w) {
    if (!f.vectors[w].empty()) t.set_vector(w, f.vectors[w]);
  }
  return t;
}

inline std::vector<std::vector<TokenId>> docs_of(const oracle::GibbsFixture& f) {
  std::vector<std::vector<TokenId>> out;
  for (const auto& d : f.docs) out.emplace_back(d.begin(), d.end());
  return out;
}

inline Hyperparams hp_of(const oracle::GibbsFixture& f, double lambda, int sweeps = 1, std::uint64_t seed = 7) {
  Hyperparams hp;
  hp.topics = f.topics;
  hp.alpha = f.alpha;
  hp.beta = f.beta;
  hp.lambda = lambda;
  hp.sweeps = sweeps;
  hp.seed = seed;
  return hp;
}

inline std::vector<std::vector<int>> snapshot(const CountState& s) {
  std::vector<std::vector<int>> z;
  for (const auto& row : s.assignments) z.emplace_back(row.begin(), row.end());
  return z;
}

inline DocumentCollection collection_of(const std::vector<std::vector<TokenId>>& docs, std::size_t vocab) {
  DocumentCollection c;
  for (std::size_t w = 0; w < vocab; ++w) c.vocabulary.add("w" + std::string(w + 1, 'x'));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    Document doc;
    doc.doc_id = static_cast<std::int32_t>(d);
    doc.tokens = docs[d];
    doc.source_pair = "p" + std::to_string(d);
    c.documents.push_back(doc);
  }
  return c;
}

// Two words of one document, T = 2, V = 3, with fixed assignments. The
// frozen values come from tests/oracle/tiny_fixture.py.

inline constexpr double kFrozenMasses[2][2] = {
    {0.1867796558950984, 0.04452370904639301},
    {0.05705723638564969, 0.19453232044178026},
};
inline constexpr double kFrozenModifiedPhi[2][3] = {
    {0.37123254544656087, 0.42509429750307887, 0.20367315705036038},
    {0.29939853450678017, 0.4377016833074829, 0.26289978218573706},
};

struct TinyFixture {
  Hyperparams hp;
  CountState state{2, 3, 1};
  Neighborhoods nb;

  TinyFixture() {
    hp.topics = 2;
    hp.alpha = 0.5;
    hp.beta = 0.01;
    hp.lambda = 0.9;
    EmbeddingTable t(3, 2);
    const std::vector<double> v0{1.0, 0.0}, v1{0.8, 0.6}, v2{0.0, 1.0};
    t.set_vector(0, v0);
    t.set_vector(1, v1);
    t.set_vector(2, v2);
    nb = build_neighborhoods(t, 0.5, 20);
    state.assignments[0] = {0, 1};
    add(0, 0);
    add(1, 1);
  }
  void add(TokenId w, int t, int delta = 1) {
    state.nwt(w, t) += delta;
    state.ntd(0, t) += delta;
    state.topic_total[static_cast<std::size_t>(t)] += delta;
  }
};

}  // namespace testing_support::gibbs
