#include "cqarank/topicmodel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cqarank/error.hpp"
#include "cqarank/synthetic.hpp"
#include "gibbs_fixtures.hpp"
#include "gibbs_oracle.hpp"
#include "test_support.hpp"

using namespace cqarank;
using testing_support::TempDir;
using namespace testing_support::gibbs;

namespace {

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(Hyperparams, DefaultsAndValidation) {
  auto hp = Hyperparams::for_topics(140);
  EXPECT_DOUBLE_EQ(hp.alpha, 0.25);
  EXPECT_DOUBLE_EQ(hp.beta, 0.01);
  EXPECT_DOUBLE_EQ(hp.lambda, 0.9);
  EXPECT_NO_THROW(hp.validate());
  hp.topics = 1;
  EXPECT_THROW(hp.validate(), ConfigError);
  hp = Hyperparams::for_topics(4);
  hp.lambda = 1.5;
  EXPECT_THROW(hp.validate(), ConfigError);
  hp.lambda = 0.5;
  hp.beta = 0;
  EXPECT_THROW(hp.validate(), ConfigError);
}

TEST(Conditional, LambdaOneReducesToStandardGibbsEveryToken) {
  const auto f = small_fixture();
  const auto docs = docs_of(f);
  const auto nb = build_neighborhoods(table_of(f), f.tau, 20);
  for (const Neighborhoods* with : {&nb, static_cast<const Neighborhoods*>(nullptr)}) {
    GibbsSampler sampler(docs, 8, hp_of(f, 1.0), with);
    std::size_t checked = 0;
    sampler.set_observer([&](const SampleEvent& e) {
      auto z = snapshot(*e.state);
      const auto expected = oracle::plain_conditional(f, z, static_cast<int>(e.doc), static_cast<int>(e.position));
      for (int t = 0; t < 3; ++t) EXPECT_NEAR(e.masses[t], expected[t], 1e-12);
      ++checked;
    });
    sampler.sweep();
    EXPECT_EQ(checked, 18u);
  }
}

TEST(Conditional, AugmentedMatchesBruteForceEveryTokenOverSeveralSweeps) {
  const auto f = small_fixture();
  const auto docs = docs_of(f);
  const auto nb = build_neighborhoods(table_of(f), f.tau, 20);
  GibbsSampler sampler(docs, 8, hp_of(f, f.lambda), &nb);
  std::vector<std::vector<int>> start;
  std::size_t checked = 0;
  sampler.set_observer([&](const SampleEvent& e) {
    auto z = snapshot(*e.state);
    const auto expected = oracle::conditional(f, z, static_cast<int>(e.doc), static_cast<int>(e.position), start, true);
    for (int t = 0; t < 3; ++t) EXPECT_NEAR(e.masses[t], expected[t], 1e-12);
    ++checked;
  });
  for (int s = 0; s < 5; ++s) {
    start = snapshot(sampler.state());
    sampler.sweep();
  }
  EXPECT_EQ(checked, 5u * 18u);
}

TEST(Conditional, EmptyCountsGiveUniformMass) {
  const auto f = small_fixture();
  const auto nb = build_neighborhoods(table_of(f), f.tau, 20);
  CountState empty(3, 8, 1);
  const auto norms = topic_normalizers(TopicCounts::of(empty), nb);
  for (TokenId w = 0; w < 8; ++w) {
    for (const Neighborhoods* with : {&nb, static_cast<const Neighborhoods*>(nullptr)}) {
      auto m = conditional_topic_probs(empty, hp_of(f, 0.9), 0, w, with, norms);
      EXPECT_DOUBLE_EQ(m[0], m[1]);
      EXPECT_DOUBLE_EQ(m[1], m[2]);
      EXPECT_GT(m[0], 0.0);
    }
  }
}

TEST(Train, SingleTokenDocumentTheta) {
  DocumentCollection c = collection_of({{0}}, 1);
  Hyperparams hp = Hyperparams::for_topics(2);
  hp.sweeps = 1;
  const auto m = train(c, hp, nullptr);
  const double a = hp.alpha;
  const double hi = (1 + a) / (1 + 2 * a), lo = a / (1 + 2 * a);
  const auto th = m.theta_row(0);
  EXPECT_TRUE((std::abs(th[0] - hi) < 1e-15 && std::abs(th[1] - lo) < 1e-15) ||
              (std::abs(th[0] - lo) < 1e-15 && std::abs(th[1] - hi) < 1e-15));
}

TEST(Train, SameSeedGivesIdenticalAssignmentHistory) {
  auto lda = generate_lda_corpus({});
  std::vector<std::vector<TokenId>> docs;
  for (const auto& d : lda.collection.documents) docs.push_back(d.tokens);
  Hyperparams hp = Hyperparams::for_topics(5);
  hp.seed = 99;
  GibbsSampler a(docs, 50, hp, nullptr), b(docs, 50, hp, nullptr);
  for (int s = 0; s < 20; ++s) {
    ASSERT_EQ(a.state().assignments, b.state().assignments) << "sweep " << s;
    a.sweep();
    b.sweep();
  }
  hp.seed = 100;
  GibbsSampler c(docs, 50, hp, nullptr);
  c.sweep();
  EXPECT_NE(a.state().assignments, c.state().assignments);
}

TEST(Train, CountsStayConsistentAfterEverySweep) {
  auto lda = generate_lda_corpus({.seed = 3, .topics = 4, .vocab_size = 30, .docs = 40, .doc_length = 20});
  std::vector<std::vector<TokenId>> docs;
  for (const auto& d : lda.collection.documents) docs.push_back(d.tokens);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g;
  EmbeddingTable t(30, 5);
  for (TokenId w = 0; w < 30; ++w) {
    std::vector<double> v(5);
    for (auto& x : v) x = g(gen);
    t.set_vector(w, v);
  }
  const auto nb = build_neighborhoods(t, 0.3, 10);
  GibbsSampler s(docs, 30, Hyperparams::for_topics(4), &nb);
  EXPECT_TRUE(s.state().consistent(docs));
  for (int i = 0; i < 30; ++i) {
    s.sweep();
    ASSERT_TRUE(s.state().consistent(docs)) << "after sweep " << i + 1;
  }
}

TEST(Train, DistributionsAreNormalized) {
  const auto f = small_fixture();
  const auto nb = build_neighborhoods(table_of(f), f.tau, 20);
  const auto m = train(collection_of(docs_of(f), 8), hp_of(f, f.lambda, 10), &nb);
  for (std::size_t d = 0; d < m.doc_count(); ++d) EXPECT_NEAR(sum(m.theta_row(d)), 1.0, 1e-9);
  for (int t = 0; t < m.topics(); ++t) {
    EXPECT_NEAR(sum(m.phi_row(t)), 1.0, 1e-9);
    const auto mod = modified_phi(m, t, nb);
    EXPECT_NEAR(sum(mod), 1.0, 1e-9);
    // lambda * phi + (1 - lambda) * phi' is itself a distribution.
    double mix = 0.0;
    for (std::size_t w = 0; w < 8; ++w) {
      const double v = f.lambda * m.phi_row(t)[w] + (1 - f.lambda) * mod[w];
      EXPECT_GE(v, 0.0);
      mix += v;
    }
    EXPECT_NEAR(mix, 1.0, 1e-9);
  }
}

TEST(ModifiedPhi, MatchesBruteForce) {
  const auto f = small_fixture();
  const auto nb = build_neighborhoods(table_of(f), f.tau, 20);
  const auto m = train(collection_of(docs_of(f), 8), hp_of(f, f.lambda, 3), &nb);
  const auto z = snapshot(m.counts);
  for (int t = 0; t < 3; ++t) {
    const auto got = modified_phi(m, t, nb);
    const auto expected = oracle::modified_phi(f, z, t);
    for (int w = 0; w < 8; ++w) EXPECT_NEAR(got[w], expected[w], 1e-12);
  }
}

TEST(ModifiedPhi, SingletonNeighborhoodsGiveSoftmax) {
  const auto f = small_fixture();
  const auto nb = build_neighborhoods(table_of(f), 0.9999, 20);
  const auto m = train(collection_of(docs_of(f), 8), hp_of(f, f.lambda, 2), &nb);
  for (int t = 0; t < 3; ++t) {
    const auto phi = m.phi_row(t);
    double z = 0;
    for (double p : phi) z += std::exp(p);
    const auto got = modified_phi(m, t, nb);
    for (int w = 0; w < 8; ++w) EXPECT_NEAR(got[w], std::exp(phi[w]) / z, 1e-15);
  }
}

TEST(ModifiedPhi, UniformPhiAndEqualSimsGiveNeighborhoodSizes) {
  TopicModel m;
  m.hyperparams = Hyperparams::for_topics(2);
  m.counts = CountState(2, 4, 0);
  m.phi.assign(8, 0.25);
  // Neighborhood sizes 1, 2, 3, 2 with a common similarity.
  Neighborhoods nb({{{0, 1.0}}, {{1, 1.0}, {2, 1.0}}, {{2, 1.0}, {1, 1.0}, {3, 1.0}}, {{3, 1.0}, {2, 1.0}}}, 0.5, 20);
  const auto got = modified_phi(m, 0, nb);
  const double sizes[] = {1, 2, 3, 2};
  for (int w = 0; w < 4; ++w) EXPECT_NEAR(got[w], sizes[w] / 8.0, 1e-15);
}

TEST(Train, EmptyDocumentsExcluded) {
  const auto m = train(collection_of({{0, 1}, {}, {1, 2}}, 3), Hyperparams::for_topics(2), nullptr);
  EXPECT_EQ(m.doc_pairs, (std::vector<std::string>{"p0", "p2"}));
  EXPECT_THROW(train(collection_of({{}, {}}, 3), Hyperparams::for_topics(2), nullptr), DataError);
}

TEST(Train, RecoversSyntheticTopics) {
  const auto lda = generate_lda_corpus({.seed = 1});
  Hyperparams hp = Hyperparams::for_topics(5);
  hp.sweeps = 500;
  hp.seed = 1;
  const auto m = train(lda.collection, hp, nullptr);
  EXPECT_GE(greedy_matched_cosine(m.phi, 5, lda.true_phi, 5, 50), 0.9);
}

TEST(Serialization, RoundTripIsByteStableAndChecksVocabulary) {
  TempDir dir;
  const auto f = small_fixture();
  const auto nb = build_neighborhoods(table_of(f), f.tau, 20);
  const auto coll = collection_of(docs_of(f), 8);
  const auto m = train(coll, hp_of(f, f.lambda, 4), &nb);
  save_topic_model(m, dir / "m.bin");
  const auto back = load_topic_model(dir / "m.bin", coll.vocabulary);
  EXPECT_EQ(serialize_topic_model(back), serialize_topic_model(m));
  EXPECT_EQ(back.content_hash(), m.content_hash());
  EXPECT_EQ(back.counts.assignments, m.counts.assignments);
  EXPECT_TRUE(back.augmented);

  Vocabulary other = coll.vocabulary;
  other.add("extra");
  try {
    load_topic_model(dir / "m.bin", other);
    FAIL();
  } catch (const StaleArtifactError& e) {
    EXPECT_EQ(e.stage(), "train-lda");
  }
}
