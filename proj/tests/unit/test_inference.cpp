#include <gtest/gtest.h>

#include <cmath>

#include "cqarank/embeddings.hpp"
#include "cqarank/error.hpp"
#include "cqarank/synthetic.hpp"
#include "cqarank/topicmodel.hpp"

using namespace cqarank;

namespace {

// One converged model shared by the tests in this file.
const TopicModel& converged() {
  static const TopicModel model = [] {
    const auto lda = generate_lda_corpus({.seed = 1});
    Hyperparams hp = Hyperparams::for_topics(5);
    hp.sweeps = 500;
    return train(lda.collection, hp, nullptr);
  }();
  return model;
}

const LdaCorpus& corpus() {
  static const LdaCorpus c = generate_lda_corpus({.seed = 1});
  return c;
}

double cos(std::span<const double> a, std::span<const double> b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return d / std::sqrt(na * nb);
}

}  // namespace

TEST(LeftToRight, EmptyInputGivesUniformWithDistinctStatus) {
  const auto r = infer_left_to_right(converged(), {}, 20, nullptr, 1);
  EXPECT_EQ(r.status, InferenceStatus::kNoKnownTokens);
  for (double v : r.theta) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(LeftToRight, AllOutOfVocabularyGivesUniform) {
  const std::vector<TokenId> oov{kOutOfVocabulary, kOutOfVocabulary, 5000};
  const auto r = infer_left_to_right(converged(), oov, 20, nullptr, 1);
  EXPECT_EQ(r.status, InferenceStatus::kNoKnownTokens);
  EXPECT_EQ(r.known_tokens, 0u);
  for (double v : r.theta) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(LeftToRight, OutOfVocabularyTokensAreSkipped) {
  const auto& doc = corpus().collection.documents[0].tokens;
  std::vector<TokenId> with_oov;
  for (TokenId w : doc) {
    with_oov.push_back(kOutOfVocabulary);
    with_oov.push_back(w);
  }
  const auto a = infer_left_to_right(converged(), doc, 8, nullptr, 3);
  const auto b = infer_left_to_right(converged(), with_oov, 8, nullptr, 3);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(b.known_tokens, doc.size());
  EXPECT_EQ(b.status, InferenceStatus::kOk);
}

TEST(LeftToRight, ReinferredTrainingDocumentsMatchTrainedTheta) {
  const auto& m = converged();
  const LeftToRightInferencer inf(m, nullptr);
  double total = 0;
  for (std::size_t d = 0; d < m.doc_count(); ++d) {
    const auto r = inf.infer(corpus().collection.documents[d].tokens, 20, d + 1);
    double s = 0;
    for (double v : r.theta) s += v;
    ASSERT_NEAR(s, 1.0, 1e-9);
    total += cos(r.theta, m.theta_row(d));
  }
  EXPECT_GE(total / static_cast<double>(m.doc_count()), 0.8);
}

TEST(LeftToRight, MoreParticlesReduceVariance) {
  const auto& tokens = corpus().collection.documents[3].tokens;
  auto spread = [&](int particles) {
    std::vector<std::vector<double>> runs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      runs.push_back(infer_left_to_right(converged(), tokens, particles, nullptr, seed * 7919).theta);
    }
    double var = 0;
    for (int t = 0; t < 5; ++t) {
      double mean = 0;
      for (const auto& r : runs) mean += r[t];
      mean /= 20;
      for (const auto& r : runs) var += (r[t] - mean) * (r[t] - mean);
    }
    return var / 20;
  };
  EXPECT_LT(spread(64), spread(1));
}

TEST(LeftToRight, DeterministicForSeedAndRejectsBadParticleCount) {
  const auto& tokens = corpus().collection.documents[0].tokens;
  EXPECT_EQ(infer_left_to_right(converged(), tokens, 5, nullptr, 42).theta,
            infer_left_to_right(converged(), tokens, 5, nullptr, 42).theta);
  EXPECT_THROW(infer_left_to_right(converged(), tokens, 0, nullptr, 1), ConfigError);
}

TEST(LeftToRight, AugmentedInferenceStaysOnSimplex) {
  EmbeddingTable t(50, 2);
  for (TokenId w = 0; w < 50; ++w) {
    const std::vector<double> v{std::cos(w * 0.1), std::sin(w * 0.1)};
    t.set_vector(w, v);
  }
  const auto nb = build_neighborhoods(t, 0.95, 10);
  Hyperparams hp = Hyperparams::for_topics(5);
  hp.sweeps = 50;
  const auto m = train(corpus().collection, hp, &nb);
  const auto r = infer_left_to_right(m, corpus().collection.documents[0].tokens, 10, &nb, 1);
  double s = 0;
  for (double v : r.theta) {
    EXPECT_GT(v, 0.0);
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-9);
}
