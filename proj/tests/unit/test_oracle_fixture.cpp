#include <gtest/gtest.h>

#include "cqarank/topicmodel.hpp"
#include "gibbs_fixtures.hpp"

using namespace cqarank;
using namespace testing_support::gibbs;

TEST(TinyFixture, ConditionalMassesMatchFrozenOracle) {
  TinyFixture f;
  const auto norms = topic_normalizers(TopicCounts::of(f.state), f.nb);
  const TokenId doc[2] = {0, 1};
  for (int n = 0; n < 2; ++n) {
    const int z = f.state.assignments[0][static_cast<std::size_t>(n)];
    f.add(doc[n], z, -1);
    const auto m = conditional_topic_probs(f.state, f.hp, 0, doc[n], &f.nb, norms);
    f.add(doc[n], z, +1);
    for (int t = 0; t < 2; ++t) EXPECT_NEAR(m[t], kFrozenMasses[n][t], 1e-12) << "n=" << n << " t=" << t;
  }
}

TEST(TinyFixture, ModifiedPhiMatchesFrozenOracle) {
  TinyFixture f;
  TopicModel model;
  model.hyperparams = f.hp;
  model.counts = f.state;
  model.phi = estimate_phi(f.state, f.hp);
  for (int t = 0; t < 2; ++t) {
    const auto got = modified_phi(model, t, f.nb);
    for (int w = 0; w < 3; ++w) EXPECT_NEAR(got[w], kFrozenModifiedPhi[t][w], 1e-12);
  }
}
