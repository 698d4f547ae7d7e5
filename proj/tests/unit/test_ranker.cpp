#include "cqarank/ranker.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cqarank/error.hpp"
#include "rank_oracle.hpp"
#include "test_support.hpp"

using namespace cqarank;
using testing_support::random_simplex;
using testing_support::TempDir;

namespace {

TopicIndex random_index(std::mt19937_64& gen, std::size_t rows, std::size_t dim) {
  std::vector<std::string> ids;
  std::vector<double> data;
  for (std::size_t r = 0; r < rows; ++r) {
    ids.push_back("pair-" + std::to_string(r));
    auto v = random_simplex(gen, dim);
    data.insert(data.end(), v.begin(), v.end());
  }
  std::shuffle(ids.begin(), ids.end(), gen);
  return TopicIndex(ids, data, dim, "hash");
}

std::vector<std::string> ids_of(const RankedList& l) {
  std::vector<std::string> out;
  for (const auto& e : l.entries) out.push_back(e.pair_id);
  return out;
}

}  // namespace

TEST(Rank, IndexedRowRanksFirstWithScoreOne) {
  std::mt19937_64 gen(1);
  const auto index = random_index(gen, 50, 6);
  const auto q = index.row(17);
  const auto l = rank(index, std::vector<double>(q.begin(), q.end()), 10);
  EXPECT_EQ(l.entries[0].pair_id, index.id(17));
  EXPECT_NEAR(l.entries[0].score, 1.0, 1e-15);
}

TEST(Rank, OrthogonalOneHotRows) {
  TopicIndex index({"a", "b", "c"}, {1, 0, 0, 0, 1, 0, 0, 0, 1}, 3, "h");
  const auto l = rank(index, std::vector<double>{0, 1, 0}, 10);
  ASSERT_EQ(l.entries.size(), 3u);
  EXPECT_EQ(l.entries[0], (RankedEntry{"b", 1.0}));
  EXPECT_EQ(l.entries[1], (RankedEntry{"a", 0.0}));
  EXPECT_EQ(l.entries[2], (RankedEntry{"c", 0.0}));
}

TEST(Rank, MatchesBruteForceOracle) {
  std::mt19937_64 gen(2);
  for (std::size_t rows : {5u, 100u, 1000u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto index = random_index(gen, rows, 8);
      const auto q = random_simplex(gen, 8);
      const auto got = rank(index, q, static_cast<int>(rows));
      const auto expected = oracle::rank_all(index, q);
      ASSERT_EQ(got.entries.size(), expected.size());
      for (std::size_t i = 0; i < rows; ++i) {
        EXPECT_EQ(got.entries[i].pair_id, expected[i].id) << "rows " << rows << " position " << i;
        EXPECT_NEAR(got.entries[i].score, expected[i].score, 1e-12);
      }
    }
  }
}

TEST(Rank, TiesBrokenByAscendingId) {
  TopicIndex index({"z", "m", "a", "q"}, {0.5, 0.5, 1, 0, 0.5, 0.5, 0.5, 0.5}, 2, "h");
  const auto l = rank(index, std::vector<double>{0.5, 0.5}, 4);
  EXPECT_EQ(ids_of(l), (std::vector<std::string>{"a", "q", "z", "m"}));
}

TEST(Rank, PositiveScalingLeavesRankingUnchanged) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> scale(1e-6, 1e6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto index = random_index(gen, 300, 7);
    auto q = random_simplex(gen, 7);
    const auto base = rank(index, q, 300);
    for (double a : {2.0, 0.5, 1024.0, scale(gen), scale(gen)}) {
      auto scaled = q;
      for (double& x : scaled) x *= a;
      const auto l = rank(index, scaled, 300);
      EXPECT_EQ(ids_of(l), ids_of(base));
    }
  }
}

TEST(Rank, TopKIsPrefixOfFullRanking) {
  std::mt19937_64 gen(4);
  const auto index = random_index(gen, 200, 5);
  const auto q = random_simplex(gen, 5);
  const auto full = rank(index, q, 200);
  for (int k : {1, 2, 7, 10, 50, 199, 200}) {
    const auto l = rank(index, q, k);
    ASSERT_EQ(l.entries.size(), static_cast<std::size_t>(k));
    EXPECT_TRUE(std::equal(l.entries.begin(), l.entries.end(), full.entries.begin()));
  }
  EXPECT_EQ(rank(index, q, 5000).entries.size(), 200u);
}

TEST(Rank, ScoresNonIncreasingWithoutDuplicates) {
  std::mt19937_64 gen(5);
  const auto index = random_index(gen, 500, 4);
  const auto l = rank(index, random_simplex(gen, 4), 500);
  for (std::size_t i = 1; i < l.entries.size(); ++i) EXPECT_GE(l.entries[i - 1].score, l.entries[i].score);
  auto ids = ids_of(l);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
}

TEST(Rank, ErrorsAndEdgeCases) {
  TopicIndex index({"a", "b"}, {1, 0, 0, 1}, 2, "h");
  EXPECT_TRUE(rank(index, std::vector<double>{1, 0}, 0).entries.empty());
  EXPECT_TRUE(rank(index, std::vector<double>{1, 0}, -3).entries.empty());
  EXPECT_THROW(rank(index, std::vector<double>{1, 0, 0}, 10), ConfigError);
  EXPECT_THROW(TopicIndex({"a", "a"}, {1, 0, 0, 1}, 2, "h"), DataError);
  EXPECT_THROW(TopicIndex({"a", "b"}, {1, 0, 0, 0}, 2, "h"), DataError);
  EXPECT_THROW(TopicIndex({"a"}, {1, 0, 0}, 2, "h"), DataError);
}

TEST(IndexFile, RoundTripAndModelCheck) {
  TempDir dir;
  std::mt19937_64 gen(6);
  const auto index = random_index(gen, 40, 3);
  save_index(index, dir / "idx.bin");
  const auto back = load_index(dir / "idx.bin", "hash");
  ASSERT_EQ(back.size(), index.size());
  for (std::size_t r = 0; r < index.size(); ++r) {
    EXPECT_EQ(back.id(r), index.id(r));
    EXPECT_TRUE(std::equal(back.row(r).begin(), back.row(r).end(), index.row(r).begin()));
  }
  try {
    load_index(dir / "idx.bin", "different");
    FAIL();
  } catch (const StaleArtifactError& e) {
    EXPECT_EQ(e.stage(), "index");
  }
}
