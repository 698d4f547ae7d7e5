#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cqarank/corpus.hpp"
#include "cqarank/regressor.hpp"
#include "cqarank/topicmodel.hpp"

namespace cqarank {

/// Topic distributions of archived pairs, one row per pair id.
class TopicIndex {
 public:
  TopicIndex() = default;
  TopicIndex(std::vector<std::string> ids, std::vector<double> rows, std::size_t dimension, std::string model_hash);

  /// Index over every theta row of a trained model.
  static TopicIndex from_model(const TopicModel& model, std::string model_hash);

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(rows_).subspan(r * dimension_, dimension_);
  }
  double norm(std::size_t r) const { return norms_[r]; }
  const std::string& model_hash() const { return model_hash_; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> rows_;
  std::vector<double> norms_;
  std::size_t dimension_ = 0;
  std::string model_hash_;
};

struct RankedEntry {
  std::string pair_id;
  double score = 0.0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;  // score descending, ties by ascending pair id
  bool low_confidence = false;       // query had no in-vocabulary tokens
};

/// Cosine similarity of `query` against every row; the top_k best in order.
/// top_k <= 0 yields an empty list; top_k beyond the index size returns all.
RankedList rank(const TopicIndex& index, std::span<const double> query, int top_k);

/// How the query distribution is produced and compared.
enum class RankMode {
  kRegression,    // Q-model inference -> regressor -> rank against the QA index
  kQModelDirect,  // Q-model inference, rank against the Q index (no regression)
  kQaModelDirect  // infer the query directly under the QA model, rank against the QA index
};

struct QueryResources {
  const Vocabulary* q_vocabulary = nullptr;
  const TopicModel* q_model = nullptr;
  const Neighborhoods* q_neighborhoods = nullptr;  // null for plain models
  const Vocabulary* qa_vocabulary = nullptr;
  const TopicModel* qa_model = nullptr;
  const Neighborhoods* qa_neighborhoods = nullptr;
  const Mlp* mlp = nullptr;
  const TopicIndex* qa_index = nullptr;
  const TopicIndex* q_index = nullptr;
  const StopwordSet* stopwords = nullptr;
  const Normalizer* normalizer = nullptr;
};

struct QueryOptions {
  RankMode mode = RankMode::kRegression;
  int top_k = 10;
  int particles = 20;
  std::uint64_t seed = 1;
};

/// normalize -> left-to-right inference -> (regressor) -> rank.
RankedList query_pipeline(std::string_view query_id, std::string_view text, const QueryResources& res,
                          const QueryOptions& opts);

void save_index(const TopicIndex& index, const std::filesystem::path& path);
/// Rejects an index built from a model other than `expected_model_hash`.
TopicIndex load_index(const std::filesystem::path& path, const std::string& expected_model_hash);

}  // namespace cqarank
