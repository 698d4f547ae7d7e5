#pragma once

// End-to-end training and query wiring shared by the ablation runner and the
// command line tool.

#include <optional>
#include <string>
#include <vector>

#include "cqarank/corpus.hpp"
#include "cqarank/embeddings.hpp"
#include "cqarank/evaluation.hpp"
#include "cqarank/ranker.hpp"
#include "cqarank/regressor.hpp"
#include "cqarank/topicmodel.hpp"

namespace cqarank {

struct SystemConfig {
  double tau = 0.7;
  std::size_t max_neighbors = 20;
  Hyperparams q_lda = Hyperparams::for_topics(140);
  Hyperparams qa_lda = Hyperparams::for_topics(160);
  TrainConfig regressor;
  int particles = 20;
  std::uint64_t inference_seed = 1;
  int top_k = 10;

  /// Stable hash over every field.
  std::string hash() const;
};

enum class Variant { kAugmented, kPlain };
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

/// Regressor training pairs: Q-model and QA-model theta rows joined on pair id.
std::vector<RegressionSample> regression_samples(const TopicModel& q_model, const TopicModel& qa_model);

struct TrainedSystem {
  Variant variant = Variant::kAugmented;
  TopicModel q_model;
  TopicModel qa_model;
  std::optional<Neighborhoods> q_neighborhoods;
  std::optional<Neighborhoods> qa_neighborhoods;
  Mlp mlp;
  TrainReport regressor_report;
  TopicIndex q_index;
  TopicIndex qa_index;
};

/// Trains both topic models (embedding-augmented when `variant` is
/// kAugmented, which requires `embeddings_text`), the regressor and both
/// indexes. The two topic models train concurrently.
TrainedSystem train_system(const Collections& collections, const std::string* embeddings_text,
                           const SystemConfig& config, Variant variant);

QueryResources query_resources(const TrainedSystem& system, const Collections& collections,
                               const StopwordSet& stopwords, const Normalizer& normalizer);

/// Deterministic per-query inference seed.
std::uint64_t query_seed(std::uint64_t base, std::string_view query_id);

struct Query {
  std::string id;
  std::string text;
};

/// Reads {"id", "text"} JSONL (a "body" field is accepted for "text").
std::vector<Query> load_queries(const std::filesystem::path& path);
std::vector<Query> parse_queries(std::string_view jsonl);

struct AblationConfig {
  SystemConfig system;
  std::vector<Method> methods{Method::kLdaPlus, Method::kLdaStar, Method::kLdaDagger};
  std::string category = "synthetic";
  /// Alternative reading of the no-regression ablation: infer the query
  /// under the QA model instead of ranking in Q-model space.
  bool dagger_uses_qa_model = false;
  int cutoff = kDefaultApCutoff;
};

/// Ranks every query with `system` in the given mode.
std::vector<RankedList> rank_queries(const TrainedSystem& system, const Collections& collections,
                                     const std::vector<Query>& queries, RankMode mode, const SystemConfig& config,
                                     const StopwordSet& stopwords, const Normalizer& normalizer);

RankMode mode_for(Method method, bool dagger_uses_qa_model);
Variant variant_for(Method method);

/// Trains the variants the requested methods need and evaluates each method
/// on the same judged queries.
EvalReport run_ablation(const Collections& collections, const std::string& embeddings_text,
                        const std::vector<Query>& queries, const Judgments& judgments, const AblationConfig& config,
                        const StopwordSet& stopwords, const Normalizer& normalizer);

}  // namespace cqarank
