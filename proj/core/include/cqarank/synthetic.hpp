#pragma once

// Synthetic corpora with known ground truth, for desk-scale validation.

#include <cstdint>
#include <string>
#include <vector>

#include "cqarank/corpus.hpp"
#include "cqarank/evaluation.hpp"

namespace cqarank {

// ---------------------------------------------------------------------------
// Plain LDA generative process

struct LdaCorpusParams {
  std::uint64_t seed = 1;
  int topics = 5;
  int vocab_size = 50;
  int docs = 200;
  int doc_length = 50;
  double alpha = 0.1;  // document-topic concentration
  double beta = 0.1;   // topic-word concentration
};

struct LdaCorpus {
  DocumentCollection collection;      // vocabulary "w0".."w{V-1}"
  std::vector<double> true_phi;       // topics x V
  std::vector<double> true_theta;     // docs x topics
};

LdaCorpus generate_lda_corpus(const LdaCorpusParams& params);

/// Greedy one-to-one matching of learned topics to true topics by highest
/// cosine, returning the mean cosine over matched pairs. Both inputs are
/// topics x V row-major; the learned side may have more topics.
double greedy_matched_cosine(const std::vector<double>& learned, int learned_topics,
                             const std::vector<double>& truth, int true_topics, std::size_t vocab_size);

// ---------------------------------------------------------------------------
// Lexical-gap question/answer corpus

struct LexicalGapParams {
  std::uint64_t seed = 1;
  int themes = 5;
  int vocab_q = 100;
  int vocab_a = 200;
  int pairs = 500;
  int queries = 20;
  double theta_concentration = 0.2;
  double word_concentration = 1.0;
  int question_length = 10;
  int answers_per_pair = 3;
  int answer_length = 30;
  double relevance_threshold = 0.9;
  int embedding_dimension = 16;
  double embedding_noise = 0.5;
};

struct SyntheticQuery {
  std::string id;
  std::string text;
  std::vector<double> theta;
};

struct SyntheticCorpus {
  std::vector<QAPair> pairs;
  std::vector<std::vector<double>> pair_theta;
  std::vector<SyntheticQuery> queries;
  Judgments judgments;
  std::string embeddings_text;  // word-vector text format with header
  std::vector<std::string> q_words;
  std::vector<std::string> a_words;
  std::vector<int> q_word_theme;
  std::vector<int> a_word_theme;
  double mean_relevant_per_query = 0.0;
};

/// Themes own disjoint question-word and answer-word blocks. Pair j is
/// relevant to query i iff cosine(theta_i, theta_j) > relevance_threshold.
/// Throws DataError("judgments too sparse ...") when queries average fewer
/// than two relevant pairs.
SyntheticCorpus generate_lexical_gap_corpus(const LexicalGapParams& params);

/// JSONL records (id, body, answers) for ingestion.
std::string pairs_to_jsonl(const std::vector<QAPair>& pairs);
/// JSONL records (id, text) for the query file.
std::string queries_to_jsonl(const std::vector<SyntheticQuery>& queries);

}  // namespace cqarank
