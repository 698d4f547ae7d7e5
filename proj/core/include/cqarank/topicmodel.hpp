#pragma once

// LDA by collapsed Gibbs sampling, optionally augmented with word-embedding
// neighborhoods, plus left-to-right inference for unseen documents.
//
// Per-token topic mass for word w in document d (V = vocabulary size):
//
//   m(t) =  a*b / (b*V + n_t)
//         + n_td*b / (b*V + n_t)
//         + (a + n_td) * lambda * n_wt / (b*V + n_t)
//         + (1 - lambda) / c_t * sum_{w' in Omega(w)} exp(n_w't * sim(w, w') / n_t)
//
// where n_wt, n_td, n_t are the word-topic, document-topic and topic totals,
// and c_t sums the last exponential term over the whole vocabulary. The
// exponent is 0 when n_t == 0. Without neighborhoods the sampler runs with
// lambda = 1 and the mass collapses to (a + n_td)(b + n_wt)/(b*V + n_t).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cqarank/corpus.hpp"
#include "cqarank/embeddings.hpp"
#include "cqarank/random.hpp"

namespace cqarank {

struct Hyperparams {
  int topics = 140;
  double alpha = 35.0 / 140.0;
  double beta = 0.01;
  double lambda = 0.9;
  int sweeps = 1000;
  std::uint64_t seed = 1;

  /// alpha = 35 / topics, other fields at their defaults.
  static Hyperparams for_topics(int topics);
  void validate() const;
};

/// Assignment counts. Rows are word-major (word_topic) and document-major
/// (doc_topic) so that one token touches contiguous memory.
struct CountState {
  int topics = 0;
  std::size_t vocab_size = 0;
  std::vector<std::int32_t> word_topic;           // V x T, n_{w|t}
  std::vector<std::int32_t> doc_topic;            // D x T, n_{t|d}
  std::vector<std::int64_t> topic_total;          // T, n_{.|t}
  std::vector<std::vector<std::int32_t>> assignments;  // z[d][n]

  CountState() = default;
  CountState(int topics, std::size_t vocab_size, std::size_t docs);

  std::int32_t& nwt(TokenId w, int t) { return word_topic[static_cast<std::size_t>(w) * topics + t]; }
  std::int32_t nwt(TokenId w, int t) const { return word_topic[static_cast<std::size_t>(w) * topics + t]; }
  std::int32_t& ntd(std::size_t d, int t) { return doc_topic[d * topics + t]; }
  std::int32_t ntd(std::size_t d, int t) const { return doc_topic[d * topics + t]; }

  std::span<const std::int32_t> doc_row(std::size_t d) const {
    return std::span<const std::int32_t>(doc_topic).subspan(d * topics, static_cast<std::size_t>(topics));
  }

  /// Exact integer check of n_t = sum_w n_wt, sum_t n_td = |d|, and z in range.
  bool consistent(const std::vector<std::vector<TokenId>>& docs) const;
};

/// Frozen word-topic statistics, shared by training and inference paths.
struct TopicCounts {
  int topics = 0;
  std::size_t vocab_size = 0;
  std::span<const std::int32_t> word_topic;
  std::span<const std::int64_t> topic_total;

  static TopicCounts of(const CountState& s) { return {s.topics, s.vocab_size, s.word_topic, s.topic_total}; }
};

/// c_t for every topic, computed from the given counts.
std::vector<double> topic_normalizers(const TopicCounts& counts, const Neighborhoods& nb);

/// Unnormalized topic masses for one token. `doc_topic` is the n_{t|d} row
/// of the token's document. Counts are used as they stand: the caller
/// removes the token's current assignment first when resampling.
/// `neighborhoods` may be null (standard LDA, lambda treated as 1); then
/// `normalizers` is ignored.
void topic_masses(const TopicCounts& counts, std::span<const std::int32_t> doc_topic, const Hyperparams& hp,
                  TokenId word, const Neighborhoods* neighborhoods, std::span<const double> normalizers,
                  std::span<double> out);

/// Convenience form over a full CountState.
std::vector<double> conditional_topic_probs(const CountState& state, const Hyperparams& hp, std::size_t doc,
                                            TokenId word, const Neighborhoods* neighborhoods,
                                            std::span<const double> normalizers);

class TopicModel {
 public:
  CollectionKind collection = CollectionKind::kQ;
  Hyperparams hyperparams;
  bool augmented = false;
  std::string vocabulary_hash;
  std::vector<std::string> doc_pairs;  // pair id per theta row
  std::vector<double> theta;           // D x T
  std::vector<double> phi;             // T x V
  CountState counts;

  int topics() const { return hyperparams.topics; }
  std::size_t vocab_size() const { return counts.vocab_size; }
  std::size_t doc_count() const { return doc_pairs.size(); }

  std::span<const double> theta_row(std::size_t d) const {
    return std::span<const double>(theta).subspan(d * topics(), static_cast<std::size_t>(topics()));
  }
  std::span<const double> phi_row(int t) const {
    return std::span<const double>(phi).subspan(static_cast<std::size_t>(t) * vocab_size(), vocab_size());
  }

  /// Hash of the serialized model bytes.
  std::string content_hash() const;
};

/// Hooks for diagnostics and tests. `on_token` fires after masses are
/// computed and before the new topic is drawn; the state passed in has the
/// token's previous assignment removed.
struct SampleEvent {
  int sweep = 0;
  std::size_t doc = 0;
  std::size_t position = 0;
  TokenId word = 0;
  std::int32_t previous_topic = 0;
  std::span<const double> masses;
  std::span<const double> normalizers;
  const CountState* state = nullptr;
};

class GibbsSampler {
 public:
  /// `docs` must outlive the sampler. Documents without tokens must be
  /// removed beforehand (see train()).
  GibbsSampler(const std::vector<std::vector<TokenId>>& docs, std::size_t vocab_size, Hyperparams hp,
               const Neighborhoods* neighborhoods);

  void set_observer(std::function<void(const SampleEvent&)> observer) { observer_ = std::move(observer); }

  /// One full pass over every token; normalizers are refreshed at the start.
  void sweep();
  int sweeps_done() const { return sweeps_done_; }

  const CountState& state() const { return state_; }
  const Hyperparams& hyperparams() const { return hp_; }
  std::span<const double> normalizers() const { return normalizers_; }

 private:
  const std::vector<std::vector<TokenId>>& docs_;
  Hyperparams hp_;
  const Neighborhoods* nb_;
  Rng rng_;
  CountState state_;
  std::vector<double> normalizers_;
  std::vector<double> masses_;
  std::function<void(const SampleEvent&)> observer_;
  int sweeps_done_ = 0;
};

/// theta_d[t] = (n_td + a) / (|d| + T a);  phi_t[w] = (n_wt + b) / (n_t + V b).
std::vector<double> estimate_theta(const CountState& s, const Hyperparams& hp);
std::vector<double> estimate_phi(const CountState& s, const Hyperparams& hp);

/// Trains a model on one collection. Empty documents are excluded with a
/// warning. With `neighborhoods` null this is plain collapsed-Gibbs LDA.
TopicModel train(const DocumentCollection& docs, const Hyperparams& hp, const Neighborhoods* neighborhoods);

// ---------------------------------------------------------------------------
// Left-to-right inference

enum class InferenceStatus { kOk, kNoKnownTokens };

struct InferenceResult {
  std::vector<double> theta;
  InferenceStatus status = InferenceStatus::kOk;
  std::size_t known_tokens = 0;
};

/// Holds a frozen model plus its precomputed normalizers; thread-safe.
class LeftToRightInferencer {
 public:
  LeftToRightInferencer(const TopicModel& model, const Neighborhoods* neighborhoods);

  /// Tokens equal to kOutOfVocabulary (or >= V) are skipped. Each particle
  /// samples z_n in order given its own z_<n; theta is averaged over
  /// particles.
  InferenceResult infer(std::span<const TokenId> tokens, int particles, std::uint64_t seed) const;

 private:
  const TopicModel& model_;
  const Neighborhoods* nb_;
  std::vector<double> normalizers_;
};

InferenceResult infer_left_to_right(const TopicModel& model, std::span<const TokenId> tokens, int particles,
                                    const Neighborhoods* neighborhoods, std::uint64_t seed);

/// Embedding-smoothed word distribution of topic t:
///   phi'_t(w) = (1/c) sum_{w' in Omega(w)} exp(phi_t(w') sim(w, w')).
std::vector<double> modified_phi(const TopicModel& model, int topic, const Neighborhoods& nb);

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_topic_model(const TopicModel& model);
TopicModel parse_topic_model(std::string bytes);
void save_topic_model(const TopicModel& model, const std::filesystem::path& path);
/// Verifies the stored vocabulary hash against `vocab`.
TopicModel load_topic_model(const std::filesystem::path& path, const Vocabulary& vocab);
TopicModel load_topic_model(const std::filesystem::path& path);

}  // namespace cqarank
