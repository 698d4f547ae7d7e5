#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqarank/corpus.hpp"

namespace cqarank {

/// Pre-trained word vectors restricted to one vocabulary. Row `id` holds the
/// vector of vocabulary token `id`; tokens absent from the source file are
/// marked out-of-embedding.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t vocab_size, std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t vocab_size() const { return present_.size(); }
  std::size_t embedded_count() const;

  bool has_vector(TokenId id) const { return present_.at(static_cast<std::size_t>(id)) != 0; }
  std::span<const double> vector(TokenId id) const;
  void set_vector(TokenId id, std::span<const double> values);

  /// Hash of the file the table was loaded from (empty when built in memory).
  const std::string& source_hash() const { return source_hash_; }
  void set_source_hash(std::string h) { source_hash_ = std::move(h); }

 private:
  std::size_t dimension_ = 0;
  std::vector<double> data_;
  std::vector<std::uint8_t> present_;
  std::string source_hash_;
};

/// Text word-vector format: optional header "N r", then "word x1 ... xr".
/// Only vocabulary words are retained. Zero vectors are treated as missing.
EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab);
EmbeddingTable parse_embeddings(std::string_view text, const Vocabulary& vocab);

/// u.w / (|u| |w|). Throws DataError("undefined similarity") on a zero vector
/// or a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> w);

struct Neighbor {
  TokenId word = 0;
  double similarity = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Per-word semantic neighborhoods: every in-vocabulary word whose cosine
/// similarity exceeds tau, best first (ties by ascending id), truncated to
/// max_neighbors. The word itself is always a member with similarity 1.
class Neighborhoods {
 public:
  Neighborhoods() = default;
  Neighborhoods(std::vector<std::vector<Neighbor>> lists, double tau, std::size_t max_neighbors)
      : lists_(std::move(lists)), tau_(tau), max_neighbors_(max_neighbors) {}

  std::span<const Neighbor> of(TokenId word) const { return lists_.at(static_cast<std::size_t>(word)); }
  std::size_t vocab_size() const { return lists_.size(); }
  double tau() const { return tau_; }
  std::size_t max_neighbors() const { return max_neighbors_; }
  std::size_t total_size() const;

  const std::vector<std::vector<Neighbor>>& lists() const { return lists_; }

 private:
  std::vector<std::vector<Neighbor>> lists_;
  double tau_ = 0.0;
  std::size_t max_neighbors_ = 0;
};

/// Exhaustive pairwise construction, parallel over target words.
Neighborhoods build_neighborhoods(const EmbeddingTable& table, double tau, std::size_t max_neighbors,
                                  unsigned threads = 0);

/// Binary sidecar cache, keyed by (embedding hash, vocabulary hash, tau,
/// max_neighbors). `load` returns nullopt when the file is absent or the key
/// does not match.
void save_neighborhoods(const Neighborhoods& nb, const std::filesystem::path& path,
                        const std::string& embedding_hash, const std::string& vocab_hash);
std::optional<Neighborhoods> load_neighborhoods(const std::filesystem::path& path,
                                                const std::string& embedding_hash,
                                                const std::string& vocab_hash, double tau,
                                                std::size_t max_neighbors);

}  // namespace cqarank
