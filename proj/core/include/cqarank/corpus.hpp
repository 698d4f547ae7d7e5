#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cqarank/text.hpp"

namespace cqarank {

using TokenId = std::int32_t;
inline constexpr TokenId kOutOfVocabulary = -1;

/// One archived question with all of its community answers.
struct QAPair {
  std::string id;
  std::string question_title;
  std::string question_body;
  std::vector<std::string> question_tags;
  std::string question_description;
  std::vector<std::string> answers;
};

enum class CollectionKind { kQ, kQA };

std::string_view to_string(CollectionKind kind);
CollectionKind parse_collection_kind(std::string_view text);

struct Document {
  std::int32_t doc_id = 0;
  std::vector<TokenId> tokens;  // original order is kept
  std::string source_pair;
  CollectionKind collection = CollectionKind::kQ;
};

class Vocabulary {
 public:
  /// Returns the id of `token`, adding it if absent.
  TokenId add(std::string_view token);
  TokenId find(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::uint32_t document_frequency(TokenId id) const { return doc_freq_.at(static_cast<std::size_t>(id)); }
  void set_document_frequency(TokenId id, std::uint32_t df) { doc_freq_.at(static_cast<std::size_t>(id)) = df; }

  /// Content hash over the ordered token strings.
  std::string hash() const;

  /// Maps every token to its id, or kOutOfVocabulary.
  std::vector<TokenId> lookup(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint32_t> doc_freq_;
  std::unordered_map<std::string, TokenId> index_;
};

struct DocumentCollection {
  CollectionKind kind = CollectionKind::kQ;
  Vocabulary vocabulary;
  std::vector<Document> documents;
};

// ---------------------------------------------------------------------------
// Ingestion

struct IngestResult {
  std::vector<QAPair> pairs;
  std::size_t skipped = 0;              // records missing id or body, or malformed
  std::size_t orphan_answers = 0;       // Posts.xml answers without a parent question
  std::vector<std::string> warnings;
};

/// One JSON object per line with fields id, title?, body, tags?,
/// description?, answers. Throws IoError when the file cannot be read.
IngestResult ingest_jsonl(const std::filesystem::path& path);
IngestResult ingest_jsonl_text(std::string_view text);

/// StackExchange data dump Posts.xml. Throws ParseError (with byte offset)
/// when the XML is not well formed.
IngestResult ingest_stackexchange_xml(const std::filesystem::path& posts_path);
IngestResult ingest_stackexchange_xml_text(std::string_view xml);

// ---------------------------------------------------------------------------
// Collections

enum class SourceProfile { kYahoo, kStackExchange };

std::string_view to_string(SourceProfile profile);
SourceProfile parse_source_profile(std::string_view text);

struct BuildOptions {
  SourceProfile profile = SourceProfile::kStackExchange;
  /// Tokens whose corpus frequency is below this are dropped.
  std::uint32_t min_token_count = 3;
};

struct Collections {
  DocumentCollection q;
  DocumentCollection qa;
  std::vector<std::string> excluded_from_qa;  // pair ids without answers
  std::vector<std::string> warnings;
};

/// Question text for a pair under the given profile, before normalization.
std::string question_text(const QAPair& pair, SourceProfile profile);
/// Question text followed by every answer.
std::string question_answer_text(const QAPair& pair, SourceProfile profile);

/// Builds the Q and QA collections with independent vocabularies. A QA
/// vocabulary always retains every token the Q vocabulary retained, so a
/// pair's Q document is a sub-multiset of its QA document.
Collections build_collections(const std::vector<QAPair>& pairs, const BuildOptions& options,
                              const StopwordSet& stopwords, const Normalizer& normalizer);

// ---------------------------------------------------------------------------
// Canonical archive (JSON container)

struct SourceFile {
  std::string name;  // file name without directories
  std::string hash;
};

struct CorpusArchive {
  Collections collections;
  /// Short question preview per pair id, for query output.
  std::vector<std::pair<std::string, std::string>> previews;
  std::vector<SourceFile> sources;
  std::string config_hash;
  SourceProfile profile = SourceProfile::kStackExchange;

  std::string preview(std::string_view pair_id) const;
};

std::string serialize_archive(const CorpusArchive& archive);
CorpusArchive parse_archive(std::string_view json_text);
void save_archive(const CorpusArchive& archive, const std::filesystem::path& path);
CorpusArchive load_archive(const std::filesystem::path& path);

}  // namespace cqarank
