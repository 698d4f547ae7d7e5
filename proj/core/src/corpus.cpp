#include "cqarank/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"
#include "cqarank/hash.hpp"
#include "cqarank/logging.hpp"
#include "json.hpp"
#include "posts_xml.hpp"

namespace cqarank {

using nlohmann::json;

std::string_view to_string(CollectionKind kind) { return kind == CollectionKind::kQ ? "q" : "qa"; }

CollectionKind parse_collection_kind(std::string_view text) {
  if (text == "q" || text == "Q") return CollectionKind::kQ;
  if (text == "qa" || text == "QA") return CollectionKind::kQA;
  throw ConfigError("unknown collection '" + std::string(text) + "' (expected q|qa)");
}

std::string_view to_string(SourceProfile profile) {
  return profile == SourceProfile::kYahoo ? "yahoo" : "stackexchange";
}

SourceProfile parse_source_profile(std::string_view text) {
  if (text == "yahoo") return SourceProfile::kYahoo;
  if (text == "stackexchange" || text == "se") return SourceProfile::kStackExchange;
  throw ConfigError("unknown source profile '" + std::string(text) + "' (expected yahoo|stackexchange)");
}

// ---------------------------------------------------------------------------
// Vocabulary

TokenId Vocabulary::add(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  doc_freq_.push_back(0);
  index_.emplace(tokens_.back(), id);
  return id;
}

TokenId Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kOutOfVocabulary : it->second;
}

std::string Vocabulary::hash() const {
  Fnv1a h;
  h.update_u64(tokens_.size());
  for (const auto& t : tokens_) {
    h.update(t);
    h.update(std::string_view("\n"));
  }
  return h.hex();
}

std::vector<TokenId> Vocabulary::lookup(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(find(t));
  return ids;
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

std::string json_string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  throw DataError(std::string("field '") + key + "' is not a string");
}

std::vector<std::string> json_string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw DataError(std::string("field '") + key + "' is not an array");
  for (const auto& v : *it) {
    if (!v.is_string()) throw DataError(std::string("field '") + key + "' holds a non-string entry");
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

void warn(IngestResult& result, std::string msg) {
  log::warn(msg);
  result.warnings.push_back(std::move(msg));
}

}  // namespace

IngestResult ingest_jsonl_text(std::string_view text) {
  IngestResult result;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (blank(line)) continue;

    QAPair pair;
    try {
      const json obj = json::parse(line);
      if (!obj.is_object()) throw DataError("record is not a JSON object");
      pair.id = json_string_field(obj, "id");
      pair.question_title = json_string_field(obj, "title");
      pair.question_body = json_string_field(obj, "body");
      pair.question_description = json_string_field(obj, "description");
      pair.question_tags = json_string_list(obj, "tags");
      pair.answers = json_string_list(obj, "answers");
    } catch (const std::exception& e) {
      ++result.skipped;
      warn(result, "line " + std::to_string(line_no) + ": malformed record: " + e.what());
      continue;
    }
    if (pair.id.empty() || blank(pair.question_body)) {
      ++result.skipped;
      warn(result, "line " + std::to_string(line_no) + ": record missing " +
                       (pair.id.empty() ? "id" : "body") + ", skipped");
      continue;
    }
    if (!seen.insert(pair.id).second) {
      ++result.skipped;
      warn(result, "line " + std::to_string(line_no) + ": duplicate id '" + pair.id + "', skipped");
      continue;
    }
    result.pairs.push_back(std::move(pair));
  }
  if (result.pairs.empty()) warn(result, "0 pairs ingested");
  return result;
}

IngestResult ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ingest_jsonl_text(ss.str());
}

// ---------------------------------------------------------------------------
// StackExchange Posts.xml

namespace {

std::vector<std::string> split_tags(std::string_view tags) {
  std::vector<std::string> out;
  std::string current;
  for (char c : tags) {
    if (c == '<' || c == '>' || c == '|') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace

IngestResult ingest_stackexchange_xml_text(std::string_view xml) {
  IngestResult result;
  struct Answer {
    std::string parent;
    std::string body;
  };
  std::vector<Answer> answers;
  std::unordered_map<std::string, std::size_t> question_index;

  detail::scan_xml(xml, [&](const detail::XmlElement& el) {
    if (el.name != "row") return;
    const std::string* type = el.attribute("PostTypeId");
    if (type == nullptr) return;
    if (*type == "1") {
      const std::string* id = el.attribute("Id");
      const std::string* body = el.attribute("Body");
      if (id == nullptr || id->empty() || body == nullptr) {
        ++result.skipped;
        return;
      }
      QAPair pair;
      pair.id = *id;
      pair.question_body = strip_html(*body);
      if (blank(pair.question_body)) {
        ++result.skipped;
        return;
      }
      if (const std::string* title = el.attribute("Title")) pair.question_title = *title;
      if (const std::string* tags = el.attribute("Tags")) pair.question_tags = split_tags(*tags);
      if (question_index.count(pair.id) != 0) {
        ++result.skipped;
        return;
      }
      question_index.emplace(pair.id, result.pairs.size());
      result.pairs.push_back(std::move(pair));
    } else if (*type == "2") {
      const std::string* parent = el.attribute("ParentId");
      const std::string* body = el.attribute("Body");
      answers.push_back(Answer{parent ? *parent : std::string(), body ? strip_html(*body) : std::string()});
    }
    // Other post types (wiki excerpts, moderator nominations, ...) are ignored.
  });

  for (Answer& a : answers) {
    auto it = question_index.find(a.parent);
    if (it == question_index.end()) {
      ++result.orphan_answers;
      continue;
    }
    result.pairs[it->second].answers.push_back(std::move(a.body));
  }
  if (result.orphan_answers > 0) {
    warn(result, std::to_string(result.orphan_answers) + " orphan answer(s) dropped");
  }
  if (result.pairs.empty()) warn(result, "0 pairs ingested");
  return result;
}

IngestResult ingest_stackexchange_xml(const std::filesystem::path& posts_path) {
  return ingest_stackexchange_xml_text(read_file(posts_path));
}

// ---------------------------------------------------------------------------
// Collections

std::string question_text(const QAPair& pair, SourceProfile profile) {
  std::string text;
  auto append = [&text](std::string_view part) {
    if (part.empty()) return;
    if (!text.empty()) text.push_back(' ');
    text.append(part);
  };
  if (profile == SourceProfile::kStackExchange) {
    append(pair.question_title);
    for (const auto& tag : pair.question_tags) append(tag);
    append(pair.question_body);
  } else {
    append(pair.question_body);
    append(pair.question_description);
  }
  return text;
}

std::string question_answer_text(const QAPair& pair, SourceProfile profile) {
  std::string text = question_text(pair, profile);
  for (const auto& a : pair.answers) {
    if (a.empty()) continue;
    text.push_back(' ');
    text.append(a);
  }
  return text;
}

namespace {

struct RawDocument {
  std::string pair;
  std::vector<std::string> tokens;
};

DocumentCollection finalize_collection(CollectionKind kind, const std::vector<RawDocument>& raw,
                                       const std::unordered_set<std::string>& keep) {
  DocumentCollection coll;
  coll.kind = kind;
  std::vector<std::uint32_t> df;
  for (const RawDocument& r : raw) {
    Document doc;
    doc.doc_id = static_cast<std::int32_t>(coll.documents.size());
    doc.source_pair = r.pair;
    doc.collection = kind;
    std::vector<TokenId> distinct;
    for (const auto& tok : r.tokens) {
      if (keep.count(tok) == 0) continue;
      const TokenId id = coll.vocabulary.add(tok);
      doc.tokens.push_back(id);
      distinct.push_back(id);
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    df.resize(coll.vocabulary.size(), 0);
    for (TokenId id : distinct) ++df[static_cast<std::size_t>(id)];
    coll.documents.push_back(std::move(doc));
  }
  for (std::size_t i = 0; i < df.size(); ++i) {
    coll.vocabulary.set_document_frequency(static_cast<TokenId>(i), df[i]);
  }
  return coll;
}

}  // namespace

Collections build_collections(const std::vector<QAPair>& pairs, const BuildOptions& options,
                              const StopwordSet& stopwords, const Normalizer& normalizer) {
  if (pairs.empty()) throw DataError("empty corpus: no question-answer pairs to build from");

  Collections out;
  std::vector<RawDocument> raw_q;
  std::vector<RawDocument> raw_qa;
  std::map<std::string, std::uint64_t> q_counts;
  std::map<std::string, std::uint64_t> qa_counts;

  for (const QAPair& pair : pairs) {
    RawDocument q{pair.id, normalize(question_text(pair, options.profile), stopwords, normalizer)};
    for (const auto& t : q.tokens) ++q_counts[t];
    if (pair.answers.empty()) {
      out.excluded_from_qa.push_back(pair.id);
    } else {
      RawDocument qa{pair.id, q.tokens};
      for (const auto& answer : pair.answers) {
        auto toks = normalize(answer, stopwords, normalizer);
        qa.tokens.insert(qa.tokens.end(), std::make_move_iterator(toks.begin()),
                         std::make_move_iterator(toks.end()));
      }
      for (const auto& t : qa.tokens) ++qa_counts[t];
      raw_qa.push_back(std::move(qa));
    }
    raw_q.push_back(std::move(q));
  }

  std::unordered_set<std::string> keep_q;
  for (const auto& [tok, n] : q_counts) {
    if (n >= options.min_token_count) keep_q.insert(tok);
  }
  std::unordered_set<std::string> keep_qa = keep_q;
  for (const auto& [tok, n] : qa_counts) {
    if (n >= options.min_token_count) keep_qa.insert(tok);
  }

  out.q = finalize_collection(CollectionKind::kQ, raw_q, keep_q);
  out.qa = finalize_collection(CollectionKind::kQA, raw_qa, keep_qa);

  if (out.q.vocabulary.empty() && out.qa.vocabulary.empty()) {
    throw DataError("empty corpus: no tokens survive normalization and frequency filtering");
  }
  if (out.q.vocabulary.empty()) {
    throw DataError("empty corpus: no question tokens survive normalization and frequency filtering");
  }
  if (!out.excluded_from_qa.empty()) {
    std::string msg = std::to_string(out.excluded_from_qa.size()) +
                      " pair(s) without answers excluded from the QA collection";
    log::info(msg);
    out.warnings.push_back(std::move(msg));
  }
  std::size_t empty_q = 0;
  for (const auto& d : out.q.documents) empty_q += d.tokens.empty() ? 1 : 0;
  if (empty_q > 0) {
    std::string msg = std::to_string(empty_q) + " question document(s) are empty after normalization";
    log::warn(msg);
    out.warnings.push_back(std::move(msg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Archive

std::string CorpusArchive::preview(std::string_view pair_id) const {
  for (const auto& [id, text] : previews) {
    if (id == pair_id) return text;
  }
  return {};
}

namespace {

json collection_to_json(const DocumentCollection& c) {
  json vocab = json::array();
  for (std::size_t i = 0; i < c.vocabulary.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    vocab.push_back(json::array({c.vocabulary.token(id), c.vocabulary.document_frequency(id)}));
  }
  json docs = json::array();
  for (const auto& d : c.documents) {
    docs.push_back(json{{"pair", d.source_pair}, {"tokens", d.tokens}});
  }
  return json{{"kind", std::string(to_string(c.kind))},
              {"vocabulary_hash", c.vocabulary.hash()},
              {"vocabulary", std::move(vocab)},
              {"documents", std::move(docs)}};
}

DocumentCollection collection_from_json(const json& j, CollectionKind kind) {
  DocumentCollection c;
  c.kind = kind;
  for (const auto& entry : j.at("vocabulary")) {
    const TokenId id = c.vocabulary.add(entry.at(0).get<std::string>());
    c.vocabulary.set_document_frequency(id, entry.at(1).get<std::uint32_t>());
  }
  if (c.vocabulary.hash() != j.at("vocabulary_hash").get<std::string>()) {
    throw DataError("corpus archive vocabulary hash mismatch for collection " + std::string(to_string(kind)));
  }
  const auto vsize = static_cast<TokenId>(c.vocabulary.size());
  for (const auto& dj : j.at("documents")) {
    Document d;
    d.doc_id = static_cast<std::int32_t>(c.documents.size());
    d.source_pair = dj.at("pair").get<std::string>();
    d.collection = kind;
    d.tokens = dj.at("tokens").get<std::vector<TokenId>>();
    for (TokenId t : d.tokens) {
      if (t < 0 || t >= vsize) throw DataError("corpus archive token id out of range in pair " + d.source_pair);
    }
    c.documents.push_back(std::move(d));
  }
  return c;
}

}  // namespace

std::string serialize_archive(const CorpusArchive& archive) {
  json sources = json::array();
  for (const auto& s : archive.sources) sources.push_back(json{{"name", s.name}, {"hash", s.hash}});
  json previews = json::array();
  for (const auto& [id, text] : archive.previews) previews.push_back(json::array({id, text}));
  json j{{"format", "cqarank-corpus"},
         {"version", 1},
         {"profile", std::string(to_string(archive.profile))},
         {"config_hash", archive.config_hash},
         {"sources", std::move(sources)},
         {"excluded_from_qa", archive.collections.excluded_from_qa},
         {"previews", std::move(previews)},
         {"collections",
          json{{"q", collection_to_json(archive.collections.q)},
               {"qa", collection_to_json(archive.collections.qa)}}}};
  return j.dump() + "\n";
}

CorpusArchive parse_archive(std::string_view json_text) {
  CorpusArchive a;
  try {
    const json j = json::parse(json_text);
    if (j.at("format").get<std::string>() != "cqarank-corpus") throw DataError("not a cqarank corpus archive");
    if (j.at("version").get<int>() != 1) throw DataError("unsupported corpus archive version");
    a.profile = parse_source_profile(j.at("profile").get<std::string>());
    a.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& s : j.at("sources")) {
      a.sources.push_back(SourceFile{s.at("name").get<std::string>(), s.at("hash").get<std::string>()});
    }
    a.collections.excluded_from_qa = j.at("excluded_from_qa").get<std::vector<std::string>>();
    for (const auto& p : j.at("previews")) {
      a.previews.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    }
    a.collections.q = collection_from_json(j.at("collections").at("q"), CollectionKind::kQ);
    a.collections.qa = collection_from_json(j.at("collections").at("qa"), CollectionKind::kQA);
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt corpus archive: ") + e.what());
  }
  return a;
}

void save_archive(const CorpusArchive& archive, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_archive(archive));
}

CorpusArchive load_archive(const std::filesystem::path& path) { return parse_archive(read_file(path)); }

}  // namespace cqarank
