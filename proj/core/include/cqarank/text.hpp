#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cqarank {

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  /// The bundled English list (one lowercase word per line).
  static const StopwordSet& english();
  static StopwordSet from_file(const std::filesystem::path& path);
  static StopwordSet parse(std::string_view text);

  bool contains(std::string_view word) const { return words_.count(std::string(word)) != 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Reduces a lowercase token to its base form.
class Normalizer {
 public:
  virtual ~Normalizer() = default;
  virtual std::string base_form(std::string_view token) const = 0;
  virtual std::string_view name() const = 0;
};

/// Leaves tokens untouched.
class IdentityNormalizer final : public Normalizer {
 public:
  std::string base_form(std::string_view token) const override { return std::string(token); }
  std::string_view name() const override { return "none"; }
};

/// Deterministic suffix stripper. Two passes over a lowercase token:
///   1. plural/possessive:  -sses -> -ss, -ies -> -y, trailing -s dropped
///      unless the token ends in -ss, -us or -is;
///   2. one derivational/inflectional suffix, longest match first, removed
///      only if at least three characters remain.
/// Tokens shorter than four characters or ending in a digit are unchanged.
class SuffixStemmer final : public Normalizer {
 public:
  std::string base_form(std::string_view token) const override;
  std::string_view name() const override { return "suffix"; }
};

std::unique_ptr<Normalizer> make_normalizer(std::string_view name);

/// Lowercase, split on every character outside [a-z]. Digits, punctuation
/// and all non-ASCII bytes act as separators, so "ab12cd" -> ["ab", "cd"].
std::vector<std::string> tokenize(std::string_view text);

/// tokenize -> drop stopwords -> base_form. Stopwords are matched on the
/// surface form before stemming.
std::vector<std::string> normalize(std::string_view text, const StopwordSet& stopwords,
                                   const Normalizer& normalizer);
std::vector<std::string> normalize(std::string_view text, const StopwordSet& stopwords);

/// Remove HTML tags and decode the common character entities.
std::string strip_html(std::string_view html);

/// Decode &lt; &gt; &amp; &quot; &apos; and numeric references. Unknown
/// entities are kept verbatim.
std::string decode_entities(std::string_view text);

}  // namespace cqarank
