#include "cqarank/text.hpp"

#include <gtest/gtest.h>

#include <utility>

#include "cqarank/error.hpp"
#include "test_support.hpp"

using namespace cqarank;
using Tokens = std::vector<std::string>;

TEST(Normalize, StemsBothFormsToOneBase) {
  EXPECT_EQ(normalize("The EDUCATORS' education!", StopwordSet::english()), (Tokens{"educat", "educat"}));
}

TEST(Normalize, AllStopwordsGiveEmptyOutput) {
  EXPECT_TRUE(normalize("the a is", StopwordSet::english()).empty());
}

TEST(Normalize, DigitsAreRemovedAndSplitTokens) {
  EXPECT_EQ(tokenize("ab12cd"), (Tokens{"ab", "cd"}));
  EXPECT_EQ(normalize("ab12cd", StopwordSet::english(), IdentityNormalizer()), (Tokens{"ab", "cd"}));
}

TEST(Normalize, NonAsciiBytesSplit) {
  EXPECT_EQ(tokenize("caf\xc3\xa9 na\xc3\xafve x-ray"), (Tokens{"caf", "na", "ve", "x", "ray"}));
}

TEST(Normalize, EmptyInput) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(normalize("  ...  ", StopwordSet::english()).empty());
}

TEST(Normalize, StopwordsMatchSurfaceFormBeforeStemming) {
  // "others" is a stopword; "other" after stemming would not be looked up.
  EXPECT_TRUE(normalize("others", StopwordSet::english()).empty());
}

TEST(Stopwords, BundledListLoads) {
  const auto& sw = StopwordSet::english();
  EXPECT_GT(sw.size(), 500u);
  for (const char* w : {"the", "a", "is", "and", "of", "which", "would"}) EXPECT_TRUE(sw.contains(w)) << w;
  EXPECT_FALSE(sw.contains("topic"));
}

TEST(Stopwords, ParseSkipsBlankLinesAndComments) {
  auto sw = StopwordSet::parse("# comment\nfoo\n\n  bar  \r\n");
  EXPECT_EQ(sw.size(), 2u);
  EXPECT_TRUE(sw.contains("foo"));
  EXPECT_TRUE(sw.contains("bar"));
}

TEST(Stopwords, MissingFileIsIoError) {
  EXPECT_THROW(StopwordSet::from_file("/nonexistent/stopwords.txt"), IoError);
}

TEST(SuffixStemmer, GoldenOutputs) {
  const std::vector<std::pair<const char*, const char*>> golden = {
      {"educators", "educat"}, {"education", "educat"},  {"questions", "quest"},   {"answering", "answer"},
      {"answered", "answer"},  {"topics", "topic"},      {"classes", "class"},     {"studies", "study"},
      {"happiness", "happi"},  {"arguments", "argu"},    {"useful", "use"},        {"quickly", "quick"},
      {"bus", "bus"},          {"analysis", "analysis"}, {"running", "runn"},      {"cats", "cat"},
      {"ties", "tie"},         {"is", "is"},             {"abilities", "abil"},    {"generous", "gener"},
      {"informative", "informat"}, {"development", "develop"}, {"readable", "read"}, {"visible", "vis"},
      {"sizes", "size"},       {"doctors", "doct"},      {"regional", "region"},   {"gis", "gis"},
      {"maps", "map"},         {"mapping", "mapp"},
  };
  SuffixStemmer stemmer;
  for (const auto& [word, base] : golden) EXPECT_EQ(stemmer.base_form(word), base) << word;
}

TEST(SuffixStemmer, IsIdempotentOnItsOwnOutputForShortWords) {
  SuffixStemmer s;
  for (const char* w : {"map", "gis", "bus", "cat"}) EXPECT_EQ(s.base_form(s.base_form(w)), s.base_form(w));
}

TEST(Normalizers, FactoryByName) {
  EXPECT_EQ(make_normalizer("suffix")->name(), "suffix");
  EXPECT_EQ(make_normalizer("none")->name(), "none");
  EXPECT_THROW(make_normalizer("porter"), ConfigError);
}

TEST(Html, TagsStrippedAndEntitiesDecoded) {
  const auto text = strip_html("<p>Use <code>ogr2ogr</code> &amp; QGIS&#39;s tools&#x21;</p><br/>done");
  const auto tokens = tokenize(text);
  EXPECT_EQ(tokens, (Tokens{"use", "ogr", "ogr", "qgis", "s", "tools", "done"}));
  EXPECT_EQ(decode_entities("&lt;a&gt; &quot;b&quot; &unknown; &#233;"), "<a> \"b\" &unknown; \xc3\xa9");
}
