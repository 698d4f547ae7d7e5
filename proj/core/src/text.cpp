#include "cqarank/text.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "cqarank/error.hpp"

namespace cqarank {
namespace detail {
extern const std::string_view kEnglishStopwordsText;
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Longest first; matching stops at the first hit.
constexpr std::array<std::string_view, 24> kSuffixes = {
    "ities", "ments", "ness", "ment", "ings", "ions", "edly", "able", "ible", "ity", "ing",
    "ion",   "ers",   "ors",  "ful",  "ous",  "ive",  "ies",  "ly",   "ed",   "er",  "or",
    "al",    "es"};

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

}  // namespace

const StopwordSet& StopwordSet::english() {
  static const StopwordSet set = parse(detail::kEnglishStopwordsText);
  return set;
}

StopwordSet StopwordSet::parse(std::string_view text) {
  std::unordered_set<std::string> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty() && line.front() != '#') {
      std::string w(line);
      for (char& c : w) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      words.insert(std::move(w));
    }
    pos = end + 1;
  }
  return StopwordSet(std::move(words));
}

StopwordSet StopwordSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword list " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string SuffixStemmer::base_form(std::string_view token) const {
  std::string w(token);
  if (w.size() < 4) return w;
  if (w.back() >= '0' && w.back() <= '9') return w;

  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies") && w.size() > 4) {
    w.resize(w.size() - 3);
    w.push_back('y');
  } else if (w.back() == 's' && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    w.pop_back();
  }

  for (std::string_view suffix : kSuffixes) {
    if (ends_with(w, suffix) && w.size() - suffix.size() >= 3) {
      w.resize(w.size() - suffix.size());
      break;
    }
  }
  return w;
}

std::unique_ptr<Normalizer> make_normalizer(std::string_view name) {
  if (name == "suffix") return std::make_unique<SuffixStemmer>();
  if (name == "none") return std::make_unique<IdentityNormalizer>();
  throw ConfigError("unknown normalizer '" + std::string(name) + "' (expected suffix|none)");
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c >= 'a' && c <= 'z') {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> normalize(std::string_view text, const StopwordSet& stopwords,
                                   const Normalizer& normalizer) {
  std::vector<std::string> out;
  for (std::string& tok : tokenize(text)) {
    if (stopwords.contains(tok)) continue;
    std::string base = normalizer.base_form(tok);
    if (!base.empty()) out.push_back(std::move(base));
  }
  return out;
}

std::vector<std::string> normalize(std::string_view text, const StopwordSet& stopwords) {
  static const SuffixStemmer stemmer;
  return normalize(text, stopwords, stemmer);
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t semi = text.find(';', i);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(text[i++]);
      continue;
    }
    std::string_view name = text.substr(i + 1, semi - i - 1);
    if (name == "lt") {
      out.push_back('<');
    } else if (name == "gt") {
      out.push_back('>');
    } else if (name == "amp") {
      out.push_back('&');
    } else if (name == "quot") {
      out.push_back('"');
    } else if (name == "apos") {
      out.push_back('\'');
    } else if (name == "nbsp") {
      out.push_back(' ');
    } else if (name.size() > 1 && name[0] == '#') {
      unsigned long cp = 0;
      bool ok = true;
      const bool hex = name[1] == 'x' || name[1] == 'X';
      std::string_view digits = name.substr(hex ? 2 : 1);
      if (digits.empty()) ok = false;
      for (char c : digits) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else { ok = false; break; }
        cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(d);
        if (cp > 0x10ffff) { ok = false; break; }
      }
      if (!ok) {
        out.append(text.substr(i, semi - i + 1));
      } else {
        append_utf8(out, cp);
      }
    } else {
      out.append(text.substr(i, semi - i + 1));
    }
    i = semi + 1;
  }
  return out;
}

std::string strip_html(std::string_view html) {
  std::string text;
  text.reserve(html.size());
  bool in_tag = false;
  for (char c : html) {
    if (in_tag) {
      if (c == '>') {
        in_tag = false;
        text.push_back(' ');
      }
    } else if (c == '<') {
      in_tag = true;
    } else {
      text.push_back(c);
    }
  }
  return decode_entities(text);
}

}  // namespace cqarank
