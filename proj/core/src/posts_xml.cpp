#include "posts_xml.hpp"

#include "cqarank/error.hpp"
#include "cqarank/text.hpp"

namespace cqarank::detail {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-' || c == '.' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
}

class Scanner {
 public:
  Scanner(std::string_view xml, const std::function<void(const XmlElement&)>& cb) : in_(xml), cb_(cb) {}

  void run() {
    bool seen_root = false;
    while (pos_ < in_.size()) {
      if (in_[pos_] != '<') {
        const std::size_t start = pos_;
        while (pos_ < in_.size() && in_[pos_] != '<') ++pos_;
        if (stack_.empty()) {
          for (std::size_t i = start; i < pos_; ++i) {
            if (!is_space(in_[i])) fail("character data outside the root element", i);
          }
        }
        continue;
      }
      if (starts_with("<?")) {
        skip_past("?>", "unterminated processing instruction");
      } else if (starts_with("<!--")) {
        skip_past("-->", "unterminated comment");
      } else if (starts_with("<![CDATA[")) {
        if (stack_.empty()) fail("CDATA outside the root element", pos_);
        skip_past("]]>", "unterminated CDATA section");
      } else if (starts_with("<!")) {
        skip_past(">", "unterminated declaration");
      } else if (starts_with("</")) {
        end_tag();
      } else {
        if (stack_.empty() && seen_root) fail("more than one root element", pos_);
        seen_root = true;
        start_tag();
      }
    }
    if (!stack_.empty()) {
      fail("unclosed element <" + std::string(stack_.back()) + ">", in_.size());
    }
    if (!seen_root) fail("no root element", in_.size());
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError("malformed XML: " + msg, at);
  }

  bool starts_with(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

  void skip_past(std::string_view terminator, const char* msg) {
    const std::size_t end = in_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(msg, pos_);
    pos_ = end + terminator.size();
  }

  std::string_view read_name() {
    const std::size_t start = pos_;
    while (pos_ < in_.size() && is_name_char(in_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a name", pos_);
    return in_.substr(start, pos_ - start);
  }

  void skip_space() {
    while (pos_ < in_.size() && is_space(in_[pos_])) ++pos_;
  }

  void start_tag() {
    XmlElement el;
    el.offset = pos_;
    ++pos_;
    el.name = read_name();
    while (true) {
      const std::size_t before = pos_;
      skip_space();
      if (pos_ >= in_.size()) fail("unterminated start tag <" + std::string(el.name) + ">", el.offset);
      if (in_[pos_] == '>') {
        ++pos_;
        stack_.push_back(el.name);
        break;
      }
      if (starts_with("/>")) {
        pos_ += 2;
        break;
      }
      if (pos_ == before) fail("expected whitespace between attributes", pos_);
      std::string_view key = read_name();
      skip_space();
      if (pos_ >= in_.size() || in_[pos_] != '=') fail("expected '=' after attribute name", pos_);
      ++pos_;
      skip_space();
      if (pos_ >= in_.size() || (in_[pos_] != '"' && in_[pos_] != '\'')) {
        fail("expected quoted attribute value", pos_);
      }
      const char quote = in_[pos_++];
      const std::size_t vstart = pos_;
      while (pos_ < in_.size() && in_[pos_] != quote) {
        if (in_[pos_] == '<') fail("'<' inside attribute value", pos_);
        ++pos_;
      }
      if (pos_ >= in_.size()) fail("unterminated attribute value", vstart);
      el.attributes.emplace_back(key, decode_entities(in_.substr(vstart, pos_ - vstart)));
      ++pos_;
    }
    cb_(el);
  }

  void end_tag() {
    const std::size_t at = pos_;
    pos_ += 2;
    std::string_view name = read_name();
    skip_space();
    if (pos_ >= in_.size() || in_[pos_] != '>') fail("unterminated end tag", at);
    ++pos_;
    if (stack_.empty() || stack_.back() != name) {
      fail("mismatched end tag </" + std::string(name) + ">", at);
    }
    stack_.pop_back();
  }

  std::string_view in_;
  const std::function<void(const XmlElement&)>& cb_;
  std::size_t pos_ = 0;
  std::vector<std::string_view> stack_;
};

}  // namespace

void scan_xml(std::string_view xml, const std::function<void(const XmlElement&)>& on_element) {
  Scanner(xml, on_element).run();
}

}  // namespace cqarank::detail
