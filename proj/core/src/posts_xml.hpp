#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cqarank::detail {

struct XmlElement {
  std::string_view name;
  std::vector<std::pair<std::string_view, std::string>> attributes;  // values entity-decoded
  std::size_t offset = 0;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

/// Minimal well-formedness-checking XML scanner sufficient for data-dump
/// files: declarations, comments, DOCTYPE, nested elements with attributes
/// and character data. Calls `on_element` for every start (or empty)
/// element tag. Throws ParseError with the byte offset of the first defect.
void scan_xml(std::string_view xml, const std::function<void(const XmlElement&)>& on_element);

}  // namespace cqarank::detail
