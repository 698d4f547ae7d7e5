#include "cqarank/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"
#include "cqarank/logging.hpp"

namespace cqarank {

void Judgments::set(const std::string& query_id, const std::string& pair_id, int relevance) {
  queries_.insert(query_id);
  labels_[{query_id, pair_id}] = relevance;
}

int Judgments::relevance(std::string_view query_id, std::string_view pair_id) const {
  auto it = labels_.find({std::string(query_id), std::string(pair_id)});
  return it == labels_.end() ? 0 : it->second;
}

std::size_t Judgments::relevant_count(std::string_view query_id) const {
  const std::string q(query_id);
  std::size_t n = 0;
  for (auto it = labels_.lower_bound({q, std::string()}); it != labels_.end() && it->first.first == q; ++it) {
    if (it->second > 0) ++n;
  }
  return n;
}

Judgments Judgments::parse(std::string_view text) {
  Judgments j;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw DataError("judgments line " + std::to_string(line_no) + ": expected query_id<TAB>pair_id<TAB>relevance");
    }
    int rel = 0;
    try {
      std::size_t used = 0;
      rel = std::stoi(std::string(fields[2]), &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError("judgments line " + std::to_string(line_no) + ": relevance is not an integer");
    }
    j.set(std::string(fields[0]), std::string(fields[1]), rel);
    if (end == text.size()) break;
  }
  return j;
}

Judgments Judgments::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string Judgments::serialize() const {
  std::string out;
  for (const auto& [key, rel] : labels_) {
    out += key.first + '\t' + key.second + '\t' + std::to_string(rel) + '\n';
  }
  return out;
}

double average_precision(const RankedList& ranked, const Judgments& judgments, int cutoff) {
  const std::size_t n = std::min<std::size_t>(ranked.entries.size(), static_cast<std::size_t>(std::max(cutoff, 0)));
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (judgments.relevance(ranked.query_id, ranked.entries[k].pair_id) > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

double precision_at(const RankedList& ranked, const Judgments& judgments, int n) {
  if (n <= 0) throw ConfigError("precision cutoff must be positive");
  const std::size_t m = std::min<std::size_t>(ranked.entries.size(), static_cast<std::size_t>(n));
  std::size_t hits = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (judgments.relevance(ranked.query_id, ranked.entries[k].pair_id) > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kLdaPlus: return "lda+";
    case Method::kLdaStar: return "lda*";
    case Method::kLdaDagger: return "lda†";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "lda+" || text == "lda-plus") return Method::kLdaPlus;
  if (text == "lda*" || text == "lda-star") return Method::kLdaStar;
  if (text == "lda†" || text == "lda-dagger") return Method::kLdaDagger;
  throw ConfigError("unknown method '" + std::string(text) + "' (expected lda+, lda*, lda† or lda-dagger)");
}

std::vector<Method> parse_methods(std::string_view comma_separated) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= comma_separated.size()) {
    std::size_t comma = comma_separated.find(',', start);
    if (comma == std::string_view::npos) comma = comma_separated.size();
    auto item = comma_separated.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

MethodMetrics evaluate_rankings(std::string method, std::string category, const std::vector<RankedList>& rankings,
                                const Judgments& judgments, std::vector<std::string>& warnings, int cutoff) {
  MethodMetrics m;
  m.method = std::move(method);
  m.category = std::move(category);
  for (const auto& list : rankings) {
    if (!judgments.has_query(list.query_id)) {
      std::string w = "query '" + list.query_id + "' has no judgments; excluded from " + m.method;
      log::warn(w);
      warnings.push_back(std::move(w));
      continue;
    }
    const double ap = average_precision(list, judgments, cutoff);
    m.average_precision.emplace_back(list.query_id, ap);
    m.map += ap;
    for (std::size_t i = 0; i < kPrecisionCutoffs.size(); ++i) {
      m.precision[i] += precision_at(list, judgments, kPrecisionCutoffs[i]);
    }
  }
  if (!m.average_precision.empty()) {
    const double n = static_cast<double>(m.average_precision.size());
    m.map /= n;
    for (double& p : m.precision) p /= n;
  }
  return m;
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(12) << "method" << std::setw(16) << "category" << std::right << std::setw(8) << "MAP";
  for (int n : kPrecisionCutoffs) os << std::setw(8) << ("P@" + std::to_string(n));
  os << std::setw(9) << "queries" << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& r : results) {
    // The dagger sign is 3 bytes but one column wide.
    const int pad = r.method.find("†") != std::string::npos ? 14 : 12;
    os << std::left << std::setw(pad) << r.method << std::setw(16) << r.category << std::right << std::setw(8)
       << r.map;
    for (double p : r.precision) os << std::setw(8) << p;
    os << std::setw(9) << r.average_precision.size() << '\n';
  }
  os << "config " << config_hash << '\n';
  return os.str();
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json rec;
    rec["method"] = r.method;
    rec["category"] = r.category;
    rec["map"] = r.map;
    for (std::size_t i = 0; i < kPrecisionCutoffs.size(); ++i) {
      rec["p@" + std::to_string(kPrecisionCutoffs[i])] = r.precision[i];
    }
    nlohmann::ordered_json per_query = nlohmann::ordered_json::object();
    for (const auto& [q, ap] : r.average_precision) per_query[q] = ap;
    rec["average_precision"] = std::move(per_query);
    rec["config_hash"] = config_hash;
    records.push_back(std::move(rec));
  }
  nlohmann::ordered_json doc;
  doc["results"] = std::move(records);
  doc["warnings"] = warnings;
  return doc.dump(2) + "\n";
}

}  // namespace cqarank
