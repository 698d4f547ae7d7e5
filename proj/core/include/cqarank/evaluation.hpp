#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cqarank/ranker.hpp"

namespace cqarank {

/// Binary relevance judgments; unjudged pairs count as non-relevant.
/// Text form: one `query_id<TAB>pair_id<TAB>relevance` record per line.
class Judgments {
 public:
  void set(const std::string& query_id, const std::string& pair_id, int relevance);
  /// Registers a query even if it has no relevant pairs.
  void add_query(const std::string& query_id) { queries_.insert(query_id); }

  bool has_query(std::string_view query_id) const { return queries_.count(std::string(query_id)) != 0; }
  int relevance(std::string_view query_id, std::string_view pair_id) const;
  std::size_t relevant_count(std::string_view query_id) const;
  const std::set<std::string>& queries() const { return queries_; }

  static Judgments parse(std::string_view text);
  static Judgments load(const std::filesystem::path& path);
  std::string serialize() const;

 private:
  std::set<std::string> queries_;
  std::map<std::pair<std::string, std::string>, int> labels_;
};

inline constexpr std::array<int, 5> kPrecisionCutoffs = {1, 2, 4, 7, 10};
inline constexpr int kDefaultApCutoff = 10;

/// Mean of precision@k over relevant positions k <= cutoff, divided by the
/// number of relevant items retrieved within the cutoff; 0 when none.
double average_precision(const RankedList& ranked, const Judgments& judgments, int cutoff = kDefaultApCutoff);

/// Relevant items among the first n, divided by n.
double precision_at(const RankedList& ranked, const Judgments& judgments, int n);

enum class Method { kLdaPlus, kLdaStar, kLdaDagger };

std::string_view to_string(Method method);
/// Accepts lda+, lda*, lda† and the ASCII aliases lda-plus, lda-star, lda-dagger.
Method parse_method(std::string_view text);
std::vector<Method> parse_methods(std::string_view comma_separated);

struct MethodMetrics {
  std::string method;
  std::string category;
  double map = 0.0;
  std::array<double, kPrecisionCutoffs.size()> precision{};
  std::vector<std::pair<std::string, double>> average_precision;  // per query
};

struct EvalReport {
  std::vector<MethodMetrics> results;
  std::string config_hash;
  std::vector<std::string> warnings;

  std::string to_table() const;
  std::string to_json() const;
};

/// MAP and P@N over the rankings whose query appears in `judgments`. Other
/// queries are skipped and reported in `warnings`.
MethodMetrics evaluate_rankings(std::string method, std::string category, const std::vector<RankedList>& rankings,
                                const Judgments& judgments, std::vector<std::string>& warnings,
                                int cutoff = kDefaultApCutoff);

}  // namespace cqarank
