#include "cqarank/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"

namespace cqarank {

TopicIndex::TopicIndex(std::vector<std::string> ids, std::vector<double> rows, std::size_t dimension,
                       std::string model_hash)
    : ids_(std::move(ids)), rows_(std::move(rows)), dimension_(dimension), model_hash_(std::move(model_hash)) {
  if (dimension_ == 0 || rows_.size() != ids_.size() * dimension_) {
    throw DataError("topic index rows do not match its ids and dimension");
  }
  std::vector<std::string_view> sorted(ids_.begin(), ids_.end());
  std::sort(sorted.begin(), sorted.end());
  if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
    throw DataError("topic index has duplicate pair id '" + std::string(*dup) + "'");
  }
  norms_.resize(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    double s = 0.0;
    for (double v : row(r)) s += v * v;
    norms_[r] = std::sqrt(s);
    if (!(norms_[r] > 0.0)) throw DataError("topic index row '" + ids_[r] + "' has zero norm");
  }
}

TopicIndex TopicIndex::from_model(const TopicModel& model, std::string model_hash) {
  return TopicIndex(model.doc_pairs, model.theta, static_cast<std::size_t>(model.topics()), std::move(model_hash));
}

RankedList rank(const TopicIndex& index, std::span<const double> query, int top_k) {
  RankedList out;
  if (query.size() != index.dimension()) {
    throw ConfigError("query has " + std::to_string(query.size()) + " topics, index has " +
                      std::to_string(index.dimension()));
  }
  if (top_k <= 0 || index.size() == 0) return out;

  double qn = 0.0;
  for (double v : query) qn += v * v;
  qn = std::sqrt(qn);
  if (!(qn > 0.0)) throw DataError("undefined similarity: zero query vector");

  std::vector<double> scores(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto row = index.row(r);
    double dot = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) dot += query[k] * row[k];
    scores[r] = dot / (qn * index.norm(r));
  }
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(top_k), order.size());
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return index.id(a) < index.id(b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  out.entries.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.entries.push_back(RankedEntry{index.id(order[i]), scores[order[i]]});
  return out;
}

RankedList query_pipeline(std::string_view query_id, std::string_view text, const QueryResources& res,
                          const QueryOptions& opts) {
  if (res.stopwords == nullptr || res.normalizer == nullptr) throw ConfigError("query pipeline needs text normalization");
  const auto tokens = normalize(text, *res.stopwords, *res.normalizer);

  RankedList list;
  InferenceResult inferred;
  const TopicIndex* index = nullptr;
  std::vector<double> query_theta;
  switch (opts.mode) {
    case RankMode::kRegression: {
      if (!res.q_model || !res.q_vocabulary || !res.mlp || !res.qa_index) {
        throw ConfigError("regression ranking needs the Q model, regressor and QA index");
      }
      inferred = infer_left_to_right(*res.q_model, res.q_vocabulary->lookup(tokens), opts.particles,
                                     res.q_neighborhoods, opts.seed);
      query_theta = res.mlp->forward(inferred.theta);
      index = res.qa_index;
      break;
    }
    case RankMode::kQModelDirect: {
      if (!res.q_model || !res.q_vocabulary || !res.q_index) {
        throw ConfigError("direct Q-model ranking needs the Q model and Q index");
      }
      inferred = infer_left_to_right(*res.q_model, res.q_vocabulary->lookup(tokens), opts.particles,
                                     res.q_neighborhoods, opts.seed);
      query_theta = inferred.theta;
      index = res.q_index;
      break;
    }
    case RankMode::kQaModelDirect: {
      if (!res.qa_model || !res.qa_vocabulary || !res.qa_index) {
        throw ConfigError("direct QA-model ranking needs the QA model and QA index");
      }
      inferred = infer_left_to_right(*res.qa_model, res.qa_vocabulary->lookup(tokens), opts.particles,
                                     res.qa_neighborhoods, opts.seed);
      query_theta = inferred.theta;
      index = res.qa_index;
      break;
    }
  }
  list = rank(*index, query_theta, opts.top_k);
  list.query_id = std::string(query_id);
  list.low_confidence = inferred.status == InferenceStatus::kNoKnownTokens;
  return list;
}

void save_index(const TopicIndex& index, const std::filesystem::path& path) {
  ContainerWriter w(ArtifactKind::kTopicIndex);
  w.add_text("model_hash", index.model_hash());
  const auto dim = static_cast<std::int64_t>(index.dimension());
  w.add_i64("dimension", std::span<const std::int64_t>(&dim, 1));
  std::string ids;
  std::vector<double> rows;
  rows.reserve(index.size() * index.dimension());
  for (std::size_t r = 0; r < index.size(); ++r) {
    ids += index.id(r);
    ids.push_back('\n');
    const auto row = index.row(r);
    rows.insert(rows.end(), row.begin(), row.end());
  }
  w.add_text("pair_ids", ids);
  w.add_f64("theta", rows);
  w.write_atomic(path);
}

TopicIndex load_index(const std::filesystem::path& path, const std::string& expected_model_hash) {
  const auto r = ContainerReader::from_file(path, ArtifactKind::kTopicIndex);
  const std::string hash = r.text("model_hash");
  if (hash != expected_model_hash) {
    throw StaleArtifactError("artifact out of date: index " + path.filename().string() +
                             " was built from a different topic model", "index");
  }
  const std::string ids_text = r.text("pair_ids");
  std::vector<std::string> ids;
  std::size_t pos = 0;
  while (pos < ids_text.size()) {
    const std::size_t end = ids_text.find('\n', pos);
    ids.push_back(ids_text.substr(pos, end - pos));
    pos = end + 1;
  }
  return TopicIndex(std::move(ids), r.f64("theta"), static_cast<std::size_t>(r.i64("dimension").at(0)), hash);
}

}  // namespace cqarank
