#include "cqarank/pipeline.hpp"

#include <future>
#include <map>
#include <unordered_map>

#include "json.hpp"

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"
#include "cqarank/hash.hpp"
#include "cqarank/logging.hpp"

namespace cqarank {

namespace {

void hash_hyperparams(Fnv1a& h, const Hyperparams& hp) {
  h.update_u64(static_cast<std::uint64_t>(hp.topics))
      .update_f64(hp.alpha)
      .update_f64(hp.beta)
      .update_f64(hp.lambda)
      .update_u64(static_cast<std::uint64_t>(hp.sweeps))
      .update_u64(hp.seed);
}

}  // namespace

std::string SystemConfig::hash() const {
  Fnv1a h;
  h.update("system-config-v1").update_f64(tau).update_u64(max_neighbors);
  hash_hyperparams(h, q_lda);
  hash_hyperparams(h, qa_lda);
  h.update_u64(regressor.hidden)
      .update_f64(regressor.learning_rate)
      .update_f64(regressor.momentum)
      .update_u64(regressor.batch_size)
      .update_u64(static_cast<std::uint64_t>(regressor.max_epochs))
      .update_u64(static_cast<std::uint64_t>(regressor.patience))
      .update_f64(regressor.validation_fraction)
      .update_u64(regressor.seed);
  h.update_u64(static_cast<std::uint64_t>(particles)).update_u64(inference_seed).update_u64(static_cast<std::uint64_t>(top_k));
  return h.hex();
}

std::string_view to_string(Variant v) { return v == Variant::kAugmented ? "augmented" : "plain"; }

Variant parse_variant(std::string_view text) {
  if (text == "augmented") return Variant::kAugmented;
  if (text == "plain") return Variant::kPlain;
  throw ConfigError("unknown variant '" + std::string(text) + "' (expected augmented or plain)");
}

std::vector<RegressionSample> regression_samples(const TopicModel& q_model, const TopicModel& qa_model) {
  std::unordered_map<std::string, std::size_t> qa_row;
  for (std::size_t d = 0; d < qa_model.doc_count(); ++d) qa_row.emplace(qa_model.doc_pairs[d], d);
  std::vector<RegressionSample> out;
  for (std::size_t d = 0; d < q_model.doc_count(); ++d) {
    auto it = qa_row.find(q_model.doc_pairs[d]);
    if (it == qa_row.end()) continue;
    const auto in = q_model.theta_row(d);
    const auto target = qa_model.theta_row(it->second);
    out.push_back(RegressionSample{{in.begin(), in.end()}, {target.begin(), target.end()}});
  }
  return out;
}

TrainedSystem train_system(const Collections& collections, const std::string* embeddings_text,
                           const SystemConfig& config, Variant variant) {
  TrainedSystem sys;
  sys.variant = variant;
  if (variant == Variant::kAugmented) {
    if (embeddings_text == nullptr) throw ConfigError("the augmented variant needs word embeddings");
    const auto q_table = parse_embeddings(*embeddings_text, collections.q.vocabulary);
    const auto qa_table = parse_embeddings(*embeddings_text, collections.qa.vocabulary);
    sys.q_neighborhoods = build_neighborhoods(q_table, config.tau, config.max_neighbors);
    sys.qa_neighborhoods = build_neighborhoods(qa_table, config.tau, config.max_neighbors);
  }
  const Neighborhoods* q_nb = sys.q_neighborhoods ? &*sys.q_neighborhoods : nullptr;
  const Neighborhoods* qa_nb = sys.qa_neighborhoods ? &*sys.qa_neighborhoods : nullptr;

  auto qa_future = std::async(std::launch::async, [&] { return train(collections.qa, config.qa_lda, qa_nb); });
  sys.q_model = train(collections.q, config.q_lda, q_nb);
  sys.qa_model = qa_future.get();

  const auto q_hash = sys.q_model.content_hash();
  const auto qa_hash = sys.qa_model.content_hash();
  auto trained = train_regressor(regression_samples(sys.q_model, sys.qa_model), config.regressor);
  sys.mlp = std::move(trained.mlp);
  sys.regressor_report = std::move(trained.report);
  sys.q_index = TopicIndex::from_model(sys.q_model, q_hash);
  sys.qa_index = TopicIndex::from_model(sys.qa_model, qa_hash);
  return sys;
}

QueryResources query_resources(const TrainedSystem& system, const Collections& collections,
                               const StopwordSet& stopwords, const Normalizer& normalizer) {
  QueryResources res;
  res.q_vocabulary = &collections.q.vocabulary;
  res.q_model = &system.q_model;
  res.q_neighborhoods = system.q_neighborhoods ? &*system.q_neighborhoods : nullptr;
  res.qa_vocabulary = &collections.qa.vocabulary;
  res.qa_model = &system.qa_model;
  res.qa_neighborhoods = system.qa_neighborhoods ? &*system.qa_neighborhoods : nullptr;
  res.mlp = &system.mlp;
  res.qa_index = &system.qa_index;
  res.q_index = &system.q_index;
  res.stopwords = &stopwords;
  res.normalizer = &normalizer;
  return res;
}

std::uint64_t query_seed(std::uint64_t base, std::string_view query_id) {
  return mix_seed(base, Fnv1a().update(query_id).digest());
}

std::vector<Query> parse_queries(std::string_view jsonl) {
  std::vector<Query> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw DataError("queries line " + std::to_string(line_no) + ": malformed JSON");
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string()) {
      throw DataError("queries line " + std::to_string(line_no) + ": missing string field 'id'");
    }
    Query q;
    q.id = rec["id"].get<std::string>();
    for (const char* field : {"text", "body"}) {
      if (rec.contains(field) && rec[field].is_string()) {
        q.text = rec[field].get<std::string>();
        break;
      }
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Query> load_queries(const std::filesystem::path& path) { return parse_queries(read_file(path)); }

std::vector<RankedList> rank_queries(const TrainedSystem& system, const Collections& collections,
                                     const std::vector<Query>& queries, RankMode mode, const SystemConfig& config,
                                     const StopwordSet& stopwords, const Normalizer& normalizer) {
  const auto res = query_resources(system, collections, stopwords, normalizer);
  std::vector<RankedList> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    QueryOptions opts{mode, config.top_k, config.particles, query_seed(config.inference_seed, q.id)};
    out.push_back(query_pipeline(q.id, q.text, res, opts));
  }
  return out;
}

RankMode mode_for(Method method, bool dagger_uses_qa_model) {
  if (method == Method::kLdaDagger) return dagger_uses_qa_model ? RankMode::kQaModelDirect : RankMode::kQModelDirect;
  return RankMode::kRegression;
}

Variant variant_for(Method method) { return method == Method::kLdaStar ? Variant::kPlain : Variant::kAugmented; }

EvalReport run_ablation(const Collections& collections, const std::string& embeddings_text,
                        const std::vector<Query>& queries, const Judgments& judgments, const AblationConfig& config,
                        const StopwordSet& stopwords, const Normalizer& normalizer) {
  EvalReport report;
  Fnv1a h;
  h.update(config.system.hash()).update_u64(config.dagger_uses_qa_model ? 1 : 0).update_u64(
      static_cast<std::uint64_t>(config.cutoff));
  report.config_hash = h.hex();

  std::map<Variant, TrainedSystem> systems;
  for (Method m : config.methods) {
    const Variant v = variant_for(m);
    if (!systems.count(v)) {
      log::info("training ", to_string(v), " system");
      systems.emplace(v, train_system(collections, &embeddings_text, config.system, v));
    }
    const auto rankings = rank_queries(systems.at(v), collections, queries, mode_for(m, config.dagger_uses_qa_model),
                                       config.system, stopwords, normalizer);
    report.results.push_back(evaluate_rankings(std::string(to_string(m)), config.category, rankings, judgments,
                                               report.warnings, config.cutoff));
  }
  return report;
}

}  // namespace cqarank
