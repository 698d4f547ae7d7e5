#include "cqarank/cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cqarank/cli/settings.hpp"
#include "cqarank/cli/stages.hpp"
#include "cqarank/container.hpp"
#include "cqarank/corpus.hpp"
#include "cqarank/embeddings.hpp"
#include "cqarank/error.hpp"
#include "cqarank/evaluation.hpp"
#include "cqarank/hash.hpp"
#include "cqarank/logging.hpp"
#include "cqarank/pipeline.hpp"
#include "cqarank/ranker.hpp"
#include "cqarank/regressor.hpp"
#include "cqarank/synthetic.hpp"
#include "cqarank/topicmodel.hpp"
#include "json.hpp"

namespace cqarank::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " is not set");
  if (!fs::is_regular_file(path)) throw IoError(what + " not found: " + path.string());
}

StopwordSet load_stopwords(const Settings& s) {
  const auto& v = s.get("normalize.stopwords");
  if (v == "builtin") return StopwordSet::english();
  if (v == "none") return StopwordSet();
  require_file(s.path("normalize.stopwords"), "normalize.stopwords");
  return StopwordSet::from_file(s.path("normalize.stopwords"));
}

/// First line of the question title (or body), whitespace collapsed, cut to
/// about 80 bytes on a UTF-8 boundary.
std::string make_preview(const QAPair& pair) {
  const std::string& source = pair.question_title.empty() ? pair.question_body : pair.question_title;
  std::string text;
  bool space = false;
  for (char ch : source) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      space = !text.empty();
      continue;
    }
    if (space) text.push_back(' ');
    space = false;
    text.push_back(ch);
  }
  constexpr std::size_t kMax = 80;
  if (text.size() <= kMax) return text;
  std::size_t cut = kMax - 3;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return text.substr(0, cut) + "...";
}

// ---------------------------------------------------------------------------
// Loading trained artifacts

Neighborhoods training_neighborhoods(const Settings& s, const ArtifactStore& store, CollectionKind kind,
                                     const Vocabulary& vocab, std::string& embedding_hash) {
  const fs::path path = s.path("embeddings.path");
  if (path.empty()) throw ConfigError("the augmented variant needs embeddings.path");
  require_file(path, "embeddings.path");
  embedding_hash = store.hash(path);
  const double tau = s.real("embeddings.tau");
  const auto max_neighbors = s.integer("embeddings.max_neighbors");
  if (max_neighbors < 1) throw ConfigError("embeddings.max_neighbors must be at least 1");
  const fs::path cache = store.file(neighborhoods_file(kind));
  if (auto cached = load_neighborhoods(cache, embedding_hash, vocab.hash(), tau,
                                       static_cast<std::size_t>(max_neighbors))) {
    log::info("reusing ", cache.filename().string());
    return *cached;
  }
  const auto table = load_embeddings(path, vocab);
  if (table.embedded_count() == 0) log::warn("no ", to_string(kind), " vocabulary word has an embedding");
  auto nb = build_neighborhoods(table, tau, static_cast<std::size_t>(max_neighbors));
  save_neighborhoods(nb, cache, embedding_hash, vocab.hash());
  return nb;
}

Neighborhoods stored_neighborhoods(const Settings& s, const ArtifactStore& store, CollectionKind kind,
                                   const Vocabulary& vocab) {
  const Stage stage = Stage::lda(kind, Variant::kAugmented);
  const auto entry = store.entry(stage);
  const auto it = entry ? entry->extra.find("embedding_hash") : std::map<std::string, std::string>::const_iterator{};
  const fs::path cache = store.file(neighborhoods_file(kind));
  if (entry && it != entry->extra.end()) {
    if (auto nb = load_neighborhoods(cache, it->second, vocab.hash(), s.real("embeddings.tau"),
                                     static_cast<std::size_t>(s.integer("embeddings.max_neighbors")))) {
      return *nb;
    }
  }
  throw StaleArtifactError("artifact out of date: " + cache.filename().string() + " is missing or does not match; rerun `cqarank " +
                               stage.command() + "`",
                           stage.command());
}

struct VariantParts {
  TopicModel q_model;
  TopicModel qa_model;
  std::optional<Neighborhoods> q_nb;
  std::optional<Neighborhoods> qa_nb;
  std::optional<Mlp> mlp;
  TopicIndex q_index;
  TopicIndex qa_index;
};

struct LoadedSystem {
  CorpusArchive archive;
  StopwordSet stopwords;
  std::unique_ptr<Normalizer> normalizer;
  std::map<Variant, std::unique_ptr<VariantParts>> variants;

  QueryResources resources(Variant v) const {
    const VariantParts& p = *variants.at(v);
    QueryResources r;
    r.q_vocabulary = &archive.collections.q.vocabulary;
    r.q_model = &p.q_model;
    r.q_neighborhoods = p.q_nb ? &*p.q_nb : nullptr;
    r.qa_vocabulary = &archive.collections.qa.vocabulary;
    r.qa_model = &p.qa_model;
    r.qa_neighborhoods = p.qa_nb ? &*p.qa_nb : nullptr;
    r.mlp = p.mlp ? &*p.mlp : nullptr;
    r.q_index = &p.q_index;
    r.qa_index = &p.qa_index;
    r.stopwords = &stopwords;
    r.normalizer = normalizer.get();
    return r;
  }
};

std::vector<Stage> stages_for(const std::vector<Method>& methods) {
  std::vector<Stage> out;
  auto add = [&out](const Stage& st) {
    for (const auto& s : out) {
      if (s.id() == st.id()) return;
    }
    out.push_back(st);
  };
  for (const Method m : methods) {
    const Variant v = variant_for(m);
    if (m != Method::kLdaDagger) add(Stage::regressor(v));
    add(Stage::index(v));
  }
  return out;
}

/// Verifies every stage, reporting all missing or stale ones together.
void require_all(const ArtifactStore& store, const std::vector<Stage>& stages, const Settings& s) {
  std::vector<Problem> problems;
  for (const auto& st : stages) {
    auto p = store.problem(st, s);
    if (!p) continue;
    const bool seen = std::any_of(problems.begin(), problems.end(),
                                  [&p](const Problem& q) { return q.rerun == p->rerun; });
    if (!seen) problems.push_back(*p);
  }
  if (problems.empty()) return;
  if (problems.size() == 1) throw StaleArtifactError(problems[0].message, problems[0].rerun);
  std::string msg = problems[0].message + "\nrun these first:";
  for (const auto& p : problems) msg += "\n  cqarank " + p.rerun;
  throw StaleArtifactError(msg, problems[0].rerun);
}

LoadedSystem load_system(const Settings& s, const ArtifactStore& store, const std::vector<Method>& methods) {
  LoadedSystem sys;
  sys.archive = load_archive(store.file(kCorpusFile));
  sys.stopwords = load_stopwords(s);
  sys.normalizer = make_normalizer(s.get("normalize.stemmer"));
  for (const Method m : methods) {
    const Variant v = variant_for(m);
    auto& slot = sys.variants[v];
    if (!slot) {
      slot = std::make_unique<VariantParts>();
      const auto& qv = sys.archive.collections.q.vocabulary;
      const auto& qav = sys.archive.collections.qa.vocabulary;
      slot->q_model = load_topic_model(store.file(model_file(CollectionKind::kQ, v)), qv);
      slot->qa_model = load_topic_model(store.file(model_file(CollectionKind::kQA, v)), qav);
      if (v == Variant::kAugmented) {
        slot->q_nb = stored_neighborhoods(s, store, CollectionKind::kQ, qv);
        slot->qa_nb = stored_neighborhoods(s, store, CollectionKind::kQA, qav);
      }
      slot->q_index = load_index(store.file(index_file(CollectionKind::kQ, v)), slot->q_model.content_hash());
      slot->qa_index = load_index(store.file(index_file(CollectionKind::kQA, v)), slot->qa_model.content_hash());
    }
    if (m != Method::kLdaDagger && !slot->mlp) {
      slot->mlp = load_mlp(store.file(regressor_file(v)), slot->q_model.content_hash(),
                           slot->qa_model.content_hash());
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
  Settings settings;
  std::ostream& out;
  std::ostream& err;

  ArtifactStore store() const { return ArtifactStore(settings.path("artifacts")); }
};

int cmd_ingest(Context& c) {
  const auto start = Clock::now();
  const Settings& s = c.settings;
  const fs::path input = s.path("corpus.input");
  require_file(input, "corpus.input");
  std::string format = s.get("corpus.format");
  if (format == "auto") format = input.extension() == ".xml" ? "se-xml" : "jsonl";
  IngestResult ingested = format == "se-xml" ? ingest_stackexchange_xml(input) : ingest_jsonl(input);
  for (const auto& w : ingested.warnings) log::warn(w);
  if (ingested.pairs.empty()) throw DataError("no usable question-answer pairs in " + input.filename().string());

  const StopwordSet stopwords = load_stopwords(s);
  const auto normalizer = make_normalizer(s.get("normalize.stemmer"));
  const ArtifactStore store = c.store();
  CorpusArchive archive;
  archive.collections = build_collections(ingested.pairs, s.build(), stopwords, *normalizer);
  for (const auto& w : archive.collections.warnings) log::warn(w);
  archive.profile = s.build().profile;
  for (const auto& p : ingested.pairs) archive.previews.emplace_back(p.id, make_preview(p));
  archive.sources.push_back(SourceFile{input.filename().string(), store.hash(input)});
  archive.config_hash = stage_config_hash(Stage::ingest(), s);

  fs::create_directories(store.dir());
  save_archive(archive, store.file(kCorpusFile));
  ManifestEntry entry;
  entry.wall_time_seconds = seconds_since(start);
  store.record(Stage::ingest(), s, entry);

  const auto& col = archive.collections;
  c.out << "ingested " << ingested.pairs.size() << " pairs from " << input.filename().string() << " ("
        << ingested.skipped << " records skipped)\n"
        << "Q collection: " << col.q.documents.size() << " documents, " << col.q.vocabulary.size() << " words\n"
        << "QA collection: " << col.qa.documents.size() << " documents, " << col.qa.vocabulary.size() << " words\n";
  return kExitOk;
}

int cmd_train_lda(Context& c, CollectionKind kind, Variant variant) {
  const auto start = Clock::now();
  const Settings& s = c.settings;
  const ArtifactStore store = c.store();
  store.require_current(Stage::ingest(), s);
  const Hyperparams hp = s.lda(kind);
  const CorpusArchive archive = load_archive(store.file(kCorpusFile));
  const DocumentCollection& docs = kind == CollectionKind::kQ ? archive.collections.q : archive.collections.qa;

  const Stage stage = Stage::lda(kind, variant);
  ManifestEntry entry;
  std::optional<Neighborhoods> nb;
  if (variant == Variant::kAugmented) {
    std::string embedding_hash;
    nb = training_neighborhoods(s, store, kind, docs.vocabulary, embedding_hash);
    entry.extra["embedding_hash"] = embedding_hash;
  }
  const TopicModel model = train(docs, hp, nb ? &*nb : nullptr);
  save_topic_model(model, store.file(model_file(kind, variant)));
  entry.seed = hp.seed;
  entry.wall_time_seconds = seconds_since(start);
  store.record(stage, s, entry);
  c.out << "trained " << model_file(kind, variant) << ": " << hp.topics << " topics, " << model.doc_count()
        << " documents, " << model.vocab_size() << " words, " << hp.sweeps << " sweeps\n";
  return kExitOk;
}

int cmd_train_regressor(Context& c, Variant variant) {
  const auto start = Clock::now();
  const Settings& s = c.settings;
  const ArtifactStore store = c.store();
  store.require_current(Stage::lda(CollectionKind::kQ, variant), s);
  store.require_current(Stage::lda(CollectionKind::kQA, variant), s);
  const TrainConfig cfg = s.regressor();
  const CorpusArchive archive = load_archive(store.file(kCorpusFile));
  const TopicModel q = load_topic_model(store.file(model_file(CollectionKind::kQ, variant)),
                                        archive.collections.q.vocabulary);
  const TopicModel qa = load_topic_model(store.file(model_file(CollectionKind::kQA, variant)),
                                         archive.collections.qa.vocabulary);
  const TrainedMlp trained = train_regressor(regression_samples(q, qa), cfg);
  save_mlp(trained.mlp, store.file(regressor_file(variant)), q.content_hash(), qa.content_hash());

  const auto& r = trained.report;
  ManifestEntry entry;
  entry.seed = cfg.seed;
  entry.wall_time_seconds = seconds_since(start);
  store.record(Stage::regressor(variant), s, entry);
  c.out << "trained " << regressor_file(variant) << ": " << r.train_size << " training and " << r.validation_size
        << " validation pairs, best epoch " << r.best_epoch << " of " << r.stopped_epoch;
  if (!r.validation_loss.empty() && r.best_epoch > 0) {
    c.out << ", validation cross-entropy " << std::setprecision(6)
          << r.validation_loss[static_cast<std::size_t>(r.best_epoch - 1)];
  }
  c.out << "\n";
  return kExitOk;
}

int cmd_index(Context& c, Variant variant) {
  const auto start = Clock::now();
  const Settings& s = c.settings;
  const ArtifactStore store = c.store();
  store.require_current(Stage::lda(CollectionKind::kQ, variant), s);
  store.require_current(Stage::lda(CollectionKind::kQA, variant), s);
  const CorpusArchive archive = load_archive(store.file(kCorpusFile));
  for (const CollectionKind kind : {CollectionKind::kQ, CollectionKind::kQA}) {
    const auto& vocab = kind == CollectionKind::kQ ? archive.collections.q.vocabulary : archive.collections.qa.vocabulary;
    const TopicModel model = load_topic_model(store.file(model_file(kind, variant)), vocab);
    const TopicIndex index = TopicIndex::from_model(model, model.content_hash());
    save_index(index, store.file(index_file(kind, variant)));
    c.out << "indexed " << index.size() << " pairs into " << index_file(kind, variant) << "\n";
  }
  ManifestEntry entry;
  entry.wall_time_seconds = seconds_since(start);
  store.record(Stage::index(variant), s, entry);
  return kExitOk;
}

struct QueryArgs {
  std::string text;
  std::string file;
  int top_k = 0;  // 0 = from config
  std::string format = "text";
  std::string method = "lda+";
  bool has_text = false;
};

int cmd_query(Context& c, const QueryArgs& a) {
  const Settings& s = c.settings;
  if (!a.has_text && a.file.empty()) throw ConfigError("query needs --text or --file");
  std::string text = a.text;
  if (!a.file.empty()) {
    require_file(a.file, "query file");
    text = read_file(a.file);
  }
  const Method method = parse_method(a.method);
  const int top_k = a.top_k != 0 ? a.top_k : static_cast<int>(s.integer("query.top_k"));
  const auto particles = s.integer("inference.particles");
  if (particles < 1) throw ConfigError("inference.particles must be at least 1");

  const ArtifactStore store = c.store();
  require_all(store, stages_for({method}), s);
  const LoadedSystem sys = load_system(s, store, {method});
  const std::string query_id = "query";
  QueryOptions opts;
  opts.mode = mode_for(method, s.get("evaluate.dagger") == "qa");
  opts.top_k = top_k;
  opts.particles = static_cast<int>(particles);
  opts.seed = query_seed(s.seed("inference.seed"), query_id);
  const RankedList ranked = query_pipeline(query_id, text, sys.resources(variant_for(method)), opts);
  if (ranked.low_confidence) log::warn("the query has no in-vocabulary words; results come from a uniform topic mix");

  if (a.format == "json") {
    nlohmann::ordered_json j;
    j["query_id"] = ranked.query_id;
    j["method"] = std::string(to_string(method));
    j["low_confidence"] = ranked.low_confidence;
    j["results"] = nlohmann::ordered_json::array();
    int rank = 1;
    for (const auto& e : ranked.entries) {
      j["results"].push_back({{"rank", rank++},
                              {"pair_id", e.pair_id},
                              {"score", e.score},
                              {"preview", sys.archive.preview(e.pair_id)}});
    }
    c.out << j.dump() << "\n";
    return kExitOk;
  }
  if (ranked.low_confidence) c.out << "# low-confidence: no in-vocabulary words\n";
  int rank = 1;
  for (const auto& e : ranked.entries) {
    c.out << rank++ << '\t' << e.pair_id << '\t' << std::fixed << std::setprecision(6) << e.score << '\t'
          << sys.archive.preview(e.pair_id) << '\n';
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::string qrels;
  std::string queries;
  std::string methods = "lda+,lda*,lda†";
  int cutoff = 0;  // 0 = from config
};

int cmd_evaluate(Context& c, const EvaluateArgs& a) {
  const auto start = Clock::now();
  const Settings& s = c.settings;
  const std::vector<Method> methods = parse_methods(a.methods);
  require_file(a.qrels, "--qrels");
  require_file(a.queries, "--queries");
  const int cutoff = a.cutoff != 0 ? a.cutoff : static_cast<int>(s.integer("evaluate.cutoff"));
  if (cutoff < 1) throw ConfigError("evaluate cutoff must be at least 1");
  const auto particles = s.integer("inference.particles");
  if (particles < 1) throw ConfigError("inference.particles must be at least 1");
  const Judgments judgments = Judgments::load(a.qrels);
  const std::vector<Query> queries = load_queries(a.queries);

  const ArtifactStore store = c.store();
  const std::vector<Stage> stages = stages_for(methods);
  require_all(store, stages, s);
  const LoadedSystem sys = load_system(s, store, methods);
  const bool dagger_qa = s.get("evaluate.dagger") == "qa";

  EvalReport report;
  for (const Method m : methods) {
    const QueryResources res = sys.resources(variant_for(m));
    std::vector<RankedList> rankings;
    rankings.reserve(queries.size());
    for (const auto& q : queries) {
      QueryOptions opts;
      opts.mode = mode_for(m, dagger_qa);
      opts.top_k = std::max(cutoff, kPrecisionCutoffs.back());
      opts.particles = static_cast<int>(particles);
      opts.seed = query_seed(s.seed("inference.seed"), q.id);
      rankings.push_back(query_pipeline(q.id, q.text, res, opts));
    }
    std::vector<std::string> warnings;
    report.results.push_back(
        evaluate_rankings(std::string(to_string(m)), s.get("evaluate.category"), rankings, judgments, warnings, cutoff));
    for (auto& w : warnings) {
      if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end()) {
        report.warnings.push_back(std::move(w));
      }
    }
  }

  // The report hash covers everything the numbers depend on, paths excluded.
  Fnv1a h;
  for (const auto& st : stages) h.update(stage_config_hash(st, s)).update("\n");
  for (const Method m : methods) h.update(to_string(m)).update(",");
  h.update(s.hash_of({"inference.particles", "inference.seed", "evaluate.dagger", "evaluate.category"}));
  h.update_u64(static_cast<std::uint64_t>(cutoff));
  h.update(store.hash(a.qrels)).update(store.hash(a.queries));
  for (const auto& [v, parts] : sys.variants) {
    h.update(parts->q_model.content_hash()).update(parts->qa_model.content_hash());
    if (parts->mlp) h.update(store.hash(store.file(regressor_file(v))));
  }
  report.config_hash = h.hex();
  for (const auto& w : report.warnings) log::warn(w);

  write_file_atomic(store.file(kReportJson), report.to_json());
  write_file_atomic(store.file(kReportText), report.to_table());
  ManifestEntry entry;
  entry.stage = "evaluate";
  entry.command = "evaluate";
  entry.config_hash = report.config_hash;
  entry.seed = s.seed("inference.seed");
  entry.inputs[fs::path(a.qrels).filename().string()] = store.hash(a.qrels);
  entry.inputs[fs::path(a.queries).filename().string()] = store.hash(a.queries);
  for (const auto& st : stages) {
    for (const auto& name : st.outputs()) entry.inputs[name] = store.hash(store.file(name));
  }
  entry.outputs[kReportJson] = hash_file(store.file(kReportJson));
  entry.outputs[kReportText] = hash_file(store.file(kReportText));
  entry.wall_time_seconds = seconds_since(start);
  fs::create_directories(store.dir() / "manifest");
  write_file_atomic(store.dir() / "manifest" / "evaluate.json", entry.to_json());

  c.out << report.to_table();
  return kExitOk;
}

struct SynthArgs {
  std::string out_dir;
  std::uint64_t seed = 1;
  bool run = false;
  std::string methods = "lda+,lda*,lda†";
};

int cmd_synth_bench(Context& c, const SynthArgs& a, const std::vector<std::string>& forwarded) {
  const std::vector<Method> methods = parse_methods(a.methods);
  LexicalGapParams params;
  params.seed = a.seed;
  const SyntheticCorpus syn = generate_lexical_gap_corpus(params);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_file_atomic(dir / "pairs.jsonl", pairs_to_jsonl(syn.pairs));
  write_file_atomic(dir / "queries.jsonl", queries_to_jsonl(syn.queries));
  write_file_atomic(dir / "qrels.tsv", syn.judgments.serialize());
  write_file_atomic(dir / "embeddings.txt", syn.embeddings_text);
  write_file_atomic(dir / "synth-bench.conf", synthetic_benchmark_config(a.seed));
  c.out << "wrote synthetic benchmark to " << dir.string() << ": " << syn.pairs.size() << " pairs, "
        << syn.queries.size() << " queries, " << std::fixed << std::setprecision(2) << syn.mean_relevant_per_query
        << " relevant pairs per query\n";
  c.out.unsetf(std::ios::floatfield);
  if (!a.run) return kExitOk;

  const std::string conf = (dir / "synth-bench.conf").string();
  auto step = [&](std::vector<std::string> args) {
    args.push_back("--config");
    args.push_back(conf);
    args.insert(args.end(), forwarded.begin(), forwarded.end());
    return run(args, c.out, c.err);
  };
  if (int rc = step({"ingest"}); rc != kExitOk) return rc;
  std::set<Variant> variants;
  std::set<Variant> regressed;
  for (const Method m : methods) {
    variants.insert(variant_for(m));
    if (m != Method::kLdaDagger) regressed.insert(variant_for(m));
  }
  for (const Variant v : variants) {
    const std::string vs(to_string(v));
    for (const char* col : {"q", "qa"}) {
      if (int rc = step({"train-lda", "--collection", col, "--variant", vs}); rc != kExitOk) return rc;
    }
    if (regressed.count(v) != 0) {
      if (int rc = step({"train-regressor", "--variant", vs}); rc != kExitOk) return rc;
    }
    if (int rc = step({"index", "--variant", vs}); rc != kExitOk) return rc;
  }
  return step({"evaluate", "--qrels", (dir / "qrels.tsv").string(), "--queries", (dir / "queries.jsonl").string(),
               "--methods", a.methods});
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kData:
    case ErrorKind::kIo: return kExitData;
    case ErrorKind::kStaleArtifact: return kExitStale;
  }
  return kExitData;
}

}  // namespace

std::string synthetic_benchmark_config(std::uint64_t seed) {
  std::ostringstream os;
  os << "# Lexical-gap synthetic benchmark, generator seed " << seed << ".\n"
     << "# Relative paths resolve against this file's directory.\n"
     << "artifacts = artifacts\n"
     << "corpus.input = pairs.jsonl\n"
     << "corpus.format = jsonl\n"
     << "corpus.min_token_count = 1\n"
     << "embeddings.path = embeddings.txt\n"
     << "q.topics = 5\n"
     << "q.alpha = 0.5\n"
     << "q.sweeps = 300\n"
     << "qa.topics = 5\n"
     << "qa.alpha = 0.5\n"
     << "qa.sweeps = 300\n"
     << "regressor.hidden = 32\n"
     << "evaluate.category = synthetic\n";
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank archived question-answer pairs by topical similarity to a new question."};
  app.name("cqarank");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::string log_level = "warn";
  app.add_option("-c,--config", config_path, "key = value settings file");
  app.add_option("--set", sets, "override one setting, key=value (repeatable)")->allow_extra_args(false);
  app.add_option("--log-level", log_level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));

  auto* ingest = app.add_subcommand("ingest", "parse corpus.input into the Q and QA collections");

  std::string collection = "q";
  std::string variant = "augmented";
  auto* train_lda = app.add_subcommand("train-lda", "train the Q or QA topic model");
  train_lda->add_option("--collection", collection, "q or qa")->required()->check(CLI::IsMember({"q", "qa"}));
  train_lda->add_option("--variant", variant, "augmented (embedding-smoothed) or plain")
      ->check(CLI::IsMember({"augmented", "plain"}));

  auto* train_reg = app.add_subcommand("train-regressor", "train the Q-to-QA topic regressor");
  train_reg->add_option("--variant", variant, "augmented or plain")->check(CLI::IsMember({"augmented", "plain"}));

  auto* index = app.add_subcommand("index", "build the topic indexes over every archived pair");
  index->add_option("--variant", variant, "augmented or plain")->check(CLI::IsMember({"augmented", "plain"}));

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "rank archived pairs for one new question");
  auto* text_opt = query->add_option("--text", qa.text, "question text");
  query->add_option("--file", qa.file, "file holding the question text")->excludes(text_opt);
  query->add_option("--top-k", qa.top_k, "number of results (overrides query.top_k)")
      ->check(CLI::PositiveNumber);
  query->add_option("--format", qa.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  query->add_option("--method", qa.method, "lda+, lda* or lda† (ASCII: lda-plus, lda-star, lda-dagger)");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "MAP and P@N for each method over judged queries");
  evaluate->add_option("--qrels", ea.qrels, "judgments: query_id<TAB>pair_id<TAB>relevance")->required();
  evaluate->add_option("--queries", ea.queries, "JSONL queries with id and text")->required();
  evaluate->add_option("--methods", ea.methods, "comma-separated methods");
  evaluate->add_option("--cutoff", ea.cutoff, "AP ranking depth (overrides evaluate.cutoff)")
      ->check(CLI::PositiveNumber);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth-bench", "write the synthetic lexical-gap benchmark, optionally run it");
  synth->add_option("--out", sa.out_dir, "output directory")->required();
  synth->add_option("--seed", sa.seed, "generator seed");
  synth->add_flag("--run", sa.run, "run the whole pipeline on the generated data");
  synth->add_option("--methods", sa.methods, "methods to evaluate with --run");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  static const std::map<std::string, log::Level> levels = {{"debug", log::Level::kDebug},
                                                           {"info", log::Level::kInfo},
                                                           {"warn", log::Level::kWarn},
                                                           {"error", log::Level::kError},
                                                           {"off", log::Level::kOff}};
  log::set_level(levels.at(log_level));

  try {
    Context ctx{Settings(), out, err};
    if (!config_path.empty()) ctx.settings.load_file(config_path);
    for (const auto& kv : sets) ctx.settings.assign(kv);

    if (ingest->parsed()) return cmd_ingest(ctx);
    if (train_lda->parsed()) return cmd_train_lda(ctx, parse_collection_kind(collection), parse_variant(variant));
    if (train_reg->parsed()) return cmd_train_regressor(ctx, parse_variant(variant));
    if (index->parsed()) return cmd_index(ctx, parse_variant(variant));
    if (query->parsed()) {
      qa.has_text = text_opt->count() > 0;
      return cmd_query(ctx, qa);
    }
    if (evaluate->parsed()) return cmd_evaluate(ctx, ea);
    if (synth->parsed()) {
      std::vector<std::string> forwarded;
      for (const auto& kv : sets) {
        forwarded.push_back("--set");
        forwarded.push_back(kv);
      }
      forwarded.push_back("--log-level");
      forwarded.push_back(log_level);
      return cmd_synth_bench(ctx, sa, forwarded);
    }
  } catch (const StaleArtifactError& e) {
    err << "error: " << e.what() << "\n";
    return kExitStale;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cqarank::cli
