#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "cqarank/cli/app.hpp"
#include "cqarank/cli/settings.hpp"
#include "cqarank/cli/stages.hpp"
#include "cqarank/error.hpp"
#include "cqarank/hash.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace cqarank::cli {
namespace {

namespace fs = std::filesystem;
using testing_support::slurp;
using testing_support::TempDir;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// ---------------------------------------------------------------------------
// Settings

TEST(Settings, DefaultsCoverEveryKey) {
  const Settings s;
  for (const auto& spec : key_specs()) EXPECT_EQ(s.get(spec.key), spec.default_value) << spec.key;
  EXPECT_EQ(s.integer("q.topics"), 140);
  EXPECT_EQ(s.integer("qa.topics"), 160);
  EXPECT_DOUBLE_EQ(s.lda(CollectionKind::kQ).alpha, 35.0 / 140.0);
  EXPECT_DOUBLE_EQ(s.lda(CollectionKind::kQA).alpha, 35.0 / 160.0);
  EXPECT_EQ(s.regressor().hidden, 180u);
  EXPECT_EQ(s.build().min_token_count, 3u);
}

TEST(Settings, FileParsingSkipsCommentsAndResolvesPathsAgainstTheFile) {
  TempDir dir;
  fs::create_directories(dir / "conf");
  const auto file = dir.write("conf/run.conf",
                              "# comment\n\n  q.topics = 7  \nq.alpha = 0.5\nembeddings.path = vec.txt\n"
                              "normalize.stopwords = none\nartifacts=/abs/out\n");
  Settings s;
  s.load_file(file);
  EXPECT_EQ(s.integer("q.topics"), 7);
  EXPECT_DOUBLE_EQ(s.lda(CollectionKind::kQ).alpha, 0.5);
  EXPECT_EQ(s.path("embeddings.path"), (dir / "conf" / "vec.txt").lexically_normal());
  EXPECT_EQ(s.get("normalize.stopwords"), "none");
  EXPECT_EQ(s.path("artifacts"), fs::path("/abs/out"));
}

TEST(Settings, ErrorsNameTheLine) {
  Settings s;
  try {
    s.parse("q.topics = 5\nnot.a.key = 1\n", {}, "x.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_TRUE(contains(e.what(), "x.conf line 2")) << e.what();
    EXPECT_TRUE(contains(e.what(), "not.a.key")) << e.what();
  }
  EXPECT_THROW(s.parse("q.topics = many\n", {}, "x"), ConfigError);
  EXPECT_THROW(s.parse("q.topics\n", {}, "x"), ConfigError);
  EXPECT_THROW(s.parse("corpus.profile = reddit\n", {}, "x"), ConfigError);
  EXPECT_THROW(s.parse("q.seed = -1\n", {}, "x"), ConfigError);
  EXPECT_THROW(s.load_file("/nonexistent/cqarank.conf"), ConfigError);
}

TEST(Settings, LaterAssignmentsWin) {
  Settings s;
  s.parse("q.sweeps = 10\n", {}, "x");
  s.assign("q.sweeps=20");
  EXPECT_EQ(s.integer("q.sweeps"), 20);
  EXPECT_THROW(s.assign("q.sweeps"), ConfigError);
  EXPECT_THROW(s.assign("nope=1"), ConfigError);
}

TEST(Settings, InvalidHyperparametersAreRejected) {
  Settings s;
  s.set("q.topics", "0");
  EXPECT_THROW(s.lda(CollectionKind::kQ), ConfigError);
  s.set("regressor.hidden", "0");
  EXPECT_THROW(s.regressor(), ConfigError);
  s.set("corpus.min_token_count", "0");
  EXPECT_THROW(s.build(), ConfigError);
}

TEST(Settings, SyntheticBenchmarkConfigParses) {
  Settings s;
  s.parse(synthetic_benchmark_config(3), "/data", "synth");
  EXPECT_EQ(s.integer("q.topics"), 5);
  EXPECT_EQ(s.integer("qa.topics"), 5);
  EXPECT_EQ(s.path("corpus.input"), fs::path("/data/pairs.jsonl"));
  EXPECT_EQ(s.path("artifacts"), fs::path("/data/artifacts"));
}

// ---------------------------------------------------------------------------
// Stages

TEST(Stages, ConfigHashesDependOnlyOnTheirOwnKeys) {
  const Settings base;
  const auto q = Stage::lda(CollectionKind::kQ, Variant::kAugmented);
  const auto q_plain = Stage::lda(CollectionKind::kQ, Variant::kPlain);
  const auto qa = Stage::lda(CollectionKind::kQA, Variant::kAugmented);
  const auto reg = Stage::regressor(Variant::kAugmented);

  Settings s = base;
  s.set("q.sweeps", "5");
  EXPECT_NE(stage_config_hash(q, s), stage_config_hash(q, base));
  EXPECT_EQ(stage_config_hash(qa, s), stage_config_hash(qa, base));
  EXPECT_EQ(stage_config_hash(reg, s), stage_config_hash(reg, base));

  s = base;
  s.set("embeddings.tau", "0.5");
  EXPECT_NE(stage_config_hash(q, s), stage_config_hash(q, base));
  EXPECT_EQ(stage_config_hash(q_plain, s), stage_config_hash(q_plain, base));

  s = base;
  s.set("regressor.seed", "99");
  EXPECT_NE(stage_config_hash(reg, s), stage_config_hash(reg, base));
  EXPECT_EQ(stage_config_hash(Stage::index(Variant::kAugmented), s),
            stage_config_hash(Stage::index(Variant::kAugmented), base));

  // Paths are not part of any hash; contents are tracked as inputs instead.
  s = base;
  s.set("artifacts", "/elsewhere");
  s.set("embeddings.path", "/elsewhere/v.txt");
  EXPECT_EQ(stage_config_hash(q, s), stage_config_hash(q, base));
}

TEST(Stages, NamesAndDependencies) {
  const auto idx = Stage::index(Variant::kPlain);
  EXPECT_EQ(idx.id(), "index-plain");
  EXPECT_EQ(idx.command(), "index --variant plain");
  EXPECT_EQ(idx.outputs(), (std::vector<std::string>{"index-q-plain.bin", "index-qa-plain.bin"}));
  ASSERT_EQ(idx.upstream().size(), 2u);
  EXPECT_EQ(idx.upstream()[1].command(), "train-lda --collection qa --variant plain");
  EXPECT_EQ(Stage::lda(CollectionKind::kQ, Variant::kAugmented).upstream()[0].id(), "ingest");
  EXPECT_TRUE(Stage::ingest().upstream().empty());
}

TEST(Stages, ManifestEntryRoundTrips) {
  ManifestEntry e;
  e.stage = "s";
  e.command = "c";
  e.config_hash = "h";
  e.seed = 7;
  e.inputs["a"] = "1";
  e.outputs["b"] = "2";
  e.extra["x"] = "y";
  e.wall_time_seconds = 1.5;
  const auto back = ManifestEntry::parse(e.to_json());
  EXPECT_EQ(back.to_json(), e.to_json());
  EXPECT_THROW(ManifestEntry::parse("{}"), DataError);
}

// ---------------------------------------------------------------------------
// Command line

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"train-lda"}).code, kExitUsage);  // --collection is required
  EXPECT_EQ(run_cli({"train-lda", "--collection", "x"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"ingest", "--set", "bogus=1"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"ingest", "--config", "/nonexistent.conf"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"ingest"}).code, kExitUsage);  // corpus.input unset
  EXPECT_EQ(run_cli({"query", "--text", "a", "--file", "b"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"evaluate", "--qrels", "q"}).code, kExitUsage);
}

TEST(Cli, HelpExitsWithZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_TRUE(contains(r.out, "synth-bench"));
}

TEST(Cli, DataErrorsExitWithTwo) {
  TempDir dir;
  const auto r = run_cli({"ingest", "--set", "corpus.input=" + (dir / "missing.jsonl").string(), "--set",
                          "artifacts=" + (dir / "a").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_TRUE(contains(r.err, "missing.jsonl"));

  const auto bad = dir.write("bad.jsonl", "{\"title\": \"no id or body\"}\n");
  const auto r2 = run_cli({"ingest", "--set", "corpus.input=" + bad.string(), "--set",
                           "artifacts=" + (dir / "a").string(), "--log-level", "off"});
  EXPECT_EQ(r2.code, kExitData);
  EXPECT_TRUE(contains(r2.err, "no usable"));
}

TEST(Cli, IngestsStackExchangePosts) {
  TempDir dir;
  const auto posts = dir.write(
      "Posts.xml",
      "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n"
      "  <row Id=\"1\" PostTypeId=\"1\" Title=\"Projecting rasters\" Body=\"&lt;p&gt;How do I reproject a raster?&lt;/p&gt;\" "
      "Tags=\"&lt;gis&gt;\" />\n"
      "  <row Id=\"2\" PostTypeId=\"2\" ParentId=\"1\" Body=\"&lt;p&gt;Use gdalwarp.&lt;/p&gt;\" />\n"
      "</posts>\n");
  const auto r = run_cli({"ingest", "--set", "corpus.input=" + posts.string(), "--set",
                          "artifacts=" + (dir / "a").string(), "--set", "corpus.min_token_count=1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(contains(r.out, "ingested 1 pairs"));
  EXPECT_TRUE(fs::exists(dir / "a" / "corpus.json"));
  EXPECT_TRUE(fs::exists(dir / "a" / "manifest" / "ingest.json"));
}

// One small benchmark directory trained once and copied by tests that mutate it.
class CliPipeline : public ::testing::Test {
 protected:
  static std::vector<std::string> args(const fs::path& root, std::vector<std::string> a) {
    for (const std::string kv : {"q.sweeps=20", "qa.sweeps=20", "regressor.max_epochs=20"}) {
      a.push_back("--set");
      a.push_back(kv);
    }
    a.insert(a.end(), {"--config", (root / "synth-bench.conf").string(), "--log-level", "error"});
    return a;
  }

  static void train_all(const fs::path& root) {
    for (const std::vector<std::string>& cmd : std::vector<std::vector<std::string>>{
             {"ingest"},
             {"train-lda", "--collection", "q"},
             {"train-lda", "--collection", "qa"},
             {"train-regressor"},
             {"index"}}) {
      const auto r = run_cli(args(root, cmd));
      ASSERT_EQ(r.code, kExitOk) << cmd[0] << ": " << r.err;
    }
  }

  static void SetUpTestSuite() {
    dir_ = std::make_unique<TempDir>();
    const auto r = run_cli({"synth-bench", "--out", dir_->path().string(), "--seed", "2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    train_all(dir_->path());
  }
  static void TearDownTestSuite() { dir_.reset(); }

  /// Fresh copy of the trained directory.
  static std::unique_ptr<TempDir> copy() {
    auto d = std::make_unique<TempDir>();
    fs::copy(dir_->path(), d->path(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    return d;
  }

  static fs::path root() { return dir_->path(); }
  static fs::path artifact(const fs::path& r, const std::string& name) { return r / "artifacts" / name; }

  static inline std::unique_ptr<TempDir> dir_;
};

TEST_F(CliPipeline, SynthBenchWritesItsInputs) {
  for (const char* f : {"pairs.jsonl", "queries.jsonl", "qrels.tsv", "embeddings.txt", "synth-bench.conf"}) {
    EXPECT_TRUE(fs::exists(root() / f)) << f;
  }
  EXPECT_EQ(line_count(slurp(root() / "pairs.jsonl")), 500u);
  EXPECT_EQ(line_count(slurp(root() / "queries.jsonl")), 20u);
}

TEST_F(CliPipeline, QueryPrintsTopK) {
  const auto r = run_cli(args(root(), {"query", "--text", "qaax qabx qacx"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(line_count(r.out), 10u);
  EXPECT_EQ(r.out.substr(0, 2), "1\t");

  auto a = args(root(), {"query", "--text", "qaax qabx qacx"});
  a.insert(a.end(), {"--set", "query.top_k=4"});
  EXPECT_EQ(line_count(run_cli(a).out), 4u);
  a.insert(a.end(), {"--top-k", "2"});
  EXPECT_EQ(line_count(run_cli(a).out), 2u);  // flag beats --set
}

TEST_F(CliPipeline, QueryJsonAndFileInput) {
  const std::string text = "qaax qaax qabx";
  const auto r = run_cli(args(root(), {"query", "--text", text, "--format", "json", "--top-k", "3"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("method"), "lda+");
  EXPECT_FALSE(j.at("low_confidence").get<bool>());
  ASSERT_EQ(j.at("results").size(), 3u);
  EXPECT_EQ(j.at("results")[0].at("rank"), 1);
  EXPECT_FALSE(j.at("results")[0].at("preview").get<std::string>().empty());

  TempDir tmp;
  const auto file = tmp.write("q.txt", text);
  const auto from_file =
      run_cli(args(root(), {"query", "--file", file.string(), "--format", "json", "--top-k", "3"}));
  ASSERT_EQ(from_file.code, kExitOk) << from_file.err;
  EXPECT_EQ(from_file.out, r.out);
}

TEST_F(CliPipeline, EmptyQueryIsFlaggedLowConfidence) {
  const auto r = run_cli(args(root(), {"query", "--text", "", "--format", "json"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(nlohmann::json::parse(r.out).at("low_confidence").get<bool>());
}

TEST_F(CliPipeline, DaggerQueryNeedsNoRegressor) {
  auto d = copy();
  fs::remove(artifact(d->path(), "regressor-augmented.bin"));
  EXPECT_EQ(run_cli(args(d->path(), {"query", "--text", "qaax", "--method", "lda-dagger"})).code, kExitOk);
  const auto r = run_cli(args(d->path(), {"query", "--text", "qaax", "--method", "lda+"}));
  EXPECT_EQ(r.code, kExitStale);
  EXPECT_TRUE(contains(r.err, "train-regressor --variant augmented")) << r.err;
}

TEST_F(CliPipeline, EvaluateWritesReport) {
  auto d = copy();
  const auto r = run_cli(args(d->path(), {"evaluate", "--qrels", (d->path() / "qrels.tsv").string(), "--queries",
                                          (d->path() / "queries.jsonl").string(), "--methods",
                                          "lda-plus,lda-dagger"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(contains(r.out, "lda+"));
  const auto report = nlohmann::json::parse(slurp(artifact(d->path(), "report.json")));
  ASSERT_EQ(report.at("results").size(), 2u);
  EXPECT_EQ(report.at("results")[1].at("method"), "lda†");
  for (const auto& row : report.at("results")) {
    EXPECT_EQ(row.at("category"), "synthetic");
    EXPECT_EQ(row.at("average_precision").size(), 20u);
    for (const char* k : {"map", "p@1", "p@2", "p@4", "p@7", "p@10"}) {
      EXPECT_GE(row.at(k).get<double>(), 0.0);
      EXPECT_LE(row.at(k).get<double>(), 1.0);
    }
  }
  EXPECT_TRUE(fs::exists(artifact(d->path(), "report.txt")));
  EXPECT_TRUE(fs::exists(artifact(d->path(), "manifest/evaluate.json")));
}

TEST_F(CliPipeline, EvaluateListsEveryMissingStage) {
  auto d = copy();
  const auto r = run_cli(args(d->path(), {"evaluate", "--qrels", (d->path() / "qrels.tsv").string(), "--queries",
                                          (d->path() / "queries.jsonl").string()}));
  EXPECT_EQ(r.code, kExitStale);
  EXPECT_TRUE(contains(r.err, "train-regressor --variant plain")) << r.err;
  EXPECT_TRUE(contains(r.err, "index --variant plain")) << r.err;
}

TEST_F(CliPipeline, QueryBeforeIndexNamesTheIndexStage) {
  auto d = copy();
  for (const char* f : {"index-q-augmented.bin", "index-qa-augmented.bin", "manifest/index-augmented.json"}) {
    fs::remove(artifact(d->path(), f));
  }
  const auto r = run_cli(args(d->path(), {"query", "--text", "qaax"}));
  EXPECT_EQ(r.code, kExitStale);
  EXPECT_TRUE(contains(r.err, "index --variant augmented")) << r.err;

  TempDir empty;
  const auto none = run_cli({"query", "--text", "x", "--set", "artifacts=" + empty.path().string()});
  EXPECT_EQ(none.code, kExitStale);
  EXPECT_TRUE(contains(none.err, "index")) << none.err;
}

TEST_F(CliPipeline, ChangedConfigNamesTheStageToRerun) {
  auto a = args(root(), {"query", "--text", "qaax"});
  a.insert(a.end(), {"--set", "qa.beta=0.02"});
  const auto r = run_cli(a);
  EXPECT_EQ(r.code, kExitStale);
  EXPECT_TRUE(contains(r.err, "artifact out of date")) << r.err;
  EXPECT_TRUE(contains(r.err, "train-lda --collection qa --variant augmented")) << r.err;

  auto b = args(root(), {"query", "--text", "qaax"});
  b.insert(b.end(), {"--set", "regressor.hidden=8"});
  const auto r2 = run_cli(b);
  EXPECT_EQ(r2.code, kExitStale);
  EXPECT_TRUE(contains(r2.err, "train-regressor --variant augmented")) << r2.err;

  // Settings that no artifact depends on do not invalidate anything.
  auto c = args(root(), {"query", "--text", "qaax"});
  c.insert(c.end(), {"--set", "inference.particles=3"});
  EXPECT_EQ(run_cli(c).code, kExitOk);
}

TEST_F(CliPipeline, TamperedArtifactIsStale) {
  auto d = copy();
  {
    std::ofstream f(artifact(d->path(), "model-qa-augmented.bin"), std::ios::app | std::ios::binary);
    f << 'x';
  }
  const auto r = run_cli(args(d->path(), {"query", "--text", "qaax"}));
  EXPECT_EQ(r.code, kExitStale);
  EXPECT_TRUE(contains(r.err, "train-lda --collection qa")) << r.err;
}

TEST_F(CliPipeline, ChangedCorpusInputInvalidatesIngest) {
  auto d = copy();
  {
    std::ofstream f(d->path() / "pairs.jsonl", std::ios::app | std::ios::binary);
    f << "{\"id\":\"extra\",\"body\":\"qaax qabx\",\"answers\":[\"qbax\"]}\n";
  }
  const auto r = run_cli(args(d->path(), {"train-lda", "--collection", "q"}));
  EXPECT_EQ(r.code, kExitStale);
  EXPECT_TRUE(contains(r.err, "`cqarank ingest`")) << r.err;
  const auto q = run_cli(args(d->path(), {"query", "--text", "qaax"}));
  EXPECT_EQ(q.code, kExitStale);
}

TEST_F(CliPipeline, RerunWithUnchangedInputsIsByteIdentical) {
  auto d = copy();
  const auto before_model = slurp(artifact(d->path(), "model-q-augmented.bin"));
  const auto before_corpus = slurp(artifact(d->path(), "corpus.json"));
  const auto before_index = slurp(artifact(d->path(), "index-qa-augmented.bin"));
  const auto before_reg = slurp(artifact(d->path(), "regressor-augmented.bin"));
  train_all(d->path());
  EXPECT_EQ(slurp(artifact(d->path(), "corpus.json")), before_corpus);
  EXPECT_EQ(slurp(artifact(d->path(), "model-q-augmented.bin")), before_model);
  EXPECT_EQ(slurp(artifact(d->path(), "index-qa-augmented.bin")), before_index);
  EXPECT_EQ(slurp(artifact(d->path(), "regressor-augmented.bin")), before_reg);
}

TEST_F(CliPipeline, TrainingDoesNotTouchUpstreamArtifacts) {
  auto d = copy();
  const auto corpus = hash_file(artifact(d->path(), "corpus.json"));
  const auto model = hash_file(artifact(d->path(), "model-q-augmented.bin"));
  ASSERT_EQ(run_cli(args(d->path(), {"train-regressor"})).code, kExitOk);
  ASSERT_EQ(run_cli(args(d->path(), {"index"})).code, kExitOk);
  EXPECT_EQ(hash_file(artifact(d->path(), "corpus.json")), corpus);
  EXPECT_EQ(hash_file(artifact(d->path(), "model-q-augmented.bin")), model);
}

TEST_F(CliPipeline, ManifestRecordsBasenamesSeedAndWallTime) {
  const auto e = ManifestEntry::parse(slurp(artifact(root(), "manifest/train-lda-q-augmented.json")));
  EXPECT_EQ(e.command, "train-lda --collection q --variant augmented");
  ASSERT_TRUE(e.seed.has_value());
  EXPECT_EQ(*e.seed, 11u);
  EXPECT_GE(e.wall_time_seconds, 0.0);
  EXPECT_EQ(e.inputs.size(), 2u);
  EXPECT_EQ(e.inputs.count("corpus.json"), 1u);
  EXPECT_EQ(e.inputs.count("embeddings.txt"), 1u);
  for (const auto& [name, hash] : e.inputs) EXPECT_EQ(name.find('/'), std::string::npos) << name;
  EXPECT_EQ(e.outputs.at("model-q-augmented.bin"), hash_file(artifact(root(), "model-q-augmented.bin")));

  const auto archive = slurp(artifact(root(), "corpus.json"));
  EXPECT_FALSE(contains(archive, root().string()));
}

TEST_F(CliPipeline, LdaModelsTrainConcurrently) {
  auto d = copy();
  for (const char* f : {"model-q-plain.bin", "model-qa-plain.bin"}) fs::remove(artifact(d->path(), f));
  Result rq;
  Result rqa;
  std::thread tq([&] { rq = run_cli(args(d->path(), {"train-lda", "--collection", "q", "--variant", "plain"})); });
  std::thread tqa([&] { rqa = run_cli(args(d->path(), {"train-lda", "--collection", "qa", "--variant", "plain"})); });
  tq.join();
  tqa.join();
  ASSERT_EQ(rq.code, kExitOk) << rq.err;
  ASSERT_EQ(rqa.code, kExitOk) << rqa.err;
  EXPECT_TRUE(fs::exists(artifact(d->path(), "manifest/train-lda-q-plain.json")));
  EXPECT_TRUE(fs::exists(artifact(d->path(), "manifest/train-lda-qa-plain.json")));
  EXPECT_EQ(run_cli(args(d->path(), {"index", "--variant", "plain"})).code, kExitOk);
}

}  // namespace
}  // namespace cqarank::cli
