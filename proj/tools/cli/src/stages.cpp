#include "cqarank/cli/stages.hpp"

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"
#include "cqarank/hash.hpp"
#include "json.hpp"

namespace cqarank::cli {
namespace {

using json = nlohmann::ordered_json;

std::string kind_name(CollectionKind c) { return c == CollectionKind::kQ ? "q" : "qa"; }

std::string variant_name(Variant v) { return std::string(to_string(v)); }

std::vector<std::string> lda_keys(CollectionKind c) {
  const std::string p = kind_name(c) + ".";
  return {p + "topics", p + "alpha", p + "beta", p + "lambda", p + "sweeps", p + "seed"};
}

std::vector<std::string> regressor_keys() {
  return {"regressor.hidden",     "regressor.learning_rate", "regressor.momentum",
          "regressor.batch_size", "regressor.max_epochs",    "regressor.patience",
          "regressor.validation_fraction", "regressor.seed"};
}

bool stopwords_from_file(const Settings& s) {
  const auto& v = s.get("normalize.stopwords");
  return v != "builtin" && v != "none";
}

}  // namespace

std::string model_file(CollectionKind c, Variant v) { return "model-" + kind_name(c) + "-" + variant_name(v) + ".bin"; }
std::string index_file(CollectionKind c, Variant v) { return "index-" + kind_name(c) + "-" + variant_name(v) + ".bin"; }
std::string regressor_file(Variant v) { return "regressor-" + variant_name(v) + ".bin"; }
std::string neighborhoods_file(CollectionKind c) { return "neighborhoods-" + kind_name(c) + ".bin"; }

std::string Stage::id() const {
  switch (kind) {
    case StageKind::kIngest: return "ingest";
    case StageKind::kTrainLda: return "train-lda-" + kind_name(collection) + "-" + variant_name(variant);
    case StageKind::kTrainRegressor: return "train-regressor-" + variant_name(variant);
    case StageKind::kIndex: return "index-" + variant_name(variant);
  }
  return {};
}

std::string Stage::command() const {
  switch (kind) {
    case StageKind::kIngest: return "ingest";
    case StageKind::kTrainLda:
      return "train-lda --collection " + kind_name(collection) + " --variant " + variant_name(variant);
    case StageKind::kTrainRegressor: return "train-regressor --variant " + variant_name(variant);
    case StageKind::kIndex: return "index --variant " + variant_name(variant);
  }
  return {};
}

std::vector<std::string> Stage::outputs() const {
  switch (kind) {
    case StageKind::kIngest: return {kCorpusFile};
    case StageKind::kTrainLda: return {model_file(collection, variant)};
    case StageKind::kTrainRegressor: return {regressor_file(variant)};
    case StageKind::kIndex:
      return {index_file(CollectionKind::kQ, variant), index_file(CollectionKind::kQA, variant)};
  }
  return {};
}

std::vector<Stage> Stage::upstream() const {
  switch (kind) {
    case StageKind::kIngest: return {};
    case StageKind::kTrainLda: return {Stage::ingest()};
    case StageKind::kTrainRegressor:
    case StageKind::kIndex:
      return {Stage::lda(CollectionKind::kQ, variant), Stage::lda(CollectionKind::kQA, variant)};
  }
  return {};
}

std::string stage_config_hash(const Stage& stage, const Settings& settings) {
  Fnv1a h;
  h.update(stage.id()).update("\n");
  switch (stage.kind) {
    case StageKind::kIngest:
      h.update(settings.hash_of({"corpus.format", "corpus.profile", "corpus.min_token_count", "normalize.stemmer"}));
      // A stopword file is tracked by content, not by path.
      h.update(stopwords_from_file(settings) ? "file" : settings.get("normalize.stopwords"));
      break;
    case StageKind::kTrainLda:
      h.update(settings.hash_of(lda_keys(stage.collection)));
      if (stage.variant == Variant::kAugmented) {
        h.update(settings.hash_of({"embeddings.tau", "embeddings.max_neighbors"}));
      }
      break;
    case StageKind::kTrainRegressor: h.update(settings.hash_of(regressor_keys())); break;
    case StageKind::kIndex: break;
  }
  return h.hex();
}

std::vector<std::filesystem::path> external_inputs(const Stage& stage, const Settings& settings) {
  std::vector<std::filesystem::path> out;
  if (stage.kind == StageKind::kIngest) {
    if (!settings.empty("corpus.input")) out.push_back(settings.path("corpus.input"));
    if (stopwords_from_file(settings)) out.push_back(settings.path("normalize.stopwords"));
  }
  if (stage.kind == StageKind::kTrainLda && stage.variant == Variant::kAugmented &&
      !settings.empty("embeddings.path")) {
    out.push_back(settings.path("embeddings.path"));
  }
  return out;
}

std::string ManifestEntry::to_json() const {
  json j;
  j["stage"] = stage;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["inputs"] = json::object();
  for (const auto& [k, v] : inputs) j["inputs"][k] = v;
  j["outputs"] = json::object();
  for (const auto& [k, v] : outputs) j["outputs"][k] = v;
  j["extra"] = json::object();
  for (const auto& [k, v] : extra) j["extra"][k] = v;
  j["wall_time_seconds"] = wall_time_seconds;
  return j.dump(2) + "\n";
}

ManifestEntry ManifestEntry::parse(std::string_view json_text) {
  ManifestEntry e;
  try {
    const json j = json::parse(json_text);
    e.stage = j.at("stage").get<std::string>();
    e.command = j.at("command").get<std::string>();
    e.config_hash = j.at("config_hash").get<std::string>();
    if (!j.at("seed").is_null()) e.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("inputs").items()) e.inputs[k] = v.get<std::string>();
    for (const auto& [k, v] : j.at("outputs").items()) e.outputs[k] = v.get<std::string>();
    for (const auto& [k, v] : j.at("extra").items()) e.extra[k] = v.get<std::string>();
    e.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  } catch (const json::exception& ex) {
    throw DataError(std::string("malformed manifest entry: ") + ex.what());
  }
  return e;
}

ArtifactStore::ArtifactStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ArtifactStore::manifest_path(const Stage& stage) const {
  return dir_ / "manifest" / (stage.id() + ".json");
}

std::optional<ManifestEntry> ArtifactStore::entry(const Stage& stage) const {
  const auto p = manifest_path(stage);
  if (!std::filesystem::exists(p)) return std::nullopt;
  return ManifestEntry::parse(read_file(p));
}

std::string ArtifactStore::hash(const std::filesystem::path& path) const {
  const std::string key = path.string();
  auto it = hash_cache_.find(key);
  if (it != hash_cache_.end()) return it->second;
  return hash_cache_[key] = hash_file(path);
}

void ArtifactStore::record(const Stage& stage, const Settings& settings, ManifestEntry entry) const {
  entry.stage = stage.id();
  entry.command = stage.command();
  entry.config_hash = stage_config_hash(stage, settings);
  for (const auto& up : stage.upstream()) {
    for (const auto& name : up.outputs()) entry.inputs[name] = hash(file(name));
  }
  for (const auto& p : external_inputs(stage, settings)) entry.inputs[p.filename().string()] = hash(p);
  for (const auto& name : stage.outputs()) {
    hash_cache_.erase(file(name).string());
    entry.outputs[name] = hash(file(name));
  }
  std::filesystem::create_directories(manifest_path(stage).parent_path());
  write_file_atomic(manifest_path(stage), entry.to_json());
}

std::optional<Problem> ArtifactStore::problem(const Stage& stage, const Settings& settings) const {
  const std::string rerun = stage.command();
  const auto outputs = stage.outputs();
  for (const auto& name : outputs) {
    if (!std::filesystem::exists(file(name))) {
      return Problem{"missing artifact " + name + ": run `cqarank " + rerun + "` first", rerun};
    }
  }
  const auto e = entry(stage);
  if (!e) {
    return Problem{"artifact out of date: " + outputs.front() + " has no manifest entry; rerun `cqarank " + rerun + "`",
                   rerun};
  }
  for (const auto& name : outputs) {
    const auto it = e->outputs.find(name);
    if (it == e->outputs.end() || it->second != hash(file(name))) {
      return Problem{"artifact out of date: " + name + " differs from the copy `cqarank " + rerun +
                         "` recorded; rerun it",
                     rerun};
    }
  }
  if (e->config_hash != stage_config_hash(stage, settings)) {
    return Problem{"artifact out of date: configuration for `cqarank " + rerun + "` changed since " +
                       outputs.front() + " was built; rerun it",
                   rerun};
  }
  for (const auto& up : stage.upstream()) {
    if (auto p = problem(up, settings)) return p;
    for (const auto& name : up.outputs()) {
      const auto it = e->inputs.find(name);
      if (it == e->inputs.end() || it->second != hash(file(name))) {
        return Problem{"artifact out of date: " + name + " changed after `cqarank " + rerun + "` ran; rerun it",
                       rerun};
      }
    }
  }
  for (const auto& p : external_inputs(stage, settings)) {
    if (!std::filesystem::exists(p)) continue;  // not needed by the current command
    const auto it = e->inputs.find(p.filename().string());
    if (it == e->inputs.end() || it->second != hash(p)) {
      return Problem{"artifact out of date: input " + p.filename().string() + " changed after `cqarank " + rerun +
                         "` ran; rerun it",
                     rerun};
    }
  }
  return std::nullopt;
}

void ArtifactStore::require_current(const Stage& stage, const Settings& settings) const {
  if (auto p = problem(stage, settings)) throw StaleArtifactError(p->message, p->rerun);
}

}  // namespace cqarank::cli
