#pragma once

// Pipeline stages, their artifacts, and manifest-based staleness checks.
//
// Each stage writes its artifacts into the artifacts directory and one
// manifest entry, artifacts/manifest/<stage id>.json, recording the hashes
// of its inputs and outputs, its config hash, seed and wall time. Entries are
// separate files so that stages may run concurrently.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqarank/cli/settings.hpp"
#include "cqarank/corpus.hpp"
#include "cqarank/pipeline.hpp"

namespace cqarank::cli {

inline constexpr const char* kCorpusFile = "corpus.json";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";

std::string model_file(CollectionKind c, Variant v);
std::string index_file(CollectionKind c, Variant v);
std::string regressor_file(Variant v);
std::string neighborhoods_file(CollectionKind c);

enum class StageKind { kIngest, kTrainLda, kTrainRegressor, kIndex };

struct Stage {
  StageKind kind = StageKind::kIngest;
  CollectionKind collection = CollectionKind::kQ;
  Variant variant = Variant::kAugmented;

  static Stage ingest() { return {}; }
  static Stage lda(CollectionKind c, Variant v) { return {StageKind::kTrainLda, c, v}; }
  static Stage regressor(Variant v) { return {StageKind::kTrainRegressor, CollectionKind::kQ, v}; }
  static Stage index(Variant v) { return {StageKind::kIndex, CollectionKind::kQ, v}; }

  /// Manifest file stem, e.g. "train-lda-q-augmented".
  std::string id() const;
  /// Command line that (re)builds this stage, e.g. "index --variant plain".
  std::string command() const;
  std::vector<std::string> outputs() const;
  std::vector<Stage> upstream() const;
};

/// Hash of every setting the stage's artifacts depend on.
std::string stage_config_hash(const Stage& stage, const Settings& settings);
/// Files outside the artifacts directory that the stage reads.
std::vector<std::filesystem::path> external_inputs(const Stage& stage, const Settings& settings);

struct ManifestEntry {
  std::string stage;
  std::string command;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> inputs;   // file name -> content hash
  std::map<std::string, std::string> outputs;  // file name -> content hash
  std::map<std::string, std::string> extra;
  double wall_time_seconds = 0.0;

  std::string to_json() const;
  static ManifestEntry parse(std::string_view json_text);
};

struct Problem {
  std::string message;
  std::string rerun;  // command of the stage to rerun
};

class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }
  std::filesystem::path manifest_path(const Stage& stage) const;

  std::optional<ManifestEntry> entry(const Stage& stage) const;

  /// Fills inputs/outputs/config hash from the current files and writes the
  /// entry atomically.
  void record(const Stage& stage, const Settings& settings, ManifestEntry entry) const;

  /// First reason the stage's artifacts are missing or out of date, walking
  /// upstream stages first.
  std::optional<Problem> problem(const Stage& stage, const Settings& settings) const;
  /// Throws StaleArtifactError naming the stage to rerun.
  void require_current(const Stage& stage, const Settings& settings) const;

  std::string hash(const std::filesystem::path& path) const;

 private:
  std::filesystem::path dir_;
  mutable std::map<std::string, std::string> hash_cache_;
};

}  // namespace cqarank::cli
