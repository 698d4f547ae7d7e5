#pragma once

// Pipeline configuration: a flat key = value text file.
//
//   # comment
//   q.topics = 140
//   embeddings.path = vectors.txt
//
// Every key has a default; unknown keys are rejected. Relative paths in a
// config file resolve against the file's directory, relative paths given on
// the command line resolve against the working directory.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cqarank/corpus.hpp"
#include "cqarank/regressor.hpp"
#include "cqarank/topicmodel.hpp"

namespace cqarank::cli {

enum class ValueKind { kText, kPath, kInteger, kReal, kSeed };

struct KeySpec {
  std::string key;
  std::string default_value;
  ValueKind kind;
  std::string help;
  std::vector<std::string> choices;  // empty = unrestricted
};

/// Every recognised key, in documentation order.
const std::vector<KeySpec>& key_specs();

class Settings {
 public:
  Settings();

  void load_file(const std::filesystem::path& path);
  void parse(std::string_view text, const std::filesystem::path& base_dir, std::string_view source);
  /// "key=value" from the command line.
  void assign(std::string_view assignment);
  void set(const std::string& key, std::string value);

  const std::string& get(const std::string& key) const;
  bool empty(const std::string& key) const { return get(key).empty(); }
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  std::filesystem::path path(const std::string& key) const;

  /// Values of `keys` as "key=value" lines, hashed.
  std::string hash_of(const std::vector<std::string>& keys) const;

  /// "q" or "qa" topic model hyperparameters.
  Hyperparams lda(CollectionKind kind) const;
  TrainConfig regressor() const;
  BuildOptions build() const;

 private:
  const KeySpec& spec(const std::string& key) const;
  void set_from(const std::string& key, std::string value, const std::filesystem::path& base_dir);

  std::map<std::string, std::string> values_;
};

}  // namespace cqarank::cli
