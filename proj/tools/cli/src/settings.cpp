#include "cqarank/cli/settings.hpp"

#include <algorithm>
#include <charconv>

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"
#include "cqarank/hash.hpp"

namespace cqarank::cli {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool special_path_value(const std::string& key, const std::string& value) {
  return key == "normalize.stopwords" && (value == "builtin" || value == "none");
}

}  // namespace

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"artifacts", "artifacts", ValueKind::kPath, "directory holding every artifact and the manifest", {}},
      {"corpus.input", "", ValueKind::kPath, "archive file: JSONL pairs or a StackExchange Posts.xml", {}},
      {"corpus.format", "auto", ValueKind::kText, "input format; auto picks se-xml for *.xml", {"auto", "jsonl", "se-xml"}},
      {"corpus.profile", "stackexchange", ValueKind::kText, "which question fields form the question text",
       {"stackexchange", "yahoo"}},
      {"corpus.min_token_count", "3", ValueKind::kInteger, "tokens rarer than this are dropped", {}},
      {"normalize.stemmer", "suffix", ValueKind::kText, "base-form reduction", {"suffix", "none"}},
      {"normalize.stopwords", "builtin", ValueKind::kPath, "builtin, none, or a one-word-per-line file", {}},
      {"embeddings.path", "", ValueKind::kPath, "word vectors in text format (needed by augmented models)", {}},
      {"embeddings.tau", "0.7", ValueKind::kReal, "neighborhood similarity threshold", {}},
      {"embeddings.max_neighbors", "20", ValueKind::kInteger, "neighborhood size cap", {}},
      {"q.topics", "140", ValueKind::kInteger, "question model topic count", {}},
      {"q.alpha", "auto", ValueKind::kReal, "Dirichlet prior on theta; auto = 35 / topics", {}},
      {"q.beta", "0.01", ValueKind::kReal, "Dirichlet prior on phi", {}},
      {"q.lambda", "0.9", ValueKind::kReal, "weight of the count term against the embedding term", {}},
      {"q.sweeps", "1000", ValueKind::kInteger, "Gibbs sweeps", {}},
      {"q.seed", "11", ValueKind::kSeed, "sampler seed", {}},
      {"qa.topics", "160", ValueKind::kInteger, "question+answer model topic count", {}},
      {"qa.alpha", "auto", ValueKind::kReal, "Dirichlet prior on theta; auto = 35 / topics", {}},
      {"qa.beta", "0.01", ValueKind::kReal, "Dirichlet prior on phi", {}},
      {"qa.lambda", "0.9", ValueKind::kReal, "weight of the count term against the embedding term", {}},
      {"qa.sweeps", "1000", ValueKind::kInteger, "Gibbs sweeps", {}},
      {"qa.seed", "12", ValueKind::kSeed, "sampler seed", {}},
      {"regressor.hidden", "180", ValueKind::kInteger, "hidden units", {}},
      {"regressor.learning_rate", "0.05", ValueKind::kReal, "SGD step size", {}},
      {"regressor.momentum", "0.9", ValueKind::kReal, "SGD momentum", {}},
      {"regressor.batch_size", "64", ValueKind::kInteger, "minibatch size", {}},
      {"regressor.max_epochs", "200", ValueKind::kInteger, "epoch limit", {}},
      {"regressor.patience", "10", ValueKind::kInteger, "early-stopping patience in epochs", {}},
      {"regressor.validation_fraction", "0.1", ValueKind::kReal, "held-out share of training pairs", {}},
      {"regressor.seed", "13", ValueKind::kSeed, "initialisation and shuffling seed", {}},
      {"inference.particles", "20", ValueKind::kInteger, "left-to-right inference particles", {}},
      {"inference.seed", "14", ValueKind::kSeed, "base seed, mixed with each query id", {}},
      {"query.top_k", "10", ValueKind::kInteger, "results printed by query", {}},
      {"evaluate.cutoff", "10", ValueKind::kInteger, "ranking depth for AP", {}},
      {"evaluate.category", "default", ValueKind::kText, "label attached to report rows", {}},
      {"evaluate.dagger", "q", ValueKind::kText,
       "lda-dagger ranks in Q-model space (q) or infers under the QA model (qa)", {"q", "qa"}},
  };
  return specs;
}

Settings::Settings() {
  for (const auto& s : key_specs()) values_[s.key] = s.default_value;
}

const KeySpec& Settings::spec(const std::string& key) const {
  for (const auto& s : key_specs()) {
    if (s.key == key) return s;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void Settings::set_from(const std::string& key, std::string value, const std::filesystem::path& base_dir) {
  const KeySpec& s = spec(key);
  if (!s.choices.empty() && std::find(s.choices.begin(), s.choices.end(), value) == s.choices.end()) {
    std::string allowed;
    for (const auto& c : s.choices) allowed += (allowed.empty() ? "" : ", ") + c;
    throw ConfigError("config key '" + key + "' must be one of: " + allowed + " (got '" + value + "')");
  }
  if (s.kind == ValueKind::kPath && !value.empty() && !special_path_value(key, value)) {
    std::filesystem::path p(value);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    value = p.lexically_normal().string();
  }
  values_[key] = std::move(value);
  // Validate eagerly so errors point at the offending assignment.
  switch (s.kind) {
    case ValueKind::kInteger: integer(key); break;
    case ValueKind::kReal: if (values_[key] != "auto") real(key); break;
    case ValueKind::kSeed: seed(key); break;
    default: break;
  }
}

void Settings::set(const std::string& key, std::string value) { set_from(key, std::move(value), {}); }

void Settings::parse(std::string_view text, const std::filesystem::path& base_dir, std::string_view source) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const std::string line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line[0] == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(source) + " line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_from(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (end == text.size()) break;
  }
}

void Settings::load_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  const std::string text = read_file(path);
  parse(text, path.parent_path(), path.filename().string());
}

void Settings::assign(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  set_from(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), {});
}

const std::string& Settings::get(const std::string& key) const {
  spec(key);
  return values_.at(key);
}

long long Settings::integer(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double Settings::real(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t Settings::seed(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects a non-negative integer seed, got '" + v + "'");
  }
  return out;
}

std::filesystem::path Settings::path(const std::string& key) const { return std::filesystem::path(get(key)); }

std::string Settings::hash_of(const std::vector<std::string>& keys) const {
  Fnv1a h;
  for (const auto& k : keys) {
    h.update(k).update("=").update(get(k)).update("\n");
  }
  return h.hex();
}

Hyperparams Settings::lda(CollectionKind kind) const {
  const std::string p = kind == CollectionKind::kQ ? "q." : "qa.";
  Hyperparams hp = Hyperparams::for_topics(static_cast<int>(integer(p + "topics")));
  if (get(p + "alpha") != "auto") hp.alpha = real(p + "alpha");
  hp.beta = real(p + "beta");
  hp.lambda = real(p + "lambda");
  hp.sweeps = static_cast<int>(integer(p + "sweeps"));
  hp.seed = seed(p + "seed");
  hp.validate();
  return hp;
}

TrainConfig Settings::regressor() const {
  TrainConfig c;
  const auto hidden = integer("regressor.hidden");
  const auto batch = integer("regressor.batch_size");
  if (hidden <= 0) throw ConfigError("regressor.hidden must be positive");
  if (batch <= 0) throw ConfigError("regressor.batch_size must be positive");
  c.hidden = static_cast<std::size_t>(hidden);
  c.learning_rate = real("regressor.learning_rate");
  c.momentum = real("regressor.momentum");
  c.batch_size = static_cast<std::size_t>(batch);
  c.max_epochs = static_cast<int>(integer("regressor.max_epochs"));
  c.patience = static_cast<int>(integer("regressor.patience"));
  c.validation_fraction = real("regressor.validation_fraction");
  c.seed = seed("regressor.seed");
  c.validate();
  return c;
}

BuildOptions Settings::build() const {
  BuildOptions o;
  o.profile = parse_source_profile(get("corpus.profile"));
  const auto min_count = integer("corpus.min_token_count");
  if (min_count < 1) throw ConfigError("corpus.min_token_count must be at least 1");
  o.min_token_count = static_cast<std::uint32_t>(min_count);
  return o;
}

}  // namespace cqarank::cli
