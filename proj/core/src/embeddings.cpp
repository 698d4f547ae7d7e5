#include "cqarank/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <thread>

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"
#include "cqarank/hash.hpp"
#include "cqarank/logging.hpp"

namespace cqarank {

EmbeddingTable::EmbeddingTable(std::size_t vocab_size, std::size_t dimension)
    : dimension_(dimension), data_(vocab_size * dimension, 0.0), present_(vocab_size, 0) {}

std::size_t EmbeddingTable::embedded_count() const {
  return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), std::uint8_t{1}));
}

std::span<const double> EmbeddingTable::vector(TokenId id) const {
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(id) * dimension_, dimension_);
}

void EmbeddingTable::set_vector(TokenId id, std::span<const double> values) {
  if (values.size() != dimension_) throw DataError("embedding vector has wrong dimension");
  std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(id) * dimension_);
  present_.at(static_cast<std::size_t>(id)) = 1;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_count(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

EmbeddingTable parse_embeddings(std::string_view text, const Vocabulary& vocab) {
  std::size_t dimension = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<std::pair<TokenId, std::vector<double>>> rows;
  std::vector<double> values;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2 && is_count(fields[0]) && is_count(fields[1])) {
      dimension = static_cast<std::size_t>(std::stoull(std::string(fields[1])));
      if (dimension == 0) throw DataError("embedding header declares dimension 0");
      continue;
    }
    if (fields.size() < 2) {
      throw DataError("embedding line " + std::to_string(line_no) + " has no vector components");
    }
    const std::size_t r = fields.size() - 1;
    if (dimension == 0) dimension = r;
    if (r != dimension) {
      throw DataError("embedding line " + std::to_string(line_no) + " has " + std::to_string(r) +
                      " components, expected " + std::to_string(dimension));
    }
    values.assign(r, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      if (!parse_double(fields[k + 1], values[k]) || !std::isfinite(values[k])) {
        throw DataError("embedding line " + std::to_string(line_no) + " has a non-numeric or non-finite component");
      }
    }
    const TokenId id = vocab.find(fields[0]);
    if (id == kOutOfVocabulary) continue;
    if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; })) {
      log::warn("embedding line ", line_no, ": zero vector for '", fields[0], "' treated as missing");
      continue;
    }
    rows.emplace_back(id, values);
  }

  EmbeddingTable table(vocab.size(), dimension);
  for (const auto& [id, vec] : rows) table.set_vector(id, vec);
  if (table.embedded_count() == 0) {
    throw DataError("embedding/vocabulary mismatch: no vocabulary word has a vector");
  }
  const std::size_t missing = vocab.size() - table.embedded_count();
  if (missing > 0) {
    log::info(missing, " of ", vocab.size(), " vocabulary words are out-of-embedding");
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab) {
  const std::string text = read_file(path);
  EmbeddingTable table = parse_embeddings(text, vocab);
  table.set_source_hash(hash_bytes(text));
  return table;
}

double cosine(std::span<const double> u, std::span<const double> w) {
  if (u.size() != w.size()) throw DataError("undefined similarity: dimension mismatch");
  double dot = 0.0;
  double nu = 0.0;
  double nw = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * w[i];
    nu += u[i] * u[i];
    nw += w[i] * w[i];
  }
  if (nu == 0.0 || nw == 0.0) throw DataError("undefined similarity: zero vector");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nw));
  return std::clamp(c, -1.0, 1.0);
}

std::size_t Neighborhoods::total_size() const {
  std::size_t n = 0;
  for (const auto& l : lists_) n += l.size();
  return n;
}

Neighborhoods build_neighborhoods(const EmbeddingTable& table, double tau, std::size_t max_neighbors,
                                  unsigned threads) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("neighborhood threshold tau must lie in (0, 1)");
  if (max_neighbors == 0) throw ConfigError("max_neighbors must be positive");
  const std::size_t n = table.vocab_size();
  const std::size_t r = table.dimension();

  // Unit-normalized copies so each pair costs one dot product.
  std::vector<double> unit(n * r, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!table.has_vector(static_cast<TokenId>(i))) continue;
    const auto v = table.vector(static_cast<TokenId>(i));
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < r; ++k) unit[i * r + k] = v[k] / norm;
  }

  std::vector<std::vector<Neighbor>> lists(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<Neighbor> candidates;
    for (std::size_t i = begin; i < end; ++i) {
      const auto self = static_cast<TokenId>(i);
      candidates.clear();
      candidates.push_back(Neighbor{self, 1.0});
      if (table.has_vector(self)) {
        const double* a = &unit[i * r];
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || !table.has_vector(static_cast<TokenId>(j))) continue;
          const double* b = &unit[j * r];
          double dot = 0.0;
          for (std::size_t k = 0; k < r; ++k) dot += a[k] * b[k];
          dot = std::clamp(dot, -1.0, 1.0);
          if (dot > tau) candidates.push_back(Neighbor{static_cast<TokenId>(j), dot});
        }
      }
      // Self first regardless of rounding: it is the definitional maximum.
      std::sort(candidates.begin() + 1, candidates.end(), [](const Neighbor& x, const Neighbor& y) {
        return x.similarity != y.similarity ? x.similarity > y.similarity : x.word < y.word;
      });
      if (candidates.size() > max_neighbors) candidates.resize(max_neighbors);
      lists[i] = candidates;
    }
  };

  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n / 64)));
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return Neighborhoods(std::move(lists), tau, max_neighbors);
}

void save_neighborhoods(const Neighborhoods& nb, const std::filesystem::path& path,
                        const std::string& embedding_hash, const std::string& vocab_hash) {
  std::vector<std::int64_t> offsets{0};
  std::vector<std::int32_t> words;
  std::vector<double> sims;
  for (const auto& list : nb.lists()) {
    for (const Neighbor& x : list) {
      words.push_back(x.word);
      sims.push_back(x.similarity);
    }
    offsets.push_back(static_cast<std::int64_t>(words.size()));
  }
  ContainerWriter w(ArtifactKind::kNeighborhoods);
  w.add_text("embedding_hash", embedding_hash);
  w.add_text("vocabulary_hash", vocab_hash);
  const double tau = nb.tau();
  w.add_f64("tau", std::span<const double>(&tau, 1));
  const auto cap = static_cast<std::int64_t>(nb.max_neighbors());
  w.add_i64("max_neighbors", std::span<const std::int64_t>(&cap, 1));
  w.add_i64("offsets", offsets);
  w.add_i32("words", words);
  w.add_f64("similarities", sims);
  w.write_atomic(path);
}

std::optional<Neighborhoods> load_neighborhoods(const std::filesystem::path& path,
                                                const std::string& embedding_hash,
                                                const std::string& vocab_hash, double tau,
                                                std::size_t max_neighbors) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  const auto r = ContainerReader::from_file(path, ArtifactKind::kNeighborhoods);
  if (r.text("embedding_hash") != embedding_hash || r.text("vocabulary_hash") != vocab_hash ||
      r.f64("tau").at(0) != tau || r.i64("max_neighbors").at(0) != static_cast<std::int64_t>(max_neighbors)) {
    return std::nullopt;
  }
  const auto offsets = r.i64("offsets");
  const auto words = r.i32("words");
  const auto sims = r.f64("similarities");
  if (offsets.empty() || words.size() != sims.size() ||
      static_cast<std::size_t>(offsets.back()) != words.size()) {
    throw DataError("corrupt neighborhood cache " + path.string());
  }
  std::vector<std::vector<Neighbor>> lists(offsets.size() - 1);
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
    for (auto k = offsets[i]; k < offsets[i + 1]; ++k) {
      const auto idx = static_cast<std::size_t>(k);
      lists[i].push_back(Neighbor{words[idx], sims[idx]});
    }
  }
  return Neighborhoods(std::move(lists), tau, max_neighbors);
}

}  // namespace cqarank
