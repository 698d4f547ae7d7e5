#include "cqarank/topicmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"
#include "cqarank/hash.hpp"
#include "cqarank/logging.hpp"

namespace cqarank {

Hyperparams Hyperparams::for_topics(int topics) {
  Hyperparams hp;
  hp.topics = topics;
  hp.alpha = 35.0 / static_cast<double>(topics);
  return hp;
}

void Hyperparams::validate() const {
  if (topics < 2) throw ConfigError("topic count must be at least 2");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (sweeps < 0) throw ConfigError("sweeps must be non-negative");
}

CountState::CountState(int t, std::size_t v, std::size_t docs)
    : topics(t),
      vocab_size(v),
      word_topic(v * static_cast<std::size_t>(t), 0),
      doc_topic(docs * static_cast<std::size_t>(t), 0),
      topic_total(static_cast<std::size_t>(t), 0),
      assignments(docs) {}

bool CountState::consistent(const std::vector<std::vector<TokenId>>& docs) const {
  if (docs.size() != assignments.size()) return false;
  std::vector<std::int64_t> wt(word_topic.size(), 0);
  std::vector<std::int64_t> dt(doc_topic.size(), 0);
  std::vector<std::int64_t> tt(static_cast<std::size_t>(topics), 0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].size() != assignments[d].size()) return false;
    for (std::size_t n = 0; n < docs[d].size(); ++n) {
      const int z = assignments[d][n];
      if (z < 0 || z >= topics) return false;
      ++wt[static_cast<std::size_t>(docs[d][n]) * topics + z];
      ++dt[d * topics + z];
      ++tt[static_cast<std::size_t>(z)];
    }
  }
  for (std::size_t i = 0; i < wt.size(); ++i) {
    if (wt[i] != word_topic[i]) return false;
  }
  for (std::size_t i = 0; i < dt.size(); ++i) {
    if (dt[i] != doc_topic[i]) return false;
  }
  for (int t = 0; t < topics; ++t) {
    std::int64_t col = 0;
    for (std::size_t w = 0; w < vocab_size; ++w) col += word_topic[w * topics + t];
    if (col != topic_total[static_cast<std::size_t>(t)] || tt[static_cast<std::size_t>(t)] != col) return false;
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::int64_t len = 0;
    for (int t = 0; t < topics; ++t) len += doc_topic[d * topics + t];
    if (len != static_cast<std::int64_t>(docs[d].size())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Conditional

std::vector<double> topic_normalizers(const TopicCounts& counts, const Neighborhoods& nb) {
  const int T = counts.topics;
  std::vector<double> c(static_cast<std::size_t>(T), 0.0);
  std::vector<double> inv_total(static_cast<std::size_t>(T), 0.0);
  for (int t = 0; t < T; ++t) {
    const auto n = counts.topic_total[static_cast<std::size_t>(t)];
    inv_total[static_cast<std::size_t>(t)] = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  }
  for (std::size_t w = 0; w < counts.vocab_size; ++w) {
    for (const Neighbor& x : nb.of(static_cast<TokenId>(w))) {
      const std::int32_t* row = &counts.word_topic[static_cast<std::size_t>(x.word) * T];
      for (int t = 0; t < T; ++t) {
        c[static_cast<std::size_t>(t)] += std::exp(row[t] * x.similarity * inv_total[static_cast<std::size_t>(t)]);
      }
    }
  }
  return c;
}

void topic_masses(const TopicCounts& counts, std::span<const std::int32_t> doc_topic, const Hyperparams& hp,
                  TokenId word, const Neighborhoods* neighborhoods, std::span<const double> normalizers,
                  std::span<double> out) {
  const int T = counts.topics;
  const double alpha = hp.alpha;
  const double beta = hp.beta;
  const double lambda = neighborhoods != nullptr ? hp.lambda : 1.0;
  const double beta_v = beta * static_cast<double>(counts.vocab_size);
  const std::int32_t* wrow = &counts.word_topic[static_cast<std::size_t>(word) * T];

  for (int t = 0; t < T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const double denom = beta_v + static_cast<double>(counts.topic_total[ts]);
    const double ntd = doc_topic[ts];
    out[ts] = alpha * beta / denom + ntd * beta / denom + (alpha + ntd) * lambda * wrow[t] / denom;
  }
  if (neighborhoods == nullptr || lambda == 1.0) return;

  // Fourth term: neighbor-major loop keeps word_topic reads contiguous.
  thread_local std::vector<double> extra;
  thread_local std::vector<double> inv_total;
  extra.assign(static_cast<std::size_t>(T), 0.0);
  inv_total.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const auto n = counts.topic_total[static_cast<std::size_t>(t)];
    inv_total[static_cast<std::size_t>(t)] = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  }
  for (const Neighbor& x : neighborhoods->of(word)) {
    const std::int32_t* row = &counts.word_topic[static_cast<std::size_t>(x.word) * T];
    for (int t = 0; t < T; ++t) {
      extra[static_cast<std::size_t>(t)] += std::exp(row[t] * x.similarity * inv_total[static_cast<std::size_t>(t)]);
    }
  }
  const double scale = 1.0 - lambda;
  for (int t = 0; t < T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    out[ts] += scale / normalizers[ts] * extra[ts];
  }
}

std::vector<double> conditional_topic_probs(const CountState& state, const Hyperparams& hp, std::size_t doc,
                                            TokenId word, const Neighborhoods* neighborhoods,
                                            std::span<const double> normalizers) {
  std::vector<double> out(static_cast<std::size_t>(state.topics));
  topic_masses(TopicCounts::of(state), state.doc_row(doc), hp, word, neighborhoods, normalizers, out);
  return out;
}

// ---------------------------------------------------------------------------
// Sampler

GibbsSampler::GibbsSampler(const std::vector<std::vector<TokenId>>& docs, std::size_t vocab_size, Hyperparams hp,
                           const Neighborhoods* neighborhoods)
    : docs_(docs), hp_(hp), nb_(neighborhoods), rng_(hp.seed), state_(hp.topics, vocab_size, docs.size()) {
  hp_.validate();
  if (nb_ != nullptr && nb_->vocab_size() != vocab_size) {
    throw ConfigError("neighborhoods cover " + std::to_string(nb_->vocab_size()) + " words, vocabulary has " +
                      std::to_string(vocab_size));
  }
  masses_.resize(static_cast<std::size_t>(hp_.topics));
  normalizers_.assign(static_cast<std::size_t>(hp_.topics), 1.0);
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    auto& z = state_.assignments[d];
    z.resize(docs_[d].size());
    for (std::size_t n = 0; n < docs_[d].size(); ++n) {
      const TokenId w = docs_[d][n];
      if (w < 0 || static_cast<std::size_t>(w) >= vocab_size) {
        throw DataError("token id out of vocabulary bounds in document " + std::to_string(d));
      }
      const auto t = static_cast<std::int32_t>(rng_.uniform_index(static_cast<std::uint64_t>(hp_.topics)));
      z[n] = t;
      ++state_.nwt(w, t);
      ++state_.ntd(d, t);
      ++state_.topic_total[static_cast<std::size_t>(t)];
    }
  }
}

void GibbsSampler::sweep() {
  // c_t is refreshed once per sweep; counts drift within the sweep.
  if (nb_ != nullptr && hp_.lambda < 1.0) normalizers_ = topic_normalizers(TopicCounts::of(state_), *nb_);
  const TopicCounts counts = TopicCounts::of(state_);
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    const auto& doc = docs_[d];
    auto& z = state_.assignments[d];
    for (std::size_t n = 0; n < doc.size(); ++n) {
      const TokenId w = doc[n];
      const std::int32_t old_topic = z[n];
      --state_.nwt(w, old_topic);
      --state_.ntd(d, old_topic);
      --state_.topic_total[static_cast<std::size_t>(old_topic)];

      topic_masses(counts, state_.doc_row(d), hp_, w, nb_, normalizers_, masses_);
      if (observer_) {
        observer_(SampleEvent{sweeps_done_, d, n, w, old_topic, masses_, normalizers_, &state_});
      }
      const double total = std::accumulate(masses_.begin(), masses_.end(), 0.0);
      const auto new_topic = static_cast<std::int32_t>(rng_.categorical(masses_, total));

      z[n] = new_topic;
      ++state_.nwt(w, new_topic);
      ++state_.ntd(d, new_topic);
      ++state_.topic_total[static_cast<std::size_t>(new_topic)];
    }
  }
  ++sweeps_done_;
}

std::vector<double> estimate_theta(const CountState& s, const Hyperparams& hp) {
  const std::size_t D = s.assignments.size();
  const int T = s.topics;
  std::vector<double> theta(D * static_cast<std::size_t>(T));
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(s.assignments[d].size()) + T * hp.alpha;
    for (int t = 0; t < T; ++t) theta[d * T + t] = (s.ntd(d, t) + hp.alpha) / denom;
  }
  return theta;
}

std::vector<double> estimate_phi(const CountState& s, const Hyperparams& hp) {
  const std::size_t V = s.vocab_size;
  const int T = s.topics;
  std::vector<double> phi(static_cast<std::size_t>(T) * V);
  for (int t = 0; t < T; ++t) {
    const double denom = static_cast<double>(s.topic_total[static_cast<std::size_t>(t)]) + static_cast<double>(V) * hp.beta;
    for (std::size_t w = 0; w < V; ++w) {
      phi[static_cast<std::size_t>(t) * V + w] = (s.nwt(static_cast<TokenId>(w), t) + hp.beta) / denom;
    }
  }
  return phi;
}

TopicModel train(const DocumentCollection& docs, const Hyperparams& hp, const Neighborhoods* neighborhoods) {
  hp.validate();
  std::vector<std::vector<TokenId>> tokens;
  std::vector<std::string> pairs;
  std::size_t empty = 0;
  for (const Document& d : docs.documents) {
    if (d.tokens.empty()) {
      ++empty;
      continue;
    }
    tokens.push_back(d.tokens);
    pairs.push_back(d.source_pair);
  }
  if (empty > 0) {
    log::warn(empty, " empty document(s) excluded from ", to_string(docs.kind), " model training");
  }
  if (tokens.empty()) throw DataError("cannot train a topic model: every document is empty");

  GibbsSampler sampler(tokens, docs.vocabulary.size(), hp, neighborhoods);
  for (int s = 0; s < hp.sweeps; ++s) {
    sampler.sweep();
    if ((s + 1) % 100 == 0) log::debug(to_string(docs.kind), " model: sweep ", s + 1, "/", hp.sweeps);
  }

  TopicModel model;
  model.collection = docs.kind;
  model.hyperparams = hp;
  model.augmented = neighborhoods != nullptr;
  model.vocabulary_hash = docs.vocabulary.hash();
  model.doc_pairs = std::move(pairs);
  model.counts = sampler.state();
  model.theta = estimate_theta(model.counts, hp);
  model.phi = estimate_phi(model.counts, hp);
  return model;
}

// ---------------------------------------------------------------------------
// Inference

LeftToRightInferencer::LeftToRightInferencer(const TopicModel& model, const Neighborhoods* neighborhoods)
    : model_(model), nb_(neighborhoods) {
  if (nb_ != nullptr && nb_->vocab_size() != model.vocab_size()) {
    throw ConfigError("neighborhoods do not match the model vocabulary");
  }
  normalizers_.assign(static_cast<std::size_t>(model.topics()), 1.0);
  if (nb_ != nullptr && model.hyperparams.lambda < 1.0) {
    normalizers_ = topic_normalizers(TopicCounts::of(model.counts), *nb_);
  }
}

InferenceResult LeftToRightInferencer::infer(std::span<const TokenId> tokens, int particles,
                                             std::uint64_t seed) const {
  const int T = model_.topics();
  const double alpha = model_.hyperparams.alpha;
  InferenceResult result;
  std::vector<TokenId> known;
  for (TokenId w : tokens) {
    if (w >= 0 && static_cast<std::size_t>(w) < model_.vocab_size()) known.push_back(w);
  }
  result.known_tokens = known.size();
  result.theta.assign(static_cast<std::size_t>(T), 0.0);
  if (known.empty()) {
    result.status = InferenceStatus::kNoKnownTokens;
    std::fill(result.theta.begin(), result.theta.end(), 1.0 / T);
    return result;
  }
  if (particles < 1) throw ConfigError("particle count must be positive");

  const TopicCounts counts = TopicCounts::of(model_.counts);
  std::vector<std::int32_t> doc_topic(static_cast<std::size_t>(T));
  std::vector<double> masses(static_cast<std::size_t>(T));
  Rng rng(seed);
  const double denom = static_cast<double>(known.size()) + T * alpha;
  for (int r = 0; r < particles; ++r) {
    std::fill(doc_topic.begin(), doc_topic.end(), 0);
    for (TokenId w : known) {
      topic_masses(counts, doc_topic, model_.hyperparams, w, nb_, normalizers_, masses);
      const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
      ++doc_topic[rng.categorical(masses, total)];
    }
    for (int t = 0; t < T; ++t) {
      result.theta[static_cast<std::size_t>(t)] += (doc_topic[static_cast<std::size_t>(t)] + alpha) / denom;
    }
  }
  for (double& v : result.theta) v /= particles;
  return result;
}

InferenceResult infer_left_to_right(const TopicModel& model, std::span<const TokenId> tokens, int particles,
                                    const Neighborhoods* neighborhoods, std::uint64_t seed) {
  return LeftToRightInferencer(model, neighborhoods).infer(tokens, particles, seed);
}

std::vector<double> modified_phi(const TopicModel& model, int topic, const Neighborhoods& nb) {
  const std::size_t V = model.vocab_size();
  if (nb.vocab_size() != V) throw ConfigError("neighborhoods do not match the model vocabulary");
  const auto phi = model.phi_row(topic);
  std::vector<double> out(V, 0.0);
  double c = 0.0;
  for (std::size_t w = 0; w < V; ++w) {
    double s = 0.0;
    for (const Neighbor& x : nb.of(static_cast<TokenId>(w))) {
      s += std::exp(phi[static_cast<std::size_t>(x.word)] * x.similarity);
    }
    out[w] = s;
    c += s;
  }
  for (double& v : out) v /= c;
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_topic_model(const TopicModel& m) {
  ContainerWriter w(ArtifactKind::kTopicModel);
  w.add_text("collection", to_string(m.collection));
  w.add_text("vocabulary_hash", m.vocabulary_hash);
  const std::vector<std::int64_t> ints{m.hyperparams.topics, m.hyperparams.sweeps,
                                       static_cast<std::int64_t>(m.hyperparams.seed),
                                       m.augmented ? 1 : 0, static_cast<std::int64_t>(m.counts.vocab_size)};
  w.add_i64("header", ints);
  const std::vector<double> reals{m.hyperparams.alpha, m.hyperparams.beta, m.hyperparams.lambda};
  w.add_f64("hyperparams", reals);
  std::string pairs;
  for (const auto& p : m.doc_pairs) {
    pairs += p;
    pairs.push_back('\n');
  }
  w.add_text("doc_pairs", pairs);
  w.add_f64("theta", m.theta);
  w.add_f64("phi", m.phi);
  w.add_i32("word_topic", m.counts.word_topic);
  w.add_i32("doc_topic", m.counts.doc_topic);
  w.add_i64("topic_total", m.counts.topic_total);
  std::vector<std::int64_t> offsets{0};
  std::vector<std::int32_t> z;
  for (const auto& row : m.counts.assignments) {
    z.insert(z.end(), row.begin(), row.end());
    offsets.push_back(static_cast<std::int64_t>(z.size()));
  }
  w.add_i64("assignment_offsets", offsets);
  w.add_i32("assignments", z);
  return w.bytes();
}

TopicModel parse_topic_model(std::string bytes) {
  const auto r = ContainerReader::from_bytes(std::move(bytes), ArtifactKind::kTopicModel);
  TopicModel m;
  m.collection = parse_collection_kind(r.text("collection"));
  m.vocabulary_hash = r.text("vocabulary_hash");
  const auto ints = r.i64("header");
  const auto reals = r.f64("hyperparams");
  if (ints.size() != 5 || reals.size() != 3) throw DataError("corrupt topic model header");
  m.hyperparams.topics = static_cast<int>(ints[0]);
  m.hyperparams.sweeps = static_cast<int>(ints[1]);
  m.hyperparams.seed = static_cast<std::uint64_t>(ints[2]);
  m.augmented = ints[3] != 0;
  m.hyperparams.alpha = reals[0];
  m.hyperparams.beta = reals[1];
  m.hyperparams.lambda = reals[2];
  m.hyperparams.validate();
  const auto V = static_cast<std::size_t>(ints[4]);
  const auto T = static_cast<std::size_t>(m.hyperparams.topics);

  const std::string pairs = r.text("doc_pairs");
  std::size_t pos = 0;
  while (pos < pairs.size()) {
    const std::size_t end = pairs.find('\n', pos);
    m.doc_pairs.push_back(pairs.substr(pos, end - pos));
    pos = end + 1;
  }
  const std::size_t D = m.doc_pairs.size();
  m.theta = r.f64("theta");
  m.phi = r.f64("phi");
  m.counts.topics = m.hyperparams.topics;
  m.counts.vocab_size = V;
  m.counts.word_topic = r.i32("word_topic");
  m.counts.doc_topic = r.i32("doc_topic");
  m.counts.topic_total = r.i64("topic_total");
  const auto offsets = r.i64("assignment_offsets");
  const auto z = r.i32("assignments");
  if (m.theta.size() != D * T || m.phi.size() != T * V || m.counts.word_topic.size() != V * T ||
      m.counts.doc_topic.size() != D * T || m.counts.topic_total.size() != T || offsets.size() != D + 1 ||
      static_cast<std::size_t>(offsets.back()) != z.size()) {
    throw DataError("topic model arrays have inconsistent sizes");
  }
  m.counts.assignments.resize(D);
  for (std::size_t d = 0; d < D; ++d) {
    m.counts.assignments[d].assign(z.begin() + offsets[d], z.begin() + offsets[d + 1]);
  }
  return m;
}

std::string TopicModel::content_hash() const { return hash_bytes(serialize_topic_model(*this)); }

void save_topic_model(const TopicModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_topic_model(model));
}

TopicModel load_topic_model(const std::filesystem::path& path) { return parse_topic_model(read_file(path)); }

TopicModel load_topic_model(const std::filesystem::path& path, const Vocabulary& vocab) {
  TopicModel m = load_topic_model(path);
  if (m.vocabulary_hash != vocab.hash() || m.vocab_size() != vocab.size()) {
    throw StaleArtifactError("artifact out of date: topic model " + path.filename().string() +
                             " was trained on a different vocabulary", "train-lda");
  }
  return m;
}

}  // namespace cqarank
