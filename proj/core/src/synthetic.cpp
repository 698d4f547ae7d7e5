#include "cqarank/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "cqarank/error.hpp"
#include "cqarank/random.hpp"

namespace cqarank {

namespace {

double row_cosine(const double* a, const double* b, std::size_t n) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

std::vector<double> dirichlet(Rng& rng, std::size_t n, double concentration) {
  std::vector<double> conc(n, concentration), out(n);
  rng.dirichlet(conc, out);
  return out;
}

// Letters only, ending in 'x' so that neither the tokenizer nor the suffix
// stemmer alters the word.
std::string word_name(char prefix, int theme, int index) {
  std::string out(1, prefix);
  out += static_cast<char>('a' + theme % 26);
  std::string digits;
  do {
    digits += static_cast<char>('a' + index % 26);
    index /= 26;
  } while (index > 0);
  out.append(digits.rbegin(), digits.rend());
  return out + 'x';
}

std::string padded(char prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, value);
  return buf;
}

void check_positive(int value, const char* name) {
  if (value <= 0) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

LdaCorpus generate_lda_corpus(const LdaCorpusParams& p) {
  check_positive(p.topics, "topics");
  check_positive(p.vocab_size, "vocab_size");
  check_positive(p.docs, "docs");
  check_positive(p.doc_length, "doc_length");
  Rng rng(p.seed);
  const auto T = static_cast<std::size_t>(p.topics);
  const auto V = static_cast<std::size_t>(p.vocab_size);

  LdaCorpus out;
  out.collection.kind = CollectionKind::kQ;
  for (std::size_t w = 0; w < V; ++w) out.collection.vocabulary.add("w" + std::to_string(w));

  out.true_phi.resize(T * V);
  for (std::size_t t = 0; t < T; ++t) {
    auto row = dirichlet(rng, V, p.beta);
    std::copy(row.begin(), row.end(), out.true_phi.begin() + static_cast<std::ptrdiff_t>(t * V));
  }
  std::vector<std::uint32_t> df(V, 0);
  for (int d = 0; d < p.docs; ++d) {
    auto theta = dirichlet(rng, T, p.alpha);
    out.true_theta.insert(out.true_theta.end(), theta.begin(), theta.end());
    Document doc;
    doc.doc_id = d;
    doc.source_pair = padded('d', d, 5);
    doc.collection = CollectionKind::kQ;
    std::vector<char> seen(V, 0);
    for (int n = 0; n < p.doc_length; ++n) {
      const auto t = rng.categorical(theta, 1.0);
      const auto w = rng.categorical(std::span<const double>(out.true_phi).subspan(t * V, V), 1.0);
      doc.tokens.push_back(static_cast<TokenId>(w));
      if (!seen[w]) {
        seen[w] = 1;
        ++df[w];
      }
    }
    out.collection.documents.push_back(std::move(doc));
  }
  for (std::size_t w = 0; w < V; ++w) out.collection.vocabulary.set_document_frequency(static_cast<TokenId>(w), df[w]);
  return out;
}

double greedy_matched_cosine(const std::vector<double>& learned, int learned_topics, const std::vector<double>& truth,
                             int true_topics, std::size_t vocab_size) {
  const auto L = static_cast<std::size_t>(learned_topics);
  const auto T = static_cast<std::size_t>(true_topics);
  if (learned.size() != L * vocab_size || truth.size() != T * vocab_size) {
    throw ConfigError("topic matrices do not match the given shapes");
  }
  if (L == 0 || T == 0) return 0.0;
  std::vector<double> sim(L * T);
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = 0; b < T; ++b) {
      sim[a * T + b] = row_cosine(&learned[a * vocab_size], &truth[b * vocab_size], vocab_size);
    }
  }
  std::vector<char> used_l(L, 0), used_t(T, 0);
  const std::size_t matches = std::min(L, T);
  double total = 0.0;
  for (std::size_t m = 0; m < matches; ++m) {
    double best = -2.0;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < L; ++a) {
      if (used_l[a]) continue;
      for (std::size_t b = 0; b < T; ++b) {
        if (!used_t[b] && sim[a * T + b] > best) {
          best = sim[a * T + b];
          ba = a;
          bb = b;
        }
      }
    }
    used_l[ba] = used_t[bb] = 1;
    total += best;
  }
  return total / static_cast<double>(matches);
}

SyntheticCorpus generate_lexical_gap_corpus(const LexicalGapParams& p) {
  check_positive(p.themes, "themes");
  check_positive(p.pairs, "pairs");
  check_positive(p.queries, "queries");
  check_positive(p.question_length, "question_length");
  check_positive(p.answers_per_pair, "answers_per_pair");
  check_positive(p.answer_length, "answer_length");
  check_positive(p.embedding_dimension, "embedding_dimension");
  if (p.themes > 26) throw ConfigError("at most 26 themes are supported");
  if (p.vocab_q < p.themes || p.vocab_a < p.themes) {
    throw ConfigError("each theme needs at least one question word and one answer word");
  }
  const auto K = static_cast<std::size_t>(p.themes);
  Rng rng(p.seed);
  SyntheticCorpus out;

  // Disjoint word blocks per theme, each with its own word distribution.
  std::vector<std::vector<std::size_t>> q_block(K), a_block(K);
  for (int i = 0; i < p.vocab_q; ++i) {
    const int theme = i % p.themes;
    q_block[static_cast<std::size_t>(theme)].push_back(out.q_words.size());
    out.q_words.push_back(word_name('q', theme, i / p.themes));
    out.q_word_theme.push_back(theme);
  }
  for (int i = 0; i < p.vocab_a; ++i) {
    const int theme = i % p.themes;
    a_block[static_cast<std::size_t>(theme)].push_back(out.a_words.size());
    out.a_words.push_back(word_name('a', theme, i / p.themes));
    out.a_word_theme.push_back(theme);
  }
  std::vector<std::vector<double>> q_dist(K), a_dist(K);
  for (std::size_t k = 0; k < K; ++k) {
    q_dist[k] = dirichlet(rng, q_block[k].size(), p.word_concentration);
    a_dist[k] = dirichlet(rng, a_block[k].size(), p.word_concentration);
  }

  auto sample_text = [&](const std::vector<double>& theta, int length, bool question) {
    std::string text;
    for (int n = 0; n < length; ++n) {
      const auto k = rng.categorical(theta, 1.0);
      const auto& dist = question ? q_dist[k] : a_dist[k];
      const auto w = rng.categorical(dist, 1.0);
      if (!text.empty()) text += ' ';
      text += question ? out.q_words[q_block[k][w]] : out.a_words[a_block[k][w]];
    }
    return text;
  };

  for (int j = 0; j < p.pairs; ++j) {
    auto theta = dirichlet(rng, K, p.theta_concentration);
    QAPair pair;
    pair.id = padded('p', j, 5);
    pair.question_body = sample_text(theta, p.question_length, true);
    for (int a = 0; a < p.answers_per_pair; ++a) pair.answers.push_back(sample_text(theta, p.answer_length, false));
    out.pairs.push_back(std::move(pair));
    out.pair_theta.push_back(std::move(theta));
  }
  for (int i = 0; i < p.queries; ++i) {
    SyntheticQuery q;
    q.id = padded('q', i, 3);
    q.theta = dirichlet(rng, K, p.theta_concentration);
    q.text = sample_text(q.theta, p.question_length, true);
    out.queries.push_back(std::move(q));
  }

  std::size_t relevant = 0;
  for (const auto& q : out.queries) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < out.pairs.size(); ++j) {
      if (row_cosine(q.theta.data(), out.pair_theta[j].data(), K) > p.relevance_threshold) {
        out.judgments.set(q.id, out.pairs[j].id, 1);
        ++hits;
      }
    }
    // Keep the query judged even when nothing is relevant.
    if (hits == 0) out.judgments.set(q.id, out.pairs.front().id, 0);
    relevant += hits;
  }
  out.mean_relevant_per_query = static_cast<double>(relevant) / static_cast<double>(out.queries.size());
  if (out.mean_relevant_per_query < 2.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "judgments too sparse: %.2f relevant pairs per query (need at least 2)",
                  out.mean_relevant_per_query);
    throw DataError(buf);
  }

  // Theme centroid plus isotropic noise, shared by question and answer words.
  const auto r = static_cast<std::size_t>(p.embedding_dimension);
  std::vector<std::vector<double>> centroid(K, std::vector<double>(r));
  for (auto& c : centroid) {
    for (double& v : c) v = rng.normal();
  }
  std::string emb = std::to_string(out.q_words.size() + out.a_words.size()) + " " + std::to_string(r) + "\n";
  auto emit = [&](const std::string& word, int theme) {
    emb += word;
    char buf[32];
    for (std::size_t i = 0; i < r; ++i) {
      std::snprintf(buf, sizeof buf, " %.6f", centroid[static_cast<std::size_t>(theme)][i] + p.embedding_noise * rng.normal());
      emb += buf;
    }
    emb += '\n';
  };
  for (std::size_t i = 0; i < out.q_words.size(); ++i) emit(out.q_words[i], out.q_word_theme[i]);
  for (std::size_t i = 0; i < out.a_words.size(); ++i) emit(out.a_words[i], out.a_word_theme[i]);
  out.embeddings_text = std::move(emb);
  return out;
}

std::string pairs_to_jsonl(const std::vector<QAPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json rec;
    rec["id"] = p.id;
    if (!p.question_title.empty()) rec["title"] = p.question_title;
    rec["body"] = p.question_body;
    if (!p.question_tags.empty()) rec["tags"] = p.question_tags;
    if (!p.question_description.empty()) rec["description"] = p.question_description;
    rec["answers"] = p.answers;
    out += rec.dump() + '\n';
  }
  return out;
}

std::string queries_to_jsonl(const std::vector<SyntheticQuery>& queries) {
  std::string out;
  for (const auto& q : queries) {
    nlohmann::ordered_json rec;
    rec["id"] = q.id;
    rec["text"] = q.text;
    out += rec.dump() + '\n';
  }
  return out;
}

}  // namespace cqarank
