#include "cqarank/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cqarank/container.hpp"
#include "cqarank/error.hpp"
#include "cqarank/logging.hpp"
#include "cqarank/random.hpp"

namespace cqarank {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void softmax_inplace(std::span<double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : v) x /= total;
}

// Hidden activations and output probabilities for one sample.
struct Activations {
  std::vector<double> hidden;
  std::vector<double> output;
};

Activations run(const Mlp& m, std::span<const double> x) {
  Activations a;
  a.hidden.resize(m.hidden());
  a.output.resize(m.outputs());
  const std::size_t I = m.inputs();
  const std::size_t H = m.hidden();
  for (std::size_t h = 0; h < H; ++h) {
    double z = m.b1()[h];
    const double* row = &m.w1()[h * I];
    for (std::size_t i = 0; i < I; ++i) z += row[i] * x[i];
    a.hidden[h] = sigmoid(z);
  }
  for (std::size_t o = 0; o < m.outputs(); ++o) {
    double z = m.b2()[o];
    const double* row = &m.w2()[o * H];
    for (std::size_t h = 0; h < H; ++h) z += row[h] * a.hidden[h];
    a.output[o] = z;
  }
  softmax_inplace(a.output);
  return a;
}

void check_dims(const Mlp& m, std::span<const double> x, std::span<const double> target) {
  if (x.size() != m.inputs()) {
    throw ConfigError("regressor expects " + std::to_string(m.inputs()) + " inputs, got " + std::to_string(x.size()));
  }
  if (!target.empty() && target.size() != m.outputs()) {
    throw ConfigError("regressor produces " + std::to_string(m.outputs()) + " outputs, target has " +
                      std::to_string(target.size()));
  }
}

double ce_of(std::span<const double> target, std::span<const double> output) {
  double loss = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (target[t] > 0.0) loss -= target[t] * std::log(output[t]);
  }
  return loss;
}

bool valid_simplex(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= 1e-6;
}

}  // namespace

Mlp::Mlp(std::size_t inputs, std::size_t hidden, std::size_t outputs)
    : inputs_(inputs),
      hidden_(hidden),
      outputs_(outputs),
      w1_(hidden * inputs, 0.0),
      b1_(hidden, 0.0),
      w2_(outputs * hidden, 0.0),
      b2_(outputs, 0.0) {
  if (inputs == 0 || hidden == 0 || outputs == 0) throw ConfigError("regressor layer sizes must be positive");
}

Mlp Mlp::glorot(std::size_t inputs, std::size_t hidden, std::size_t outputs, std::uint64_t seed) {
  Mlp m(inputs, hidden, outputs);
  Rng rng(seed);
  const double r1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + outputs));
  for (double& w : m.w1_) w = (2.0 * rng.uniform01() - 1.0) * r1;
  for (double& w : m.w2_) w = (2.0 * rng.uniform01() - 1.0) * r2;
  return m;
}

double& Mlp::parameter(std::size_t i) {
  if (i < w1_.size()) return w1_[i];
  i -= w1_.size();
  if (i < b1_.size()) return b1_[i];
  i -= b1_.size();
  if (i < w2_.size()) return w2_[i];
  i -= w2_.size();
  return b2_.at(i);
}

double Mlp::parameter(std::size_t i) const { return const_cast<Mlp*>(this)->parameter(i); }

double& MlpGradients::operator[](std::size_t i) {
  if (i < w1.size()) return w1[i];
  i -= w1.size();
  if (i < b1.size()) return b1[i];
  i -= b1.size();
  if (i < w2.size()) return w2[i];
  i -= w2.size();
  return b2.at(i);
}

double MlpGradients::operator[](std::size_t i) const { return const_cast<MlpGradients&>(*this)[i]; }

bool Mlp::finite() const {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(w1_) && ok(b1_) && ok(w2_) && ok(b2_);
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  check_dims(*this, x, {});
  return run(*this, x).output;
}

double cross_entropy(const Mlp& mlp, std::span<const double> x, std::span<const double> target) {
  check_dims(mlp, x, target);
  return ce_of(target, run(mlp, x).output);
}

MlpGradients backprop(const Mlp& m, std::span<const double> x, std::span<const double> target) {
  check_dims(m, x, target);
  const Activations a = run(m, x);
  const std::size_t I = m.inputs();
  const std::size_t H = m.hidden();
  const std::size_t O = m.outputs();
  MlpGradients g{std::vector<double>(H * I), std::vector<double>(H), std::vector<double>(O * H),
                 std::vector<double>(O)};
  const double mass = std::accumulate(target.begin(), target.end(), 0.0);
  // d loss / d logit_o = mass * y_o - target_o (mass is 1 for simplex targets).
  std::vector<double> delta_out(O);
  for (std::size_t o = 0; o < O; ++o) delta_out[o] = mass * a.output[o] - target[o];
  std::vector<double> delta_hidden(H, 0.0);
  for (std::size_t o = 0; o < O; ++o) {
    g.b2[o] = delta_out[o];
    const double* row = &m.w2()[o * H];
    double* grow = &g.w2[o * H];
    for (std::size_t h = 0; h < H; ++h) {
      grow[h] = delta_out[o] * a.hidden[h];
      delta_hidden[h] += delta_out[o] * row[h];
    }
  }
  for (std::size_t h = 0; h < H; ++h) {
    const double dz = delta_hidden[h] * a.hidden[h] * (1.0 - a.hidden[h]);
    g.b1[h] = dz;
    double* grow = &g.w1[h * I];
    for (std::size_t i = 0; i < I; ++i) grow[i] = dz * x[i];
  }
  return g;
}

GradientCheck gradient_check(const Mlp& mlp, std::span<const double> x, std::span<const double> target,
                             double step, const std::function<void(MlpGradients&)>& tamper) {
  MlpGradients analytic = backprop(mlp, x, target);
  if (tamper) tamper(analytic);
  Mlp probe = mlp;
  GradientCheck out;
  for (std::size_t i = 0; i < probe.parameter_count(); ++i) {
    const double saved = probe.parameter(i);
    probe.parameter(i) = saved + step;
    const double up = cross_entropy(probe, x, target);
    probe.parameter(i) = saved - step;
    const double down = cross_entropy(probe, x, target);
    probe.parameter(i) = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    out.max_abs_analytic = std::max(out.max_abs_analytic, std::abs(a));
    out.max_abs_numeric = std::max(out.max_abs_numeric, std::abs(numeric));
    const double scale = std::max(std::abs(a), std::abs(numeric));
    if (scale < 1e-10) continue;
    out.max_relative_error = std::max(out.max_relative_error, std::abs(a - numeric) / scale);
  }
  return out;
}

void TrainConfig::validate() const {
  if (hidden == 0) throw ConfigError("regressor hidden size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("regressor learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("regressor momentum must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("regressor batch size must be positive");
  if (max_epochs < 1) throw ConfigError("regressor max epochs must be positive");
  if (patience < 1) throw ConfigError("regressor patience must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 0.5)) {
    throw ConfigError("regressor validation fraction must lie in (0, 0.5)");
  }
}

FitQuality evaluate_fit(const Mlp& mlp, std::span<const RegressionSample> samples) {
  FitQuality q;
  if (samples.empty()) return q;
  for (const auto& s : samples) {
    const auto y = mlp.forward(s.input);
    const double ce = ce_of(s.target, y);
    q.cross_entropy += ce;
    q.kl += ce - entropy(s.target);
  }
  q.cross_entropy /= static_cast<double>(samples.size());
  q.kl /= static_cast<double>(samples.size());
  return q;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

TrainedMlp train_regressor(const std::vector<RegressionSample>& samples, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.size() < 10) throw DataError("regressor training needs at least 10 samples");
  const std::size_t I = samples.front().input.size();
  const std::size_t O = samples.front().target.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.input.size() != I || s.target.size() != O) throw DataError("regression sample " + std::to_string(i) + " has inconsistent dimensions");
    if (!valid_simplex(s.input) || !valid_simplex(s.target)) {
      throw DataError("regression sample " + std::to_string(i) + " is not a valid probability vector");
    }
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  auto n_val = static_cast<std::size_t>(std::round(cfg.validation_fraction * static_cast<double>(samples.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, samples.size() - 1);
  std::vector<RegressionSample> val;
  std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  for (auto it = order.end() - static_cast<std::ptrdiff_t>(n_val); it != order.end(); ++it) val.push_back(samples[*it]);

  TrainedMlp out;
  out.mlp = Mlp::glorot(I, cfg.hidden, O, mix_seed(cfg.seed, 1));
  out.report.train_size = train_idx.size();
  out.report.validation_size = val.size();

  Mlp& m = out.mlp;
  MlpGradients velocity{std::vector<double>(m.w1().size(), 0.0), std::vector<double>(m.b1().size(), 0.0),
                        std::vector<double>(m.w2().size(), 0.0), std::vector<double>(m.b2().size(), 0.0)};
  MlpGradients acc = velocity;
  Mlp best = m;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<RegressionSample> train_view;
  for (std::size_t i : train_idx) train_view.push_back(samples[i]);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng.engine());
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(train_idx.size(), start + cfg.batch_size);
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = 0.0;
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const auto& s = samples[train_idx[b]];
        const MlpGradients g = backprop(m, s.input, s.target);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g[k];
        batch_loss += cross_entropy(m, s.input, s.target);
      }
      if (!std::isfinite(batch_loss)) {
        throw DataError("non-finite regressor loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batch_no));
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = 0; k < acc.size(); ++k) {
        velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * acc[k] * scale;
        m.parameter(k) += velocity[k];
      }
    }

    const double tl = evaluate_fit(m, train_view).cross_entropy;
    const double vl = evaluate_fit(m, val).cross_entropy;
    if (!std::isfinite(tl) || !std::isfinite(vl)) {
      throw DataError("non-finite regressor loss at epoch " + std::to_string(epoch) + ", batch " +
                      std::to_string(batch_no));
    }
    out.report.train_loss.push_back(tl);
    out.report.validation_loss.push_back(vl);
    out.report.stopped_epoch = epoch;
    if (vl < best_val) {
      best_val = vl;
      best = m;
      out.report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      out.report.early_stopped = true;
      break;
    }
  }
  out.mlp = std::move(best);
  log::debug("regressor: best epoch ", out.report.best_epoch, " of ", out.report.stopped_epoch,
             ", validation loss ", best_val);
  return out;
}

std::string serialize_mlp(const Mlp& mlp, const std::string& q_model_hash, const std::string& qa_model_hash) {
  ContainerWriter w(ArtifactKind::kMlp);
  w.add_text("q_model_hash", q_model_hash);
  w.add_text("qa_model_hash", qa_model_hash);
  const std::vector<std::int64_t> dims{static_cast<std::int64_t>(mlp.inputs()),
                                       static_cast<std::int64_t>(mlp.hidden()),
                                       static_cast<std::int64_t>(mlp.outputs())};
  w.add_i64("dims", dims);
  w.add_f64("w1", mlp.w1());
  w.add_f64("b1", mlp.b1());
  w.add_f64("w2", mlp.w2());
  w.add_f64("b2", mlp.b2());
  return w.bytes();
}

void save_mlp(const Mlp& mlp, const std::filesystem::path& path, const std::string& q_model_hash,
              const std::string& qa_model_hash) {
  write_file_atomic(path, serialize_mlp(mlp, q_model_hash, qa_model_hash));
}

Mlp load_mlp(const std::filesystem::path& path, const std::string& q_model_hash, const std::string& qa_model_hash) {
  const auto r = ContainerReader::from_file(path, ArtifactKind::kMlp);
  if (r.text("q_model_hash") != q_model_hash || r.text("qa_model_hash") != qa_model_hash) {
    throw StaleArtifactError("artifact out of date: regressor " + path.filename().string() +
                             " was trained against different topic models", "train-regressor");
  }
  const auto dims = r.i64("dims");
  if (dims.size() != 3) throw DataError("corrupt regressor header");
  Mlp m(static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]), static_cast<std::size_t>(dims[2]));
  m.w1() = r.f64("w1");
  m.b1() = r.f64("b1");
  m.w2() = r.f64("w2");
  m.b2() = r.f64("b2");
  if (m.w1().size() != m.inputs() * m.hidden() || m.b1().size() != m.hidden() ||
      m.w2().size() != m.hidden() * m.outputs() || m.b2().size() != m.outputs()) {
    throw DataError("regressor arrays have inconsistent sizes");
  }
  if (!m.finite()) throw DataError("regressor weights are not finite");
  return m;
}

}  // namespace cqarank
