#pragma once

// Single-hidden-layer perceptron mapping a Q-model topic distribution to a
// QA-model topic distribution:  y = softmax(W2 sigmoid(W1 x + b1) + b2),
// trained on cross-entropy against target distributions.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cqarank {

class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t inputs, std::size_t hidden, std::size_t outputs);

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Mlp glorot(std::size_t inputs, std::size_t hidden, std::size_t outputs, std::uint64_t seed);

  std::size_t inputs() const { return inputs_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t outputs() const { return outputs_; }

  // Row-major: w1 is hidden x inputs, w2 is outputs x hidden.
  std::vector<double>& w1() { return w1_; }
  std::vector<double>& b1() { return b1_; }
  std::vector<double>& w2() { return w2_; }
  std::vector<double>& b2() { return b2_; }
  const std::vector<double>& w1() const { return w1_; }
  const std::vector<double>& b1() const { return b1_; }
  const std::vector<double>& w2() const { return w2_; }
  const std::vector<double>& b2() const { return b2_; }

  std::size_t parameter_count() const { return w1_.size() + b1_.size() + w2_.size() + b2_.size(); }
  /// Flat view order: w1, b1, w2, b2.
  double& parameter(std::size_t i);
  double parameter(std::size_t i) const;

  bool finite() const;

  /// Throws ConfigError on a dimension mismatch.
  std::vector<double> forward(std::span<const double> x) const;

 private:
  std::size_t inputs_ = 0;
  std::size_t hidden_ = 0;
  std::size_t outputs_ = 0;
  std::vector<double> w1_, b1_, w2_, b2_;
};

/// Same layout as Mlp parameters.
struct MlpGradients {
  std::vector<double> w1, b1, w2, b2;

  std::size_t size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
  double& operator[](std::size_t i);
  double operator[](std::size_t i) const;
};

/// -sum_t target[t] log(output[t]) for one sample.
double cross_entropy(const Mlp& mlp, std::span<const double> x, std::span<const double> target);

/// Analytic gradient of cross_entropy by backpropagation.
MlpGradients backprop(const Mlp& mlp, std::span<const double> x, std::span<const double> target);

struct GradientCheck {
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
};

/// Compares backprop against central differences with the given step for
/// every parameter. Relative error is |a - n| / max(|a|, |n|), taken as 0
/// when both are below 1e-10. `tamper` lets tests corrupt the analytic
/// gradient before comparison.
GradientCheck gradient_check(const Mlp& mlp, std::span<const double> x, std::span<const double> target,
                             double step, const std::function<void(MlpGradients&)>& tamper = {});

struct TrainConfig {
  std::size_t hidden = 180;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  int max_epochs = 200;
  int patience = 10;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;       // mean cross-entropy on the training split, per epoch
  std::vector<double> validation_loss;  // per epoch
  int best_epoch = 0;                   // 1-based; weights returned are from this epoch
  int stopped_epoch = 0;
  bool early_stopped = false;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

struct TrainedMlp {
  Mlp mlp;
  TrainReport report;
};

struct RegressionSample {
  std::vector<double> input;
  std::vector<double> target;
};

/// Minibatch SGD with momentum; early stopping on validation loss.
/// Throws DataError on fewer than 10 samples, invalid simplex vectors or a
/// non-finite loss (message names epoch and batch).
TrainedMlp train_regressor(const std::vector<RegressionSample>& samples, const TrainConfig& cfg);

/// Mean cross-entropy and mean KL(target || output) over samples.
struct FitQuality {
  double cross_entropy = 0.0;
  double kl = 0.0;
};
FitQuality evaluate_fit(const Mlp& mlp, std::span<const RegressionSample> samples);

double entropy(std::span<const double> p);
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Serialization. The two topic-model hashes the regressor bridges are stored
// and checked on load.
std::string serialize_mlp(const Mlp& mlp, const std::string& q_model_hash, const std::string& qa_model_hash);
void save_mlp(const Mlp& mlp, const std::filesystem::path& path, const std::string& q_model_hash,
              const std::string& qa_model_hash);
Mlp load_mlp(const std::filesystem::path& path, const std::string& q_model_hash, const std::string& qa_model_hash);

}  // namespace cqarank
