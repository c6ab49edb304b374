#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "psc/matrix.hpp"

namespace psc {

enum class Activation { kIdentity, kRelu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Layer widths (input first) and one activation per affine layer.
struct MlpConfig {
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;

  // d -> hidden... -> p with ReLU on hidden layers and identity output.
  static MlpConfig regressor(std::size_t d, const std::vector<std::size_t>& hidden, std::size_t p);

  std::size_t layer_count() const noexcept { return activations.size(); }
  std::size_t input_width() const noexcept { return widths.front(); }
  std::size_t output_width() const noexcept { return widths.back(); }

  // Throws ConfigError on fewer than two widths, a zero width, or an
  // activation count that does not match.
  void validate() const;
};

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;
};

class Mlp {
 public:
  Mlp() = default;
  // All parameters zero.
  explicit Mlp(MlpConfig config);

  // He-style init: weights ~ N(0, 2 / fan_in) ahead of ReLU and N(0, 1 / fan_in)
  // ahead of identity, from a seeded stream; biases 0.
  static Mlp he_initialized(MlpConfig config, std::uint64_t seed);

  const MlpConfig& config() const noexcept { return config_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::size_t input_width() const noexcept { return config_.input_width(); }
  std::size_t output_width() const noexcept { return config_.output_width(); }
  std::size_t parameter_count() const noexcept;

  // Layers [first, last) as a standalone network.
  Mlp slice(std::size_t first, std::size_t last) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  MlpConfig config_;
  std::vector<DenseLayer> layers_;
};

// Affine + activation composition over a b x d batch. Pure.
Matrix forward(const Mlp& model, const Matrix& batch);

// Parameter-shaped container for dL/dtheta.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

// Analytic gradient of the batch loss
//   L = 1 / (b * p) * sum_i ||f(x_i) - t_i||^2
// with respect to every weight and bias. `loss`, when given, receives L.
Gradients gradient(const Mlp& model, const Matrix& batch, const Matrix& targets,
                   double* loss = nullptr);

// Mean of squared entries of f(inputs) - targets, evaluated in row chunks.
double mean_squared_error(const Mlp& model, const Matrix& inputs, const Matrix& targets);

enum class Optimizer { kAdam, kSgd };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& name);

struct TrainHyperparams {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::kAdam;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Training stops early once halving pushes the rate below this.
  double min_learning_rate = 1e-9;

  void validate() const;
};

struct TrainReport {
  // Full-data MSE before training, then after every accepted epoch. An epoch
  // whose loss exceeds the previous accepted loss is rolled back and the
  // learning rate halved, so this sequence never increases.
  std::vector<double> loss_history;
  double final_mse = 0.0;
  double final_learning_rate = 0.0;
  std::size_t epochs_run = 0;
  std::size_t rejected_epochs = 0;
};

struct TrainedMlp {
  Mlp model;
  TrainReport report;
};

// Mini-batch MSE regression of `targets` on `inputs`. Deterministic for a
// fixed seed. Throws NumericError if the loss becomes non-finite.
TrainedMlp train_regressor(const Matrix& inputs, const Matrix& targets, const MlpConfig& config,
                           const TrainHyperparams& hp);

// Same loop starting from an existing network.
TrainedMlp train_from(Mlp model, const Matrix& inputs, const Matrix& targets,
                      const TrainHyperparams& hp);

// Dense autoencoder: input -> 1568 -> 784 -> 392 -> 49 -> 392 -> 784 -> 1568
// -> input. ReLU everywhere except the bottleneck and the reconstruction.
struct AeConfig {
  std::size_t input_width = 784;
  std::vector<std::size_t> encoder_widths{1568, 784, 392, 49};
  // Identity activations on every layer (linear autoencoder).
  bool linear = false;

  std::size_t bottleneck() const noexcept { return encoder_widths.back(); }
  std::size_t encoder_layers() const noexcept { return encoder_widths.size(); }
  MlpConfig mlp() const;
};

// Trains the autoencoder on reconstruction MSE.
TrainedMlp train_autoencoder(const Matrix& inputs, const AeConfig& config,
                             const TrainHyperparams& hp);

// Encoder half of a trained autoencoder.
Mlp encoder_of(const Mlp& autoencoder, const AeConfig& config);

// Bottleneck codes.
Matrix encode(const Mlp& encoder, const Matrix& batch);

}  // namespace psc
