#include "psc/neural.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "psc/error.hpp"
#include "psc/rng.hpp"

namespace psc {
namespace {

void apply_activation(Activation a, Matrix& z) {
  if (a == Activation::kRelu)
    for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
}

// out = in * W^T + bias, then the layer activation.
Matrix layer_forward(const DenseLayer& layer, const Matrix& in) {
  const std::size_t out_w = layer.weights.rows();
  const std::size_t in_w = layer.weights.cols();
  Matrix out(in.rows(), out_w);
  if (in.rows() == 0) return out;
  for (std::size_t i = 0; i < in.rows(); ++i) std::copy(layer.bias.begin(), layer.bias.end(), out.row(i).begin());
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(in.rows()),
              static_cast<int>(out_w), static_cast<int>(in_w), 1.0, in.data(),
              static_cast<int>(in_w), layer.weights.data(), static_cast<int>(in_w), 1.0, out.data(),
              static_cast<int>(out_w));
  apply_activation(layer.activation, out);
  return out;
}

void check_batch(const Mlp& model, const Matrix& batch) {
  if (batch.cols() != model.input_width()) {
    throw ShapeError("network expects input width " + std::to_string(model.input_width()) +
                     ", got " + std::to_string(batch.cols()));
  }
}

struct AdamState {
  Gradients m;
  Gradients v;
  std::size_t step = 0;
};

Gradients zeros_like(const Mlp& model) {
  Gradients g;
  for (const auto& layer : model.layers()) {
    g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    g.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

template <class Update>
void for_each_parameter(Mlp& model, const Gradients& g, Gradients* m, Gradients* v, Update&& update) {
  auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto w = layers[l].weights.values();
    const auto gw = g.weights[l].values();
    for (std::size_t i = 0; i < w.size(); ++i)
      update(w[i], gw[i], m ? m->weights[l].values()[i] : w[i], v ? v->weights[l].values()[i] : w[i]);
    auto& b = layers[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i)
      update(b[i], g.bias[l][i], m ? m->bias[l][i] : b[i], v ? v->bias[l][i] : b[i]);
  }
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "identity"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity" || name == "none") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "sgd"; }

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "sgd") return Optimizer::kSgd;
  throw ConfigError("unknown optimizer '" + name + "'");
}

MlpConfig MlpConfig::regressor(std::size_t d, const std::vector<std::size_t>& hidden,
                               std::size_t p) {
  MlpConfig c;
  c.widths.push_back(d);
  for (auto h : hidden) {
    c.widths.push_back(h);
    c.activations.push_back(Activation::kRelu);
  }
  c.widths.push_back(p);
  c.activations.push_back(Activation::kIdentity);
  return c;
}

void MlpConfig::validate() const {
  if (widths.size() < 2) throw ConfigError("a network needs at least an input and output width");
  if (activations.size() + 1 != widths.size()) {
    throw ConfigError("network has " + std::to_string(widths.size()) + " widths but " +
                      std::to_string(activations.size()) + " activations");
  }
  for (auto w : widths)
    if (w == 0) throw ConfigError("layer widths must be at least 1");
}

Mlp::Mlp(MlpConfig config) : config_(std::move(config)) {
  config_.validate();
  for (std::size_t l = 0; l < config_.layer_count(); ++l) {
    layers_.push_back({Matrix(config_.widths[l + 1], config_.widths[l]),
                       std::vector<double>(config_.widths[l + 1], 0.0), config_.activations[l]});
  }
}

Mlp Mlp::he_initialized(MlpConfig config, std::uint64_t seed) {
  Mlp m(std::move(config));
  SplitMix64 rng(seed);
  for (auto& layer : m.layers_) {
    const double gain = layer.activation == Activation::kRelu ? 2.0 : 1.0;
    const double scale = std::sqrt(gain / static_cast<double>(layer.weights.cols()));
    for (double& w : layer.weights.values()) w = scale * rng.normal();
  }
  return m;
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

Mlp Mlp::slice(std::size_t first, std::size_t last) const {
  if (first >= last || last > layers_.size()) throw ConfigError("invalid layer slice");
  MlpConfig c;
  c.widths.assign(config_.widths.begin() + static_cast<std::ptrdiff_t>(first),
                  config_.widths.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  c.activations.assign(config_.activations.begin() + static_cast<std::ptrdiff_t>(first),
                       config_.activations.begin() + static_cast<std::ptrdiff_t>(last));
  Mlp out(std::move(c));
  for (std::size_t l = first; l < last; ++l) out.layers_[l - first] = layers_[l];
  return out;
}

bool Mlp::all_finite() const noexcept {
  for (const auto& layer : layers_) {
    if (!layer.weights.all_finite()) return false;
    for (double b : layer.bias)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.config_.widths != b.config_.widths || a.config_.activations != b.config_.activations)
    return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (!(a.layers_[l].weights == b.layers_[l].weights) || a.layers_[l].bias != b.layers_[l].bias)
      return false;
  }
  return true;
}

Matrix forward(const Mlp& model, const Matrix& batch) {
  check_batch(model, batch);
  require_finite(batch, "network input");
  if (model.layers().empty()) return batch;
  Matrix a = layer_forward(model.layers().front(), batch);
  for (std::size_t l = 1; l < model.layers().size(); ++l) a = layer_forward(model.layers()[l], a);
  return a;
}

Gradients gradient(const Mlp& model, const Matrix& batch, const Matrix& targets, double* loss) {
  check_batch(model, batch);
  if (targets.rows() != batch.rows() || targets.cols() != model.output_width()) {
    throw ShapeError("targets are " + std::to_string(targets.rows()) + "x" +
                     std::to_string(targets.cols()) + ", expected " +
                     std::to_string(batch.rows()) + "x" + std::to_string(model.output_width()));
  }
  if (batch.rows() == 0) throw ShapeError("gradient of an empty batch");
  const auto& layers = model.layers();
  const std::size_t depth = layers.size();
  const auto b = static_cast<int>(batch.rows());

  std::vector<Matrix> acts;
  acts.reserve(depth);
  for (std::size_t l = 0; l < depth; ++l)
    acts.push_back(layer_forward(layers[l], l == 0 ? batch : acts.back()));

  // dL/d(output) for L = mean over b * p entries.
  Matrix delta = acts.back();
  const double scale = 2.0 / (static_cast<double>(batch.rows()) * static_cast<double>(targets.cols()));
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double r = delta.data()[i] - targets.data()[i];
    sum_sq += r * r;
    delta.data()[i] = scale * r;
  }
  if (loss) *loss = sum_sq / static_cast<double>(delta.size());

  Gradients g = zeros_like(model);
  for (std::size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = layers[l];
    if (layer.activation == Activation::kRelu) {
      const Matrix& out = acts[l];
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (!(out.data()[i] > 0.0)) delta.data()[i] = 0.0;
    }
    const Matrix& input = l == 0 ? batch : acts[l - 1];
    const auto out_w = static_cast<int>(layer.weights.rows());
    const auto in_w = static_cast<int>(layer.weights.cols());
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, out_w, in_w, b, 1.0, delta.data(), out_w,
                input.data(), in_w, 0.0, g.weights[l].data(), in_w);
    auto& gb = g.bias[l];
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      const auto r = delta.row(i);
      for (std::size_t j = 0; j < gb.size(); ++j) gb[j] += r[j];
    }
    if (l > 0) {
      Matrix prev(batch.rows(), layer.weights.cols());
      cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, b, in_w, out_w, 1.0, delta.data(),
                  out_w, layer.weights.data(), in_w, 0.0, prev.data(), in_w);
      delta = std::move(prev);
    }
  }
  return g;
}

double mean_squared_error(const Mlp& model, const Matrix& inputs, const Matrix& targets) {
  check_batch(model, inputs);
  if (targets.rows() != inputs.rows() || targets.cols() != model.output_width()) {
    throw ShapeError("targets do not match inputs/network output");
  }
  if (inputs.rows() == 0) return 0.0;
  constexpr std::size_t kChunk = 512;
  double sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < inputs.rows(); start += kChunk) {
    const std::size_t stop = std::min(inputs.rows(), start + kChunk);
    idx.resize(stop - start);
    for (std::size_t i = start; i < stop; ++i) idx[i - start] = i;
    const Matrix out = forward(model, inputs.select_rows(idx));
    for (std::size_t i = start; i < stop; ++i) {
      const auto o = out.row(i - start);
      const auto t = targets.row(i);
      for (std::size_t j = 0; j < o.size(); ++j) sum += (o[j] - t[j]) * (o[j] - t[j]);
    }
  }
  return sum / (static_cast<double>(inputs.rows()) * static_cast<double>(targets.cols()));
}

void TrainHyperparams::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
}

TrainedMlp train_from(Mlp model, const Matrix& inputs, const Matrix& targets,
                      const TrainHyperparams& hp) {
  hp.validate();
  check_batch(model, inputs);
  if (targets.rows() != inputs.rows()) {
    throw ShapeError("inputs have " + std::to_string(inputs.rows()) + " rows, targets " +
                     std::to_string(targets.rows()));
  }
  if (targets.cols() != model.output_width()) {
    throw ShapeError("network output width " + std::to_string(model.output_width()) +
                     " does not match target width " + std::to_string(targets.cols()));
  }
  if (inputs.rows() == 0) throw ShapeError("cannot train on zero rows");
  require_finite(inputs, "training inputs");
  require_finite(targets, "training targets");

  const std::size_t n = inputs.rows();
  SplitMix64 rng(hp.seed ^ 0x5DEECE66DULL);
  AdamState adam{zeros_like(model), zeros_like(model), 0};
  TrainReport report;
  double lr = hp.learning_rate;
  double best = mean_squared_error(model, inputs, targets);
  if (!std::isfinite(best)) throw NumericError("initial training loss is not finite");
  report.loss_history.push_back(best);
  Mlp saved_model = model;

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    const auto order = permutation(n, rng);
    for (std::size_t start = 0; start < n; start += hp.batch_size) {
      const std::size_t stop = std::min(n, start + hp.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix xb = inputs.select_rows(idx);
      const Matrix tb = targets.select_rows(idx);
      double batch_loss = 0.0;
      const Gradients g = gradient(model, xb, tb, &batch_loss);
      if (!std::isfinite(batch_loss)) {
        throw NumericError("training diverged: non-finite batch loss in epoch " +
                           std::to_string(epoch + 1) + " at learning rate " + std::to_string(lr));
      }
      if (hp.optimizer == Optimizer::kSgd) {
        for_each_parameter(model, g, nullptr, nullptr,
                           [lr](double& w, double gw, double&, double&) { w -= lr * gw; });
      } else {
        ++adam.step;
        const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(adam.step));
        const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(adam.step));
        const double b1 = hp.beta1;
        const double b2 = hp.beta2;
        const double eps = hp.epsilon;
        for_each_parameter(model, g, &adam.m, &adam.v,
                           [=](double& w, double gw, double& m, double& v) {
                             m = b1 * m + (1.0 - b1) * gw;
                             v = b2 * v + (1.0 - b2) * gw * gw;
                             w -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
                           });
      }
    }
    ++report.epochs_run;
    const double loss = mean_squared_error(model, inputs, targets);
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: non-finite loss after epoch " +
                         std::to_string(epoch + 1) + " at learning rate " + std::to_string(lr));
    }
    if (loss > best) {
      // Restored moments would keep pointing along the rejected step.
      model = saved_model;
      adam = AdamState{zeros_like(model), zeros_like(model), 0};
      lr *= 0.5;
      ++report.rejected_epochs;
      if (lr < hp.min_learning_rate) break;
      continue;
    }
    best = loss;
    report.loss_history.push_back(loss);
    saved_model = model;
  }
  report.final_mse = best;
  report.final_learning_rate = lr;
  return {std::move(model), std::move(report)};
}

TrainedMlp train_regressor(const Matrix& inputs, const Matrix& targets, const MlpConfig& config,
                           const TrainHyperparams& hp) {
  hp.validate();
  config.validate();
  if (config.input_width() != inputs.cols()) {
    throw ShapeError("network input width " + std::to_string(config.input_width()) +
                     " does not match data width " + std::to_string(inputs.cols()));
  }
  return train_from(Mlp::he_initialized(config, hp.seed), inputs, targets, hp);
}

MlpConfig AeConfig::mlp() const {
  MlpConfig c;
  c.widths.push_back(input_width);
  for (auto w : encoder_widths) c.widths.push_back(w);
  for (std::size_t i = encoder_widths.size() - 1; i-- > 0;) c.widths.push_back(encoder_widths[i]);
  c.widths.push_back(input_width);
  const std::size_t layers = c.widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const bool code_layer = l + 1 == encoder_widths.size();
    const bool output_layer = l + 1 == layers;
    c.activations.push_back(linear || code_layer || output_layer ? Activation::kIdentity
                                                                 : Activation::kRelu);
  }
  return c;
}

TrainedMlp train_autoencoder(const Matrix& inputs, const AeConfig& config,
                             const TrainHyperparams& hp) {
  if (config.encoder_widths.empty()) throw ConfigError("autoencoder needs encoder widths");
  if (inputs.cols() != config.input_width) {
    throw ShapeError("autoencoder expects width " + std::to_string(config.input_width) +
                     ", got " + std::to_string(inputs.cols()));
  }
  return train_regressor(inputs, inputs, config.mlp(), hp);
}

Mlp encoder_of(const Mlp& autoencoder, const AeConfig& config) {
  if (autoencoder.config().widths != config.mlp().widths) {
    throw ShapeError("network does not have the configured autoencoder shape");
  }
  return autoencoder.slice(0, config.encoder_layers());
}

Matrix encode(const Mlp& encoder, const Matrix& batch) { return forward(encoder, batch); }

}  // namespace psc
