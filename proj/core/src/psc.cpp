#include "psc/psc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "psc/error.hpp"
#include "psc/rng.hpp"
#include "psc/spectral.hpp"

namespace psc {
namespace {

constexpr std::size_t kEmbedChunk = 1024;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void PscModel::validate() const {
  if (!(sample_rate > 0.0 && sample_rate <= 1.0)) {
    throw FormatError("sample rate " + std::to_string(sample_rate) + " outside (0, 1]");
  }
  if (regressor.input_width() != d || regressor.output_width() != p) {
    throw FormatError("regressor maps " + std::to_string(regressor.input_width()) + " -> " +
                      std::to_string(regressor.output_width()) + " but the model declares d=" +
                      std::to_string(d) + ", p=" + std::to_string(p));
  }
  if (scaler && (scaler->mean.size() != d || scaler->std.size() != d)) {
    throw FormatError("scaler width does not match d=" + std::to_string(d));
  }
}

std::size_t sample_size(std::size_t n, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw ConfigError("sampling rate must lie in (0, 1], got " + std::to_string(rate));
  }
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

std::vector<std::size_t> sample_rows(std::size_t n, double rate, std::uint64_t seed) {
  const std::size_t nu = sample_size(n, rate);
  if (nu == n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  SplitMix64 rng(seed ^ 0x243F6A8885A308D3ULL);
  auto picked = sample_without_replacement(n, nu, rng);
  std::sort(picked.begin(), picked.end());
  return picked;
}

PscTraining psc_train_detailed(const Matrix& data, const PscTrainConfig& config) {
  require_finite(data, "training data");
  config.hp.validate();
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t nu = sample_size(n, config.sample_rate);
  if (config.p == 0) throw ConfigError("embedding width p must be at least 1");
  if (config.p > d) {
    throw ConfigError("embedding width p=" + std::to_string(config.p) +
                      " exceeds the input dimension d=" + std::to_string(d));
  }
  if (nu < std::max<std::size_t>(config.p, 2)) {
    throw ConfigError("sample of " + std::to_string(nu) + " rows (rate " +
                      std::to_string(config.sample_rate) + " of " + std::to_string(n) +
                      ") is too small for " + std::to_string(config.p) + " eigenvectors");
  }
  if (config.sigma && !(*config.sigma > 0.0)) throw ConfigError("sigma must be positive");

  PscTraining out;
  out.model.d = d;
  out.model.p = config.p;
  out.model.sample_rate = config.sample_rate;
  out.model.sample_size = nu;
  out.model.train_seed = config.hp.seed;

  Matrix scaled;
  const Matrix* source = &data;
  if (config.standardize) {
    auto st = standardize(data);
    scaled = std::move(st.data);
    out.model.scaler = std::move(st.params);
    source = &scaled;
  }

  out.sample = sample_rows(n, config.sample_rate, config.hp.seed);
  const Matrix sample = source->select_rows(out.sample);
  out.model.sigma = config.sigma ? *config.sigma : median_heuristic_sigma(sample);
  {
    const SimilarityMatrix sim = gaussian_similarity(sample, out.model.sigma, config.threads);
    const LaplacianMatrix lap = normalized_laplacian(sim);
    out.targets = spectral_embedding(lap, config.p, config.eigen_backend);
  }

  // Eigenvector entries shrink like 1/sqrt(nu); fit sqrt(nu) V instead and
  // fold the factor back into the output layer.
  const double gain = std::sqrt(static_cast<double>(nu));
  Matrix scaled_targets = out.targets.vectors;
  for (double& v : scaled_targets.values()) v *= gain;
  const MlpConfig mlp = MlpConfig::regressor(d, config.hidden, config.p);
  TrainedMlp trained = train_regressor(sample, scaled_targets, mlp, config.hp);
  DenseLayer& last = trained.model.layers().back();
  for (double& w : last.weights.values()) w /= gain;
  for (double& b : last.bias) b /= gain;
  out.model.regressor = std::move(trained.model);
  out.model.final_train_mse = mean_squared_error(out.model.regressor, sample, out.targets.vectors);
  out.report = std::move(trained.report);
  out.report.final_mse = out.model.final_train_mse;
  return out;
}

PscModel psc_train(const Matrix& data, const PscTrainConfig& config) {
  return psc_train_detailed(data, config).model;
}

Matrix psc_embed(const PscModel& model, const Matrix& data) {
  if (data.cols() != model.d) {
    throw ShapeError("model expects " + std::to_string(model.d) + " columns, data has " +
                     std::to_string(data.cols()));
  }
  Matrix out(data.rows(), model.p);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.rows(); start += kEmbedChunk) {
    const std::size_t stop = std::min(data.rows(), start + kEmbedChunk);
    idx.resize(stop - start);
    for (std::size_t i = start; i < stop; ++i) idx[i - start] = i;
    Matrix chunk = data.select_rows(idx);
    if (model.scaler) chunk = model.scaler->apply(chunk);
    const Matrix u = forward(model.regressor, chunk);
    std::copy(u.values().begin(), u.values().end(), out.row(start).begin());
  }
  return out;
}

ClusterAssignment psc_cluster(const PscModel& model, const Matrix& data, std::size_t k,
                              std::uint64_t seed, const KMeansOptions& options) {
  if (k > data.rows()) {
    throw ConfigError("k=" + std::to_string(k) + " exceeds the " + std::to_string(data.rows()) +
                      " points to cluster");
  }
  return kmeans(psc_embed(model, data), k, seed, options).assignment;
}

std::string to_string(IncrementalMode mode) {
  return mode == IncrementalMode::kReclusterAll ? "recluster-all" : "assign-to-centroids";
}

IncrementalMode incremental_mode_from_string(const std::string& name) {
  if (name == "recluster-all") return IncrementalMode::kReclusterAll;
  if (name == "assign-to-centroids") return IncrementalMode::kAssignToCentroids;
  throw ConfigError("unknown incremental mode '" + name +
                    "' (expected recluster-all or assign-to-centroids)");
}

IncrementalSession::IncrementalSession(PscModel model, IncrementalMode mode,
                                       KMeansOptions options)
    : model_(std::move(model)), mode_(mode), options_(options), embeddings_(0, model_.p) {
  model_.validate();
}

const ClusterAssignment& IncrementalSession::extend(const Matrix& batch, std::size_t k,
                                                    std::uint64_t seed) {
  if (batch.cols() != model_.d) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                     std::to_string(model_.d));
  }
  const bool have_centroids = assignment_.k != 0;
  if (mode_ == IncrementalMode::kAssignToCentroids && have_centroids && k != assignment_.k) {
    throw ConfigError("session clusters into k=" + std::to_string(assignment_.k) +
                      " but extend asked for k=" + std::to_string(k));
  }

  auto start = std::chrono::steady_clock::now();
  const Matrix fresh = psc_embed(model_, batch);
  last_embed_seconds_ = seconds_since(start);

  start = std::chrono::steady_clock::now();
  if (mode_ == IncrementalMode::kAssignToCentroids && have_centroids) {
    const ClusterAssignment added = assign_nearest(fresh, centroids_);
    embeddings_.append_rows(fresh);
    assignment_.labels.insert(assignment_.labels.end(), added.labels.begin(), added.labels.end());
  } else {
    Matrix all = embeddings_;
    all.append_rows(fresh);
    KMeansResult km = kmeans(all, k, seed, options_);
    embeddings_ = std::move(all);
    assignment_ = std::move(km.assignment);
    centroids_ = std::move(km.centroids);
  }
  last_cluster_seconds_ = seconds_since(start);
  return assignment_;
}

}  // namespace psc
