#include "psc/spectral.hpp"

#include <string>

#include "psc/error.hpp"

namespace psc {

std::vector<std::string> validate(const ScConfig& config, std::size_t n, std::size_t d) {
  const std::size_t p = config.width();
  if (config.k == 0) throw ConfigError("k must be at least 1");
  if (config.k > n) {
    throw ConfigError("k=" + std::to_string(config.k) + " exceeds the " + std::to_string(n) +
                      " available points");
  }
  if (p == 0) throw ConfigError("embedding width p must be at least 1");
  if (p > n) {
    throw ConfigError("embedding width p=" + std::to_string(p) + " exceeds the " +
                      std::to_string(n) + " available points");
  }
  if (p > d) {
    throw ConfigError("embedding width p=" + std::to_string(p) +
                      " exceeds the input dimension d=" + std::to_string(d));
  }
  if (config.sigma && !(*config.sigma > 0.0)) throw ConfigError("sigma must be positive");
  std::vector<std::string> warnings;
  if (p == d) {
    warnings.push_back("embedding width p=" + std::to_string(p) +
                       " equals the input dimension; no reduction");
  }
  if (p < config.k) {
    warnings.push_back("embedding width p=" + std::to_string(p) + " is below k=" +
                       std::to_string(config.k));
  }
  return warnings;
}

ScResult spectral_cluster(const Matrix& data, const ScConfig& config) {
  validate(config, data.rows(), data.cols());
  require_finite(data, "input data");
  const double sigma = config.sigma ? *config.sigma : median_heuristic_sigma(data);
  // Both n x n matrices stay alive together, as in the reference pipeline.
  const SimilarityMatrix sim = gaussian_similarity(data, sigma, config.threads);
  const LaplacianMatrix lap = normalized_laplacian(sim);
  SpectralEmbedding embedding = spectral_embedding(lap, config.width(), config.eigen_backend);
  Matrix points = embedding.vectors;
  if (config.normalize_rows) normalize_rows(points);
  KMeansResult km = kmeans(points, config.k, config.seed, config.kmeans);
  return {std::move(km.assignment), std::move(embedding), sigma};
}

}  // namespace psc
