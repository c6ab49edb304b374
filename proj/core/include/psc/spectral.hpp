#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psc/graph.hpp"
#include "psc/kmeans.hpp"
#include "psc/matrix.hpp"

namespace psc {

struct ScConfig {
  std::size_t k = 2;
  // Embedding width; defaults to k.
  std::optional<std::size_t> p;
  // Gaussian bandwidth; median heuristic when unset.
  std::optional<double> sigma;
  std::uint64_t seed = 0;
  bool normalize_rows = false;
  EigenBackend eigen_backend = EigenBackend::kHouseholderQL;
  KMeansOptions kmeans;
  unsigned threads = 1;

  std::size_t width() const noexcept { return p.value_or(k); }
};

struct ScResult {
  ClusterAssignment assignment;
  SpectralEmbedding embedding;
  double sigma = 0.0;
};

// Throws ConfigError when the configuration cannot run on n x d data
// (k = 0, k > n, p = 0, p > n, p > d, sigma <= 0). Returns human-readable
// warnings for legal but unusual settings: p = d (no reduction) and p < k.
std::vector<std::string> validate(const ScConfig& config, std::size_t n, std::size_t d);

// Similarity -> normalized Laplacian -> top-p eigenvectors -> k-means.
ScResult spectral_cluster(const Matrix& data, const ScConfig& config);

}  // namespace psc
