#include "psc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "psc/error.hpp"

namespace psc {
namespace {

// Fills rows [first, last) of the upper triangle and mirrors each entry.
// Every unordered pair belongs to exactly one row range, so workers never
// write the same element.
void fill_rows(const Matrix& data, const DistanceKernel& kernel, Matrix& s, std::size_t first,
               std::size_t last) {
  const std::size_t n = data.rows();
  for (std::size_t i = first; i < last; ++i) {
    s(i, i) = 1.0;
    const auto xi = data.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kernel(squared_distance(xi, data.row(j)));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
}

}  // namespace

DistanceKernel gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("Gaussian bandwidth must be positive and finite, got " +
                      std::to_string(sigma));
  }
  const double scale = 1.0 / (2.0 * sigma * sigma);
  return [scale](double d2) { return std::exp(-d2 * scale); };
}

SimilarityMatrix kernel_similarity(const Matrix& data, const DistanceKernel& kernel,
                                   unsigned threads) {
  require_finite(data, "similarity input");
  const std::size_t n = data.rows();
  Matrix s(n, n);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    fill_rows(data, kernel, s, 0, n);
    return SimilarityMatrix(std::move(s));
  }
  // Split the triangle into row ranges with roughly equal pair counts.
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n);
  std::vector<std::size_t> bounds{0};
  for (unsigned t = 1; t < threads; ++t) {
    const double remaining = total * (1.0 - static_cast<double>(t) / threads);
    const auto row = static_cast<std::size_t>(static_cast<double>(n) - std::sqrt(2.0 * remaining));
    bounds.push_back(std::clamp(row, bounds.back(), n));
  }
  bounds.push_back(n);
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back(fill_rows, std::cref(data), std::cref(kernel), std::ref(s), bounds[t],
                           bounds[t + 1]);
    }
  }
  return SimilarityMatrix(std::move(s));
}

SimilarityMatrix gaussian_similarity(const Matrix& data, double sigma, unsigned threads) {
  return kernel_similarity(data, gaussian_kernel(sigma), threads);
}

double median_heuristic_sigma(const Matrix& data) {
  const std::size_t n = data.rows();
  if (n < 2) throw ConfigError("median heuristic needs at least 2 points");
  require_finite(data, "median heuristic input");
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(squared_distance(data.row(i), data.row(j)));
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double median = std::sqrt(d[mid]);
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + std::sqrt(lower));
  }
  return median > 0.0 ? median : 1.0;
}

LaplacianMatrix normalized_laplacian(const SimilarityMatrix& sim) {
  const Matrix& s = sim.values();
  const std::size_t n = s.rows();
  std::vector<double> roots(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (double v : s.row(i)) degree += v;
    if (!(degree > 0.0)) {
      throw NumericError("vertex " + std::to_string(i) + " has non-positive degree " +
                         std::to_string(degree));
    }
    roots[i] = std::sqrt(degree);
  }
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) l(i, j) = s(i, j) / (roots[i] * roots[j]);
  return LaplacianMatrix(std::move(l), std::move(roots));
}

void canonicalize_signs(Matrix& vectors) {
  for (std::size_t j = 0; j < vectors.cols(); ++j) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (vectors.rows() > 0 && vectors(best, j) < 0.0)
      for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, j) = -vectors(i, j);
  }
}

SpectralEmbedding spectral_embedding(const LaplacianMatrix& lap, std::size_t p,
                                     EigenBackend backend) {
  if (p == 0 || p > lap.order()) {
    throw ConfigError("embedding width p=" + std::to_string(p) + " must be in [1, " +
                      std::to_string(lap.order()) + "]");
  }
  auto eig = top_eigenpairs(lap.values(), p, backend);
  canonicalize_signs(eig.vectors);
  return {std::move(eig.vectors), std::move(eig.values)};
}

void normalize_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    double norm = 0.0;
    for (double v : r) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& v : r) v /= norm;
  }
}

}  // namespace psc
