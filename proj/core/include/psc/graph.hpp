#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "psc/eigensolver.hpp"
#include "psc/matrix.hpp"

namespace psc {

// Dense symmetric similarity matrix with unit diagonal and entries in (0, 1].
class SimilarityMatrix {
 public:
  explicit SimilarityMatrix(Matrix values) : values_(std::move(values)) {}
  std::size_t order() const noexcept { return values_.rows(); }
  const Matrix& values() const noexcept { return values_; }

 private:
  Matrix values_;
};

// L = D^{-1/2} S D^{-1/2} with d_ii = sum_j s_ij. Its largest eigenvalue is 1
// with eigenvector proportional to the degree roots.
class LaplacianMatrix {
 public:
  LaplacianMatrix(Matrix values, std::vector<double> degree_roots)
      : values_(std::move(values)), degree_roots_(std::move(degree_roots)) {}
  std::size_t order() const noexcept { return values_.rows(); }
  const Matrix& values() const noexcept { return values_; }
  const std::vector<double>& degree_roots() const noexcept { return degree_roots_; }

 private:
  Matrix values_;
  std::vector<double> degree_roots_;
};

// Top-p eigenvectors of a Laplacian as columns, eigenvalues descending, each
// column sign-canonicalized.
struct SpectralEmbedding {
  Matrix vectors;
  std::vector<double> eigenvalues;
};

// Kernel evaluated on squared Euclidean distance. Only the Gaussian ships.
using DistanceKernel = std::function<double(double squared_distance)>;

DistanceKernel gaussian_kernel(double sigma);

// s_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)), evaluated once per unordered
// pair and mirrored. `threads` > 1 splits rows across workers; the result is
// bit-identical for any worker count.
SimilarityMatrix gaussian_similarity(const Matrix& data, double sigma, unsigned threads = 1);

SimilarityMatrix kernel_similarity(const Matrix& data, const DistanceKernel& kernel,
                                   unsigned threads = 1);

// Median of the n(n-1)/2 pairwise Euclidean distances, or 1 when it is zero.
double median_heuristic_sigma(const Matrix& data);

LaplacianMatrix normalized_laplacian(const SimilarityMatrix& sim);

// Negates each column whose largest-magnitude entry (lowest index on ties)
// is negative.
void canonicalize_signs(Matrix& vectors);

SpectralEmbedding spectral_embedding(const LaplacianMatrix& lap, std::size_t p,
                                     EigenBackend backend = EigenBackend::kHouseholderQL);

// Scales each row to unit Euclidean norm (zero rows are left as is).
void normalize_rows(Matrix& m);

}  // namespace psc
