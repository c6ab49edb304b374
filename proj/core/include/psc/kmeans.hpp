#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "psc/matrix.hpp"

namespace psc {

// Cluster IDs in 0..k-1, one per clustered row.
struct ClusterAssignment {
  std::vector<std::int64_t> labels;
  std::size_t k = 0;
};

struct Centroids {
  Matrix centers;  // k x p
  double inertia = 0.0;
};

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::size_t restarts = 10;
};

struct KMeansResult {
  ClusterAssignment assignment;
  Centroids centroids;
  std::size_t iterations = 0;  // Lloyd steps of the winning restart
  // Inertia after each Lloyd step of the winning restart.
  std::vector<double> inertia_history;
};

// k-means++ seeding followed by Lloyd iterations, repeated `restarts` times
// with forked streams of `seed`; the lowest-inertia run wins (earliest on
// ties). Stops when the largest centroid move is below `tol` or at
// `max_iter`. Empty clusters are reseeded with the point farthest from its
// centroid.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

// Nearest centroid by squared Euclidean distance, lowest index on ties.
ClusterAssignment assign_nearest(const Matrix& points, const Centroids& centroids);

// Sum of squared distances from each point to its assigned center.
double inertia(const Matrix& points, const Matrix& centers,
               const std::vector<std::int64_t>& labels);

}  // namespace psc
