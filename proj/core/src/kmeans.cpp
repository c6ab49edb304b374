#include "psc/kmeans.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "psc/error.hpp"
#include "psc/rng.hpp"

namespace psc {
namespace {

struct Nearest {
  std::int64_t label;
  double distance;
};

Nearest nearest(std::span<const double> x, const Matrix& centers) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d = squared_distance(x, centers.row(c));
    if (d < best.distance) best = {static_cast<std::int64_t>(c), d};
  }
  return best;
}

Matrix plus_plus_seeds(const Matrix& points, std::size_t k, SplitMix64& rng) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < k; ++c) {
    const auto src = points.row(pick);
    std::copy(src.begin(), src.end(), centers.row(c).begin());
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), src));
      total += d2[i];
    }
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
  }
  return centers;
}

struct LloydRun {
  Matrix centers;
  std::vector<std::int64_t> labels;
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::vector<double> history;
};

double assign_all(const Matrix& points, const Matrix& centers, std::vector<std::int64_t>& labels,
                  std::vector<double>& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto nb = nearest(points.row(i), centers);
    labels[i] = nb.label;
    dist[i] = nb.distance;
    total += nb.distance;
  }
  return total;
}

LloydRun lloyd(const Matrix& points, std::size_t k, SplitMix64& rng, const KMeansOptions& opt) {
  const std::size_t n = points.rows();
  const std::size_t p = points.cols();
  LloydRun run{plus_plus_seeds(points, k, rng), std::vector<std::int64_t>(n), 0.0, 0, {}};
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(k);
  Matrix sums(k, p);

  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    run.inertia = assign_all(points, run.centers, run.labels, dist);
    run.history.push_back(run.inertia);
    ++run.iterations;

    std::fill(counts.begin(), counts.end(), std::size_t{0});
    std::fill(sums.values().begin(), sums.values().end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(run.labels[i]);
      ++counts[c];
      auto dst = sums.row(c);
      const auto src = points.row(i);
      for (std::size_t j = 0; j < p; ++j) dst[j] += src[j];
    }
    std::vector<bool> taken(n, false);
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      auto center = run.centers.row(c);
      if (counts[c] == 0) {
        // Reseed with the point farthest from its own centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i)
          if (!taken[i] && dist[i] > far_d) {
            far_d = dist[i];
            far = i;
          }
        taken[far] = true;
        dist[far] = 0.0;
        const auto src = points.row(far);
        shift = std::max(shift, std::sqrt(squared_distance(center, src)));
        std::copy(src.begin(), src.end(), center.begin());
        continue;
      }
      double moved = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double v = sums(c, j) / static_cast<double>(counts[c]);
        moved += (v - center[j]) * (v - center[j]);
        center[j] = v;
      }
      shift = std::max(shift, std::sqrt(moved));
    }
    if (shift < opt.tol) break;
  }
  run.inertia = assign_all(points, run.centers, run.labels, dist);
  run.history.push_back(run.inertia);
  return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (k == 0) throw ConfigError("k-means needs k >= 1");
  if (k > points.rows()) {
    throw ConfigError("k-means with k=" + std::to_string(k) + " on only " +
                      std::to_string(points.rows()) + " points");
  }
  require_finite(points, "k-means input");
  SplitMix64 rng(seed);
  const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
  LloydRun best;
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    SplitMix64 stream = rng.fork();
    LloydRun run = lloyd(points, k, stream, options);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  KMeansResult out;
  out.assignment = {std::move(best.labels), k};
  out.centroids = {std::move(best.centers), best.inertia};
  out.iterations = best.iterations;
  out.inertia_history = std::move(best.history);
  return out;
}

ClusterAssignment assign_nearest(const Matrix& points, const Centroids& centroids) {
  if (points.cols() != centroids.centers.cols()) {
    throw ShapeError("points have " + std::to_string(points.cols()) + " columns, centroids " +
                     std::to_string(centroids.centers.cols()));
  }
  ClusterAssignment out{std::vector<std::int64_t>(points.rows()), centroids.centers.rows()};
  for (std::size_t i = 0; i < points.rows(); ++i)
    out.labels[i] = nearest(points.row(i), centroids.centers).label;
  return out;
}

double inertia(const Matrix& points, const Matrix& centers,
               const std::vector<std::int64_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    total += squared_distance(points.row(i), centers.row(static_cast<std::size_t>(labels[i])));
  return total;
}

}  // namespace psc
