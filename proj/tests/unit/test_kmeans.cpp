#include <gtest/gtest.h>

#include "oracles.hpp"
#include "psc/dataio.hpp"
#include "psc/error.hpp"
#include "psc/kmeans.hpp"
#include "psc/metrics.hpp"

using psc::Matrix;

TEST(KMeans, SeparatedPairs) {
  const Matrix x(4, 2, {0, 0, 0, 1, 10, 0, 10, 1});
  const auto r = psc::kmeans(x, 2, 1);
  EXPECT_EQ(r.assignment.labels[0], r.assignment.labels[1]);
  EXPECT_EQ(r.assignment.labels[2], r.assignment.labels[3]);
  EXPECT_NE(r.assignment.labels[0], r.assignment.labels[2]);
  EXPECT_NEAR(r.centroids.inertia, 1.0, 1e-12);
}

TEST(KMeans, SingleClusterIsColumnMean) {
  const Matrix x = psc::oracle::random_matrix(25, 3, 2);
  const auto r = psc::kmeans(x, 1, 0);
  double total = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0;
    for (std::size_t i = 0; i < 25; ++i) m += x(i, c);
    m /= 25;
    EXPECT_NEAR(r.centroids.centers(0, c), m, 1e-12);
    for (std::size_t i = 0; i < 25; ++i) total += (x(i, c) - m) * (x(i, c) - m);
  }
  EXPECT_NEAR(r.centroids.inertia, total, 1e-10);
}

TEST(KMeans, ExhaustiveOptimumForEightPoints) {
  psc::KMeansOptions opt;
  opt.restarts = 20;
  for (std::uint64_t s = 0; s < 25; ++s) {
    const Matrix x = psc::oracle::random_matrix(8, 2, 500 + s);
    const auto r = psc::kmeans(x, 2, s, opt);
    EXPECT_NEAR(r.centroids.inertia, psc::oracle::exhaustive_two_means(x), 1e-9) << s;
  }
}

TEST(KMeans, InertiaNonIncreasingAndConsistent) {
  const auto d = psc::gen_blobs(400, 3, 5, 2.5, 4.0, 6);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto r = psc::kmeans(d.data, 5, s);
    ASSERT_FALSE(r.inertia_history.empty());
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
      EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] * (1 + 1e-12));
    EXPECT_NEAR(r.centroids.inertia, psc::oracle::inertia_of(d.data, r.assignment.labels), 1e-8);
    for (auto l : r.assignment.labels) {
      EXPECT_GE(l, 0);
      EXPECT_LT(l, 5);
    }
  }
}

TEST(KMeans, DeterministicAndTranslationInvariant) {
  Matrix x = psc::oracle::random_matrix(200, 2, 9);
  const auto a = psc::kmeans(x, 4, 17);
  EXPECT_EQ(a.assignment.labels, psc::kmeans(x, 4, 17).assignment.labels);
  for (std::size_t i = 0; i < 200; ++i) {
    x(i, 0) += 0.5;
    x(i, 1) -= 0.25;
  }
  const auto b = psc::kmeans(x, 4, 17);
  EXPECT_DOUBLE_EQ(psc::adjusted_rand_index(a.assignment.labels, b.assignment.labels), 1.0);
}

TEST(KMeans, DuplicatePointsKeepAllClusters) {
  // Five identical points and k=3 forces empty-cluster repair paths.
  Matrix x(6, 1, {1, 1, 1, 1, 1, 2});
  const auto r = psc::kmeans(x, 3, 0);
  EXPECT_EQ(r.assignment.k, 3u);
  EXPECT_EQ(r.assignment.labels.size(), 6u);
}

TEST(KMeans, Errors) {
  EXPECT_THROW(psc::kmeans(Matrix(3, 2), 4, 0), psc::ConfigError);
  EXPECT_THROW(psc::kmeans(Matrix(3, 2), 0, 0), psc::ConfigError);
}

TEST(AssignNearest, TiesAndOracle) {
  psc::Centroids c{Matrix(3, 1, {-1.0, 0.0, 1.0}), 0.0};
  EXPECT_EQ(psc::assign_nearest(Matrix(1, 1, {0.0}), c).labels[0], 1);
  psc::Centroids tie{Matrix(3, 1, {-1.0, 5.0, 1.0}), 0.0};
  EXPECT_EQ(psc::assign_nearest(Matrix(1, 1, {0.0}), tie).labels[0], 0);

  const Matrix pts = psc::oracle::random_matrix(50, 3, 70);
  psc::Centroids cents{psc::oracle::random_matrix(4, 3, 71), 0.0};
  const auto a = psc::assign_nearest(pts, cents);
  for (std::size_t i = 0; i < 50; ++i) {
    std::int64_t best = 0;
    double best_d = 1e300;
    for (std::size_t k = 0; k < 4; ++k) {
      double d = 0;
      for (std::size_t c2 = 0; c2 < 3; ++c2)
        d += (pts(i, c2) - cents.centers(k, c2)) * (pts(i, c2) - cents.centers(k, c2));
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::int64_t>(k);
      }
    }
    EXPECT_EQ(a.labels[i], best);
  }
  EXPECT_THROW(psc::assign_nearest(Matrix(1, 2), cents), psc::ShapeError);
}
