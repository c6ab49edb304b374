#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"
#include "psc/dataio.hpp"
#include "psc/error.hpp"
#include "psc/memory.hpp"
#include "psc/metrics.hpp"
#include "psc/psc.hpp"
#include "psc/spectral.hpp"

using psc::Matrix;

namespace {

psc::PscTrainConfig iris_config(std::uint64_t seed, double rate = 1.0) {
  psc::PscTrainConfig c;
  c.p = 3;
  c.sample_rate = rate;
  c.hidden = {32, 64, 32};
  c.hp.seed = seed;
  return c;
}

const psc::LabeledData& iris() {
  static const auto d = psc::load_csv(psc::oracle::data_path("iris.csv"), "label");
  return d;
}

}  // namespace

TEST(Sampling, SizesAndDeterminism) {
  EXPECT_EQ(psc::sample_size(60000, 1.0 / 6.0), 10000u);
  EXPECT_EQ(psc::sample_size(150, 1.0), 150u);
  EXPECT_EQ(psc::sample_size(5, 0.5), 3u);
  const auto all = psc::sample_rows(40, 1.0, 9);
  std::vector<std::size_t> expect(40);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
  const auto a = psc::sample_rows(150, 0.5, 3);
  EXPECT_EQ(a, psc::sample_rows(150, 0.5, 3));
  EXPECT_EQ(a.size(), 75u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_NE(a, psc::sample_rows(150, 0.5, 4));
  EXPECT_THROW(psc::sample_size(10, 0.0), psc::ConfigError);
  EXPECT_THROW(psc::sample_size(10, 1.5), psc::ConfigError);
}

TEST(Train, DeterministicAtHalfRate) {
  const auto a = psc::psc_train_detailed(iris().data, iris_config(7, 0.5));
  const auto b = psc::psc_train_detailed(iris().data, iris_config(7, 0.5));
  EXPECT_EQ(a.sample, b.sample);
  EXPECT_EQ(a.sample.size(), 75u);
  EXPECT_TRUE(a.model.regressor == b.model.regressor);
  EXPECT_EQ(a.model.sigma, b.model.sigma);
  EXPECT_EQ(a.model.sample_size, 75u);
}

TEST(Train, FullRateTargetsAreTheScEmbedding) {
  const auto t = psc::psc_train_detailed(iris().data, iris_config(1));
  psc::ScConfig sc;
  sc.k = 3;
  sc.p = 3;
  const auto r = psc::spectral_cluster(iris().data, sc);
  EXPECT_EQ(t.targets.vectors, r.embedding.vectors);
  EXPECT_EQ(t.model.sigma, r.sigma);
  // The embedding of the training points deviates from V by exactly the
  // reported training error.
  const Matrix u = psc::psc_embed(t.model, iris().data);
  double msd = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = u.values()[i] - r.embedding.vectors.values()[i];
    msd += diff * diff;
  }
  msd /= static_cast<double>(u.size());
  EXPECT_LE(msd, t.model.final_train_mse + 1e-12);
  EXPECT_NEAR(msd, t.model.final_train_mse, 1e-12);
}

TEST(Cluster, IrisQualityBand) {
  std::vector<psc::QualityScores> scores;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto m = psc::psc_train(iris().data, iris_config(s));
    scores.push_back(psc::evaluate(*iris().labels, psc::psc_cluster(m, iris().data, 3, s).labels));
  }
  const auto summary = psc::trial_summary(scores);
  EXPECT_GE(summary.cluster_acc.mean, 0.85);
  EXPECT_LE(summary.cluster_acc.mean, 0.97);
}

TEST(Cluster, CirclesSelfConsistency) {
  const auto d = psc::gen_circles(600, 1.0, 5.0, 0.05, 4);
  psc::PscTrainConfig c;
  c.p = 2;
  c.sample_rate = 0.5;
  c.sigma = 1.0;
  c.hp.seed = 2;
  const auto m = psc::psc_train(d.data, c);
  EXPECT_GE(psc::cluster_accuracy(*d.labels, psc::psc_cluster(m, d.data, 2, 2).labels), 0.95);
}

TEST(Cluster, StandardizedWine) {
  const auto d = psc::load_csv(psc::oracle::data_path("wine.csv"), "label");
  psc::PscTrainConfig c;
  c.p = 3;
  c.hidden = {26, 52, 26};
  c.standardize = true;
  c.hp.seed = 1;
  const auto m = psc::psc_train(d.data, c);
  ASSERT_TRUE(m.scaler);
  EXPECT_GE(psc::cluster_accuracy(*d.labels, psc::psc_cluster(m, d.data, 3, 1).labels), 0.90);
}

TEST(Embed, EmptyBatchAndWidthMismatch) {
  const auto m = psc::psc_train(iris().data, iris_config(1, 0.4));
  EXPECT_EQ(psc::psc_embed(m, Matrix(0, 4)).rows(), 0u);
  EXPECT_EQ(psc::psc_embed(m, Matrix(0, 4)).cols(), 3u);
  EXPECT_THROW(psc::psc_embed(m, Matrix(2, 5)), psc::ShapeError);
  EXPECT_THROW(psc::psc_cluster(m, Matrix(2, 4), 3, 0), psc::ConfigError);
}

TEST(Embed, NoQuadraticAllocation) {
  const std::size_t n = 20000, d = 12, p = 10;
  psc::PscModel model;
  model.regressor = psc::Mlp::he_initialized(psc::MlpConfig::regressor(d, {32, 64, 32}, p), 1);
  model.d = d;
  model.p = p;
  model.sigma = 1.0;
  model.sample_size = 100;
  const Matrix x = psc::oracle::random_matrix(n, d, 2);
  const std::size_t bound = 64 * n * std::max(p, d);
  psc::MemoryProbe probe;
  psc::AllocationGuard guard(bound);
  const auto labels = psc::psc_cluster(model, x, 4, 0);
  probe.stop();
  EXPECT_FALSE(guard.tripped()) << guard.largest_seen();
  EXPECT_LT(probe.allocator_high_water(), bound);
  EXPECT_EQ(labels.labels.size(), n);
}

TEST(Train, Errors) {
  auto c = iris_config(1);
  c.p = 5;
  EXPECT_THROW(psc::psc_train(iris().data, c), psc::ConfigError);
  c = iris_config(1, 0.01);
  EXPECT_THROW(psc::psc_train(iris().data, c), psc::ConfigError);
  c = iris_config(1);
  c.sample_rate = 0.0;
  EXPECT_THROW(psc::psc_train(iris().data, c), psc::ConfigError);
  c.sample_rate = 1.0;
  c.sigma = -2.0;
  EXPECT_THROW(psc::psc_train(iris().data, c), psc::ConfigError);
}

TEST(Incremental, AssignModeKeepsOldLabels) {
  const auto d = psc::gen_blobs(600, 4, 3, 1.0, 8.0, 5);
  std::vector<std::size_t> base(400), rest(200);
  std::iota(base.begin(), base.end(), 0);
  std::iota(rest.begin(), rest.end(), 400);
  psc::PscTrainConfig c;
  c.p = 3;
  c.sample_rate = 0.5;
  c.hp.seed = 1;
  const auto model = psc::psc_train(d.data.select_rows(base), c);
  psc::IncrementalSession s(model, psc::IncrementalMode::kAssignToCentroids);
  const auto first = s.extend(d.data.select_rows(base), 3, 9).labels;
  const auto second = s.extend(d.data.select_rows(rest), 3, 9).labels;
  ASSERT_EQ(second.size(), 600u);
  EXPECT_TRUE(std::equal(first.begin(), first.end(), second.begin()));
  EXPECT_EQ(s.points_seen(), 600u);
  EXPECT_EQ(s.embeddings().rows(), 600u);
  // The blobs overlap slightly; raw k-means on the coordinates gets 0.988.
  const double raw = psc::cluster_accuracy(*d.labels, psc::kmeans(d.data, 3, 9).assignment.labels);
  EXPECT_GE(psc::cluster_accuracy(*d.labels, second), raw - 0.02);
  EXPECT_THROW(s.extend(d.data.select_rows(rest), 4, 9), psc::ConfigError);
  EXPECT_THROW(s.extend(Matrix(3, 5), 3, 9), psc::ShapeError);
  EXPECT_EQ(s.extend(Matrix(0, 4), 3, 9).labels, second);
}

TEST(Incremental, ReclusterAllMatchesDirectClustering) {
  const auto d = psc::gen_blobs(500, 4, 3, 1.0, 8.0, 6);
  psc::PscTrainConfig c;
  c.p = 3;
  c.sample_rate = 0.4;
  c.hp.seed = 3;
  const auto model = psc::psc_train(d.data, c);
  psc::IncrementalSession s(model);
  EXPECT_EQ(s.mode(), psc::IncrementalMode::kReclusterAll);
  std::vector<std::size_t> a(300), b(200);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 300);
  s.extend(d.data.select_rows(a), 3, 4);
  const auto all = psc::incremental_extend(s, d.data.select_rows(b), 3, 4).labels;
  EXPECT_EQ(all, psc::psc_cluster(model, d.data, 3, 4).labels);
  const auto again = s.extend(Matrix(0, 4), 3, 4).labels;
  EXPECT_EQ(psc::cluster_accuracy(all, again), 1.0);
  EXPECT_GE(s.last_embed_seconds(), 0.0);
  EXPECT_GE(s.last_cluster_seconds(), 0.0);
}

TEST(Incremental, ModeNames) {
  using psc::IncrementalMode;
  EXPECT_EQ(psc::incremental_mode_from_string("recluster-all"), IncrementalMode::kReclusterAll);
  EXPECT_EQ(psc::to_string(IncrementalMode::kAssignToCentroids), "assign-to-centroids");
  EXPECT_THROW(psc::incremental_mode_from_string("nope"), psc::ConfigError);
}
