#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psc/dataio.hpp"
#include "psc/graph.hpp"
#include "psc/kmeans.hpp"
#include "psc/matrix.hpp"
#include "psc/neural.hpp"

namespace psc {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Trained point-to-embedding map plus everything needed to apply it to new
// points the same way the training points were seen.
struct PscModel {
  Mlp regressor;
  std::size_t d = 0;
  std::size_t p = 0;
  double sigma = 0.0;
  std::optional<ScalerParams> scaler;
  double sample_rate = 1.0;
  std::size_t sample_size = 0;
  std::uint64_t train_seed = 0;
  double final_train_mse = 0.0;
  std::uint32_t format_version = kModelFormatVersion;

  // Throws FormatError when the regressor shape disagrees with d/p or the
  // rate is outside (0, 1].
  void validate() const;
};

struct PscTrainConfig {
  std::size_t p = 2;
  double sample_rate = 1.0;
  std::optional<double> sigma;
  std::vector<std::size_t> hidden{32, 64, 32};
  TrainHyperparams hp;
  bool standardize = false;
  EigenBackend eigen_backend = EigenBackend::kHouseholderQL;
  unsigned threads = 1;
};

struct PscTraining {
  PscModel model;
  // Sampled row indices, ascending.
  std::vector<std::size_t> sample;
  SpectralEmbedding targets;
  TrainReport report;
};

// round(r * n), halves rounded away from zero.
std::size_t sample_size(std::size_t n, double rate);

// Seeded sample of round(r n) distinct rows, returned in ascending order (so
// r = 1 yields 0..n-1).
std::vector<std::size_t> sample_rows(std::size_t n, double rate, std::uint64_t seed);

// Samples rows, builds the similarity/Laplacian/eigenvector targets on the
// sample only, then fits the regressor mapping sampled points to rows of V.
PscTraining psc_train_detailed(const Matrix& data, const PscTrainConfig& config);
PscModel psc_train(const Matrix& data, const PscTrainConfig& config);

// Forward pass (after the stored scaler). Allocates O(n * max(p, d)).
Matrix psc_embed(const PscModel& model, const Matrix& data);

ClusterAssignment psc_cluster(const PscModel& model, const Matrix& data, std::size_t k,
                              std::uint64_t seed, const KMeansOptions& options = {});

enum class IncrementalMode {
  // k-means over every embedding seen so far on each extension.
  kReclusterAll,
  // Label new points by their nearest existing centroid; old labels are
  // never touched. Extension beyond the reference algorithm.
  kAssignToCentroids,
};

std::string to_string(IncrementalMode mode);
IncrementalMode incremental_mode_from_string(const std::string& name);

// Single-writer state for clustering batches that arrive after training.
// Callers serialize concurrent extends.
class IncrementalSession {
 public:
  explicit IncrementalSession(PscModel model,
                              IncrementalMode mode = IncrementalMode::kReclusterAll,
                              KMeansOptions options = {});

  // Embeds only `batch`, appends it to the cache, and returns labels for
  // every point seen so far.
  const ClusterAssignment& extend(const Matrix& batch, std::size_t k, std::uint64_t seed);

  const PscModel& model() const noexcept { return model_; }
  IncrementalMode mode() const noexcept { return mode_; }
  const Matrix& embeddings() const noexcept { return embeddings_; }
  const ClusterAssignment& assignment() const noexcept { return assignment_; }
  const Centroids& centroids() const noexcept { return centroids_; }
  std::size_t points_seen() const noexcept { return embeddings_.rows(); }

  // Wall-clock split of the most recent extend().
  double last_embed_seconds() const noexcept { return last_embed_seconds_; }
  double last_cluster_seconds() const noexcept { return last_cluster_seconds_; }

 private:
  PscModel model_;
  IncrementalMode mode_;
  KMeansOptions options_;
  Matrix embeddings_;
  ClusterAssignment assignment_;
  Centroids centroids_;
  double last_embed_seconds_ = 0.0;
  double last_cluster_seconds_ = 0.0;
};

inline const ClusterAssignment& incremental_extend(IncrementalSession& session,
                                                   const Matrix& batch, std::size_t k,
                                                   std::uint64_t seed) {
  return session.extend(batch, k, seed);
}

// Text container: "key value" header lines, base64 little-endian IEEE-754
// blobs, and a trailing SHA-256 over every preceding byte. Bit-exact.
std::string serialize_model(const PscModel& model);
PscModel parse_model(const std::string& text);
void save_model(const PscModel& model, const std::filesystem::path& path);
PscModel load_model(const std::filesystem::path& path);

}  // namespace psc
