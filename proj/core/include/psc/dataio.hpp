#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psc/matrix.hpp"

namespace psc {

// Ground-truth class IDs paired with a data matrix. IDs need not be contiguous.
using LabelVector = std::vector<std::int64_t>;

struct LabeledData {
  Matrix data;
  std::optional<LabelVector> labels;
};

// Per-column affine map x -> (x - mean) / std. Constant columns carry std = 1
// so they map to zero.
struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> std;

  Matrix apply(const Matrix& data) const;
  Matrix inverse(const Matrix& data) const;
};

// Comma-separated, header row required, optional double-quoted fields, '.' as
// decimal separator. The named label column is removed from the features;
// label cells must be integers.
LabeledData load_csv(const std::filesystem::path& path,
                     const std::optional<std::string>& label_column = std::nullopt);

// IDX image file (magic 0x00000803, big-endian counts). Each image becomes one
// row with pixels scaled to [0, 1].
Matrix load_idx(const std::filesystem::path& path);

// IDX label file (magic 0x00000801).
LabelVector load_idx_labels(const std::filesystem::path& path);

// Two concentric circles, n/2 points each, Gaussian radial noise. Label 0 is
// the inner circle.
LabeledData gen_circles(std::size_t n, double radius_inner, double radius_outer,
                        double noise_std, std::uint64_t seed);

// Isotropic Gaussian blobs: `centers` centers drawn uniformly in
// [-center_box, center_box]^dim, then round-robin membership.
LabeledData gen_blobs(std::size_t n, std::size_t dim, std::size_t centers, double cluster_std,
                      double center_box, std::uint64_t seed);

struct Standardized {
  Matrix data;
  ScalerParams params;
};

// Population (divide-by-n) standardization. Requires at least two rows.
Standardized standardize(const Matrix& data);

// Single-column CSV with the given header.
void write_labels_csv(const std::filesystem::path& path, const std::vector<std::int64_t>& labels,
                      const std::string& header = "cluster");
LabelVector read_labels_csv(const std::filesystem::path& path,
                            const std::optional<std::string>& column = std::nullopt);

void write_csv(const std::filesystem::path& path, const Matrix& data,
               const std::optional<LabelVector>& labels = std::nullopt);

}  // namespace psc
