#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace psc {

// Co-occurrence counts: rows are ground-truth classes, columns predicted
// clusters, each indexed by ascending label value.
class ContingencyTable {
 public:
  ContingencyTable(std::span<const std::int64_t> truth, std::span<const std::int64_t> predicted);

  std::size_t classes() const noexcept { return row_sums_.size(); }
  std::size_t clusters() const noexcept { return col_sums_.size(); }
  std::int64_t total() const noexcept { return total_; }
  std::int64_t operator()(std::size_t i, std::size_t j) const noexcept {
    return counts_[i * col_sums_.size() + j];
  }
  const std::vector<std::int64_t>& row_sums() const noexcept { return row_sums_; }
  const std::vector<std::int64_t>& col_sums() const noexcept { return col_sums_; }

 private:
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> row_sums_;
  std::vector<std::int64_t> col_sums_;
  std::int64_t total_ = 0;
};

struct QualityScores {
  double cluster_acc = 0.0;
  double ari = 0.0;
  double ami = 0.0;
};

// Minimum-cost perfect matching on a square cost matrix (row-major, n x n).
// Returns the column matched to each row.
std::vector<std::size_t> hungarian_min_cost(std::span<const double> cost, std::size_t n);

// Best accuracy over injective relabelings of `predicted`, via maximum-weight
// matching on the zero-padded contingency table.
double cluster_accuracy(std::span<const std::int64_t> truth,
                        std::span<const std::int64_t> predicted);

double adjusted_rand_index(std::span<const std::int64_t> truth,
                           std::span<const std::int64_t> predicted);

// Exact expected mutual information under the hypergeometric model.
double expected_mutual_information(const ContingencyTable& table);

// Natural-log entropies, arithmetic-mean normalizer.
double adjusted_mutual_info(std::span<const std::int64_t> truth,
                            std::span<const std::int64_t> predicted);

QualityScores evaluate(std::span<const std::int64_t> truth, std::span<const std::int64_t> predicted);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Arithmetic mean and population standard deviation.
MeanStd mean_std(std::span<const double> values);

struct QualitySummary {
  MeanStd cluster_acc;
  MeanStd ari;
  MeanStd ami;
  std::size_t trials = 0;
};

QualitySummary trial_summary(std::span<const QualityScores> scores);

}  // namespace psc
