#include "psc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "psc/error.hpp"

namespace psc {
namespace {

void check_pair(std::span<const std::int64_t> truth, std::span<const std::int64_t> predicted,
                std::size_t min_size) {
  if (truth.size() != predicted.size()) {
    throw ShapeError("label vectors differ in length: " + std::to_string(truth.size()) + " vs " +
                     std::to_string(predicted.size()));
  }
  if (truth.size() < min_size) {
    throw ConfigError("need at least " + std::to_string(min_size) + " labels, got " +
                      std::to_string(truth.size()));
  }
}

std::vector<std::size_t> dense_ids(std::span<const std::int64_t> labels, std::size_t& distinct) {
  std::map<std::int64_t, std::size_t> ids;
  for (auto v : labels) ids.emplace(v, 0);
  std::size_t next = 0;
  for (auto& [label, id] : ids) id = next++;
  distinct = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
  return out;
}

double comb2(std::int64_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

// Same partition up to relabeling: every row and every column of the table
// has exactly one non-zero cell.
bool is_bijective(const ContingencyTable& t) {
  if (t.classes() != t.clusters()) return false;
  for (std::size_t i = 0; i < t.classes(); ++i) {
    std::size_t nz = 0;
    for (std::size_t j = 0; j < t.clusters(); ++j) nz += t(i, j) != 0;
    if (nz != 1) return false;
  }
  for (std::size_t j = 0; j < t.clusters(); ++j) {
    std::size_t nz = 0;
    for (std::size_t i = 0; i < t.classes(); ++i) nz += t(i, j) != 0;
    if (nz != 1) return false;
  }
  return true;
}

double entropy(const std::vector<std::int64_t>& sums, double n) {
  double h = 0.0;
  for (auto s : sums)
    if (s > 0) {
      const double q = static_cast<double>(s) / n;
      h -= q * std::log(q);
    }
  return h;
}

}  // namespace

ContingencyTable::ContingencyTable(std::span<const std::int64_t> truth,
                                   std::span<const std::int64_t> predicted) {
  check_pair(truth, predicted, 0);
  std::size_t rows = 0;
  std::size_t cols = 0;
  const auto r = dense_ids(truth, rows);
  const auto c = dense_ids(predicted, cols);
  counts_.assign(rows * cols, 0);
  row_sums_.assign(rows, 0);
  col_sums_.assign(cols, 0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    ++counts_[r[i] * cols + c[i]];
    ++row_sums_[r[i]];
    ++col_sums_[c[i]];
  }
  total_ = static_cast<std::int64_t>(truth.size());
}

std::vector<std::size_t> hungarian_min_cost(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw ShapeError("cost matrix is not n x n");
  // Shortest augmenting path with row/column potentials; 1-based internally.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[col0] = true;
      const std::size_t i0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j)
    if (match[j] != 0) assignment[match[j] - 1] = j - 1;
  return assignment;
}

double cluster_accuracy(std::span<const std::int64_t> truth,
                        std::span<const std::int64_t> predicted) {
  check_pair(truth, predicted, 1);
  const ContingencyTable t(truth, predicted);
  const std::size_t m = std::max(t.classes(), t.clusters());
  std::vector<double> cost(m * m, 0.0);
  for (std::size_t i = 0; i < t.classes(); ++i)
    for (std::size_t j = 0; j < t.clusters(); ++j) cost[i * m + j] = -static_cast<double>(t(i, j));
  const auto match = hungarian_min_cost(cost, m);
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < t.classes(); ++i)
    if (match[i] < t.clusters()) hits += t(i, match[i]);
  return static_cast<double>(hits) / static_cast<double>(t.total());
}

double adjusted_rand_index(std::span<const std::int64_t> truth,
                           std::span<const std::int64_t> predicted) {
  check_pair(truth, predicted, 2);
  const ContingencyTable t(truth, predicted);
  double index = 0.0;
  for (std::size_t i = 0; i < t.classes(); ++i)
    for (std::size_t j = 0; j < t.clusters(); ++j) index += comb2(t(i, j));
  double a = 0.0;
  double b = 0.0;
  for (auto s : t.row_sums()) a += comb2(s);
  for (auto s : t.col_sums()) b += comb2(s);
  const double expected = a * b / comb2(t.total());
  const double max_index = 0.5 * (a + b);
  const double denom = max_index - expected;
  if (denom == 0.0) return is_bijective(t) ? 1.0 : 0.0;
  return (index - expected) / denom;
}

double expected_mutual_information(const ContingencyTable& table) {
  const std::int64_t n = table.total();
  const double nd = static_cast<double>(n);
  const double lg_n = std::lgamma(nd + 1.0);
  double emi = 0.0;
  for (auto ai : table.row_sums()) {
    for (auto bj : table.col_sums()) {
      const double a = static_cast<double>(ai);
      const double b = static_cast<double>(bj);
      // log of a! b! (n-a)! (n-b)! / n!
      const double lg_fixed = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) +
                              std::lgamma(nd - a + 1.0) + std::lgamma(nd - b + 1.0) - lg_n;
      const std::int64_t lo = std::max<std::int64_t>(1, ai + bj - n);
      const std::int64_t hi = std::min(ai, bj);
      for (std::int64_t nij = lo; nij <= hi; ++nij) {
        const double x = static_cast<double>(nij);
        const double log_p = lg_fixed - std::lgamma(x + 1.0) - std::lgamma(a - x + 1.0) -
                             std::lgamma(b - x + 1.0) - std::lgamma(nd - a - b + x + 1.0);
        emi += x / nd * std::log(nd * x / (a * b)) * std::exp(log_p);
      }
    }
  }
  return emi;
}

double adjusted_mutual_info(std::span<const std::int64_t> truth,
                            std::span<const std::int64_t> predicted) {
  check_pair(truth, predicted, 2);
  const ContingencyTable t(truth, predicted);
  const double n = static_cast<double>(t.total());
  if (t.classes() == 1 || t.clusters() == 1) {
    return (t.classes() == 1 && t.clusters() == 1) ? 1.0 : 0.0;
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < t.classes(); ++i)
    for (std::size_t j = 0; j < t.clusters(); ++j) {
      const auto c = t(i, j);
      if (c == 0) continue;
      const double cd = static_cast<double>(c);
      mi += cd / n *
            std::log(n * cd /
                     (static_cast<double>(t.row_sums()[i]) * static_cast<double>(t.col_sums()[j])));
    }
  const double emi = expected_mutual_information(t);
  const double normalizer = 0.5 * (entropy(t.row_sums(), n) + entropy(t.col_sums(), n));
  const double denom = normalizer - emi;
  if (std::abs(denom) < 1e-15) return is_bijective(t) ? 1.0 : 0.0;
  return (mi - emi) / denom;
}

QualityScores evaluate(std::span<const std::int64_t> truth,
                       std::span<const std::int64_t> predicted) {
  return {cluster_accuracy(truth, predicted), adjusted_rand_index(truth, predicted),
          adjusted_mutual_info(truth, predicted)};
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw ConfigError("mean/std of zero values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

QualitySummary trial_summary(std::span<const QualityScores> scores) {
  if (scores.empty()) throw ConfigError("trial summary needs at least one trial");
  std::vector<double> acc, ari, ami;
  for (const auto& s : scores) {
    acc.push_back(s.cluster_acc);
    ari.push_back(s.ari);
    ami.push_back(s.ami);
  }
  return {mean_std(acc), mean_std(ari), mean_std(ami), scores.size()};
}

}  // namespace psc
