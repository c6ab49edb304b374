#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace psc {

// Dense row-major matrix of doubles. Rows may be zero (an empty batch) but a
// matrix always knows its column count.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  // New matrix made of the given rows, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;
  // Rows of `other` appended below this matrix. Column counts must match.
  void append_rows(const Matrix& other);
  Matrix transposed() const;

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Throws ConfigError unless every entry is finite. `what` names
// the argument in the message.
void require_finite(const Matrix& m, const std::string& what);

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

// C = A * B^T using BLAS. A is m x k, B is n x k, result is m x n.
Matrix multiply_transposed(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m) noexcept;

}  // namespace psc
