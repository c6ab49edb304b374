#include "psc/eigensolver.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "psc/error.hpp"

namespace psc {
namespace {

void require_square(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError("eigensolver needs a square matrix, got " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()));
  }
}

EigenDecomposition sorted_descending(const std::vector<double>& values, const Matrix& vectors,
                                     std::size_t count) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
  EigenDecomposition out{std::vector<double>(count), Matrix(vectors.rows(), count)};
  for (std::size_t j = 0; j < count; ++j) {
    out.values[j] = values[order[j]];
    for (std::size_t i = 0; i < vectors.rows(); ++i) out.vectors(i, j) = vectors(i, order[j]);
  }
  return out;
}

}  // namespace

void householder_tridiagonalize(Matrix& a, std::vector<double>& diag,
                                std::vector<double>& offdiag) {
  require_square(a);
  const std::size_t n = a.rows();
  diag.assign(n, 0.0);
  offdiag.assign(n, 0.0);
  if (n == 0) return;
  const int ld = static_cast<int>(n);
  std::vector<double> p(n);

  // Reflector k zeroes column k below the subdiagonal. The unit Householder
  // vector is kept in that same column (rows k+1..n-1); only the lower
  // triangle of the trailing block is maintained.
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    double* x = &a(k + 1, k);
    double tail = 0.0;
    for (std::size_t i = 1; i < m; ++i) tail += x[i * n] * x[i * n];
    if (tail == 0.0) {
      offdiag[k + 1] = x[0];
      for (std::size_t i = 0; i < m; ++i) x[i * n] = 0.0;  // identity reflector
      continue;
    }
    const double norm = std::sqrt(x[0] * x[0] + tail);
    const double alpha = x[0] > 0.0 ? -norm : norm;
    x[0] -= alpha;
    const double vnorm = std::sqrt(x[0] * x[0] + tail);
    for (std::size_t i = 0; i < m; ++i) x[i * n] /= vnorm;
    offdiag[k + 1] = alpha;

    // Trailing block B <- H B H = B - v q^T - q v^T with q = 2 B v - 2 (v^T B v) v.
    double* block = &a(k + 1, k + 1);
    cblas_dsymv(CblasRowMajor, CblasLower, static_cast<int>(m), 2.0, block, ld, x, ld, 0.0,
                p.data(), 1);
    const double kappa = 0.5 * cblas_ddot(static_cast<int>(m), x, ld, p.data(), 1);
    cblas_daxpy(static_cast<int>(m), -2.0 * kappa, x, ld, p.data(), 1);
    cblas_dsyr2(CblasRowMajor, CblasLower, static_cast<int>(m), -1.0, x, ld, p.data(), 1, block,
                ld);
  }
  if (n >= 2) offdiag[n - 1] = a(n - 1, n - 2);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);

  // Accumulate Q = H_0 H_1 ... H_{n-3} in place, innermost factor first.
  // Before step k the block [k+1.., k+1..] holds H_{k+1} ... H_{n-3}.
  std::vector<double> w(n);
  std::vector<double> v(n);
  const std::size_t last = n >= 2 ? n - 2 : 0;
  for (std::size_t i = last; i < n; ++i)
    for (std::size_t j = last; j < n; ++j) a(i, j) = (i == j) ? 1.0 : 0.0;
  for (std::size_t k = n >= 3 ? n - 3 : 0; n >= 3; --k) {
    const std::size_t m = n - k - 1;
    for (std::size_t i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
    double* block = &a(k + 1, k + 1);
    // Row/column k+1 of the block are the identity (H_{k+1} acts below it).
    for (std::size_t j = k + 1; j < n; ++j) {
      a(k + 1, j) = (j == k + 1) ? 1.0 : 0.0;
      a(j, k + 1) = (j == k + 1) ? 1.0 : 0.0;
    }
    // B <- B - 2 v (v^T B)
    cblas_dgemv(CblasRowMajor, CblasTrans, static_cast<int>(m), static_cast<int>(m), 1.0, block,
                ld, v.data(), 1, 0.0, w.data(), 1);
    cblas_dger(CblasRowMajor, static_cast<int>(m), static_cast<int>(m), -2.0, v.data(), 1,
               w.data(), 1, block, ld);
    if (k == 0) break;
  }
  for (std::size_t j = 0; j < n; ++j) {
    a(0, j) = (j == 0) ? 1.0 : 0.0;
    a(j, 0) = (j == 0) ? 1.0 : 0.0;
  }
}

void tridiagonal_ql(std::vector<double>& diag, std::vector<double>& offdiag, Matrix& z,
                    int max_sweeps) {
  const std::size_t n = diag.size();
  if (offdiag.size() != n || z.cols() != n) {
    throw ShapeError("tridiagonal_ql: inconsistent sizes");
  }
  if (n == 0) return;
  // Rotations act on columns of z; work on z^T so they touch contiguous rows.
  Matrix zt = z.transposed();
  const std::size_t zr = z.rows();
  std::vector<double> e(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = offdiag[i];
  std::vector<double>& d = diag;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Near-zero eigenvalues of a matrix with a large norm never push their
  // off-diagonal below eps * dd, so also split at the normwise rounding level.
  double tnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) tnorm = std::max(tnorm, std::abs(d[i]) + std::abs(e[i]));
  const double floor = eps * tnorm;

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m = l;
    for (;;) {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= floor) break;
      }
      if (m == l) break;
      if (iter++ == max_sweeps) {
        throw NumericError("eigensolver did not converge: order " + std::to_string(n) +
                           ", eigenvalue " + std::to_string(l) + ", residual " +
                           std::to_string(std::abs(e[l])) + " after " +
                           std::to_string(max_sweeps) + " sweeps");
      }
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool deflated = false;
      for (std::size_t i = m; i-- > l;) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        double* zi = zt.row(i).data();
        double* zi1 = zt.row(i + 1).data();
        for (std::size_t k = 0; k < zr; ++k) {
          const double t = zi1[k];
          zi1[k] = s * zi[k] + c * t;
          zi[k] = c * zi[k] - s * t;
        }
      }
      if (deflated) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
  z = zt.transposed();
  for (std::size_t i = 0; i < n; ++i) offdiag[i] = 0.0;
}

EigenDecomposition symmetric_eigen(const Matrix& a) {
  require_square(a);
  Matrix q = a;
  std::vector<double> d;
  std::vector<double> e;
  householder_tridiagonalize(q, d, e);
  tridiagonal_ql(d, e, q);
  return sorted_descending(d, q, d.size());
}

EigenDecomposition top_eigenpairs(const Matrix& a, std::size_t count, EigenBackend backend) {
  require_square(a);
  const std::size_t n = a.rows();
  if (count == 0 || count > n) {
    throw ConfigError("requested " + std::to_string(count) + " eigenpairs of an order-" +
                      std::to_string(n) + " matrix");
  }
  if (backend == EigenBackend::kHouseholderQL) {
    Matrix q = a;
    std::vector<double> d;
    std::vector<double> e;
    householder_tridiagonalize(q, d, e);
    tridiagonal_ql(d, e, q);
    return sorted_descending(d, q, count);
  }

  // Column-major view of a symmetric row-major matrix is the same matrix.
  std::vector<double> work(a.values().begin(), a.values().end());
  std::vector<double> w(n);
  std::vector<double> z(n * count);
  std::vector<lapack_int> support(2 * count);
  lapack_int found = 0;
  const auto nn = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', nn, work.data(), nn, 0.0, 0.0,
      nn - static_cast<lapack_int>(count) + 1, nn, 0.0, &found, w.data(), z.data(), nn,
      support.data());
  if (info != 0 || found != static_cast<lapack_int>(count)) {
    throw NumericError("LAPACK dsyevr failed on order " + std::to_string(n) + " (info " +
                       std::to_string(info) + ", found " + std::to_string(found) + ")");
  }
  Matrix vectors(n, count);
  std::vector<double> values(count);
  for (std::size_t j = 0; j < count; ++j) {
    values[j] = w[j];
    for (std::size_t i = 0; i < n; ++i) vectors(i, j) = z[j * n + i];
  }
  return sorted_descending(values, vectors, count);
}

}  // namespace psc
