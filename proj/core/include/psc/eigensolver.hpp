#pragma once

#include <cstddef>
#include <vector>

#include "psc/matrix.hpp"

namespace psc {

// Eigenpairs of a real symmetric matrix. Column j of `vectors` pairs with
// `values[j]`; values are sorted descending.
struct EigenDecomposition {
  std::vector<double> values;
  Matrix vectors;
};

enum class EigenBackend {
  // Householder tridiagonalization followed by implicit-shift QL iteration,
  // authored here. Computes the full decomposition.
  kHouseholderQL,
  // LAPACK dsyevr (tridiagonalization + MRRR) restricted to the wanted pairs.
  kLapack,
};

// Reduces symmetric `a` to tridiagonal form Q^T A Q = T. On return `diag`
// and `offdiag` hold T (offdiag[0] is unused, offdiag[i] couples i-1 and i)
// and `a` is overwritten with Q.
void householder_tridiagonalize(Matrix& a, std::vector<double>& diag,
                                std::vector<double>& offdiag);

// Implicit-shift QL on a tridiagonal matrix, accumulating rotations into `z`
// (pass Q from the reduction to get eigenvectors of the original matrix).
// Eigenvalues land in `diag`, unsorted. Throws NumericError after
// `max_sweeps` iterations on a single eigenvalue.
void tridiagonal_ql(std::vector<double>& diag, std::vector<double>& offdiag, Matrix& z,
                    int max_sweeps = 60);

// Full eigendecomposition with the native solver, values descending; equal
// values keep the order of their original index.
EigenDecomposition symmetric_eigen(const Matrix& a);

// The `count` algebraically largest eigenpairs, descending.
EigenDecomposition top_eigenpairs(const Matrix& a, std::size_t count,
                                  EigenBackend backend = EigenBackend::kHouseholderQL);

}  // namespace psc
