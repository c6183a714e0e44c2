#pragma once

#include <vector>

#include "dkae/matrix.hpp"

namespace dkae {

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // orthonormal columns; column i pairs with eigenvalues[i]
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps. Sweeps
// stop once the off-diagonal Frobenius mass is at most 1e-12 * ||A||_F.
// Eigenvalues are sorted descending and each eigenvector is oriented so that
// its first nonzero component is positive.
EigenDecomposition sym_eig(const Matrix& a);

// Solves A X = B for symmetric positive-definite A via Cholesky.
Matrix solve_spd(const Matrix& a, const Matrix& b);

// Entry (i, j) = squared Euclidean distance between row i of x and row j of y.
Matrix pairwise_sq_dists(const Matrix& x, const Matrix& y);

}  // namespace dkae
