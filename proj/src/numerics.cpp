#include "dkae/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dkae/errors.hpp"

namespace dkae {

namespace {

constexpr int kMaxJacobiSweeps = 100;

void require_square(const Matrix& a, const char* op) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(op) + ": matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
}

// Symmetry within 1e-9 relative to ||A||_F.
void require_symmetric(const Matrix& a, const char* op) {
  const double tol = 1e-9 * a.frobenius_norm() + 1e-300;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > tol) {
        throw SymmetryError(std::string(op) + ": entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ") differs from its transpose beyond tolerance");
      }
    }
  }
}

double offdiag_frobenius(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) sum += 2.0 * a(i, j) * a(i, j);
  }
  return std::sqrt(sum);
}

// Orient a column so its first nonzero component (relative to the column's
// largest magnitude) is positive.
void fix_column_sign(Matrix& e, std::size_t col) {
  double max_abs = 0.0;
  for (std::size_t i = 0; i < e.rows(); ++i) max_abs = std::max(max_abs, std::abs(e(i, col)));
  if (max_abs == 0.0) return;
  for (std::size_t i = 0; i < e.rows(); ++i) {
    if (std::abs(e(i, col)) > 1e-12 * max_abs) {
      if (e(i, col) < 0.0) {
        for (std::size_t r = 0; r < e.rows(); ++r) e(r, col) = -e(r, col);
      }
      return;
    }
  }
}

}  // namespace

EigenDecomposition sym_eig(const Matrix& a) {
  require_square(a, "sym_eig");
  require_symmetric(a, "sym_eig");
  const std::size_t n = a.rows();

  // Work on the symmetrized copy; inputs are only symmetric to tolerance.
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) b(i, j) = 0.5 * (a(i, j) + a(j, i));
  }
  Matrix v = Matrix::identity(n);

  const double norm = b.frobenius_norm();
  const double threshold = 1e-12 * norm;
  if (norm > 0.0) {
    bool converged = false;
    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
      if (offdiag_frobenius(b) <= threshold) {
        converged = true;
        break;
      }
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = b(p, q);
          if (apq == 0.0) continue;
          const double app = b(p, p);
          const double aqq = b(q, q);
          const double tau = (aqq - app) / (2.0 * apq);
          const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                        : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          for (std::size_t i = 0; i < n; ++i) {
            if (i == p || i == q) continue;
            const double bip = b(i, p);
            const double biq = b(i, q);
            b(i, p) = b(p, i) = c * bip - s * biq;
            b(i, q) = b(q, i) = s * bip + c * biq;
          }
          b(p, p) = app - t * apq;
          b(q, q) = aqq + t * apq;
          b(p, q) = b(q, p) = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double vip = v(i, p);
            const double viq = v(i, q);
            v(i, p) = c * vip - s * viq;
            v(i, q) = s * vip + c * viq;
          }
        }
      }
    }
    if (!converged && offdiag_frobenius(b) > threshold) {
      throw ConvergenceError("sym_eig: Jacobi sweeps did not converge");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return b(x, x) > b(y, y); });

  EigenDecomposition result;
  result.eigenvalues.resize(n);
  result.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    result.eigenvalues[j] = b(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) result.eigenvectors(i, j) = v(i, order[j]);
    fix_column_sign(result.eigenvectors, j);
  }
  return result;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  require_square(a, "solve_spd");
  require_symmetric(a, "solve_spd");
  if (b.rows() != a.rows()) {
    throw DimensionError("solve_spd: right-hand side has " + std::to_string(b.rows()) +
                         " rows, expected " + std::to_string(a.rows()));
  }
  const std::size_t n = a.rows();

  // Lower Cholesky factor.
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) {
      throw DefinitenessError("solve_spd: pivot " + std::to_string(j) + " is not positive");
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      l(i, j) = sum / l(j, j);
    }
  }

  // Forward then backward substitution, one right-hand-side column at a time.
  Matrix x(n, b.cols());
  std::vector<double> y(n);
  for (std::size_t col = 0; col < b.cols(); ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = b(i, col);
      for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
      y[i] = sum / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double sum = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) sum -= l(k, ii) * x(k, col);
      x(ii, col) = sum / l(ii, ii);
    }
  }
  return x;
}

Matrix pairwise_sq_dists(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) {
    throw DimensionError("pairwise_sq_dists: feature dimensions " + std::to_string(x.cols()) +
                         " vs " + std::to_string(y.cols()));
  }
  Matrix d(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < y.rows(); ++j) {
      const double* yj = y.row(j);
      double sum = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) {
        const double diff = xi[k] - yj[k];
        sum += diff * diff;
      }
      d(i, j) = sum;
    }
  }
  return d;
}

}  // namespace dkae
