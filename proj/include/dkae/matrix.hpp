#pragma once

#include <cstddef>
#include <vector>

namespace dkae {

// Dense row-major matrix of 64-bit floats. All public outputs of the library
// are expected to be finite; routines that could produce NaN/Inf guard their
// denominators instead of emitting them.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix transposed() const;
  Matrix select_rows(const std::vector<std::size_t>& indices) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  double frobenius_norm() const;
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// x * x^T. Each pair is accumulated once and mirrored, so the result is
// exactly symmetric.
Matrix gram(const Matrix& x);

// Sum of elementwise products (Frobenius inner product).
double frobenius_dot(const Matrix& a, const Matrix& b);

// Rows and columns of m restricted to the given index sets, in order.
Matrix submatrix(const Matrix& m, const std::vector<std::size_t>& row_indices,
                 const std::vector<std::size_t>& col_indices);

}  // namespace dkae
