#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "dkae/errors.hpp"
#include "dkae/kernels.hpp"
#include "dkae/numerics.hpp"
#include "dkae/rng.hpp"
#include "dkae/spectral.hpp"

using namespace dkae;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

Matrix random_psd(std::size_t n, Rng& rng, double ridge = 0.0) {
  const Matrix x = random_matrix(n, n, rng);
  Matrix k = matmul_tn(x, x);
  for (std::size_t i = 0; i < n; ++i) k(i, i) += ridge;
  return k;
}

}  // namespace

TEST_CASE("kpca_fit on the identity keeps unit eigenvalues") {
  const KpcaModel model = kpca_fit(Matrix::identity(5), 5);
  CHECK(model.num_components == 5);
  for (double v : model.eigenvalues) CHECK(v == doctest::Approx(1.0));

  const Matrix z = kpca_project(model);
  const Matrix ztz = matmul_tn(z, z);
  CHECK((ztz - Matrix::identity(5)).frobenius_norm() <= 1e-10);
}

TEST_CASE("kpca_fit drops the null space of a rank-1 kernel") {
  Matrix v(4, 1);
  v(0, 0) = 1.0;
  v(1, 0) = 2.0;
  v(2, 0) = -1.0;
  v(3, 0) = 0.5;
  const Matrix k = matmul_nt(v, v);
  const KpcaModel model = kpca_fit(k, 3);
  CHECK(model.requested_components == 3);
  CHECK(model.num_components == 1);
  const double norm_sq = 1.0 + 4.0 + 1.0 + 0.25;
  CHECK(model.eigenvalues[0] == doctest::Approx(norm_sq).epsilon(1e-10));
}

TEST_CASE("kpca_fit eigenvalues agree with the eigensolver") {
  Rng rng(1);
  const Matrix k = random_psd(20, rng);
  const auto eig = sym_eig(k);
  const KpcaModel model = kpca_fit(k, 20);
  for (std::size_t i = 0; i < model.num_components; ++i) {
    CHECK(model.eigenvalues[i] == doctest::Approx(eig.eigenvalues[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(kpca_fit(k, 0), std::invalid_argument);
  CHECK_THROWS_AS(kpca_fit(k, 21), std::invalid_argument);
}

TEST_CASE("kpca_project column norms are sqrt eigenvalues and reproduce the kernel") {
  Rng rng(2);
  const Matrix k = random_psd(10, rng, 0.5);
  const KpcaModel model = kpca_fit(k, 10);
  const Matrix z = kpca_project(model);
  for (std::size_t j = 0; j < model.num_components; ++j) {
    double col_sq = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) col_sq += z(i, j) * z(i, j);
    CHECK(std::sqrt(col_sq) == doctest::Approx(std::sqrt(model.eigenvalues[j])).epsilon(1e-10));
  }
  CHECK((kernel_reconstruction(z) - k).frobenius_norm() <= 1e-8 * k.frobenius_norm());
}

TEST_CASE("kernel_reconstruction at m=1 is the best rank-1 approximation") {
  Rng rng(3);
  const Matrix k = random_psd(6, rng, 0.1);
  const KpcaModel top = kpca_truncate(kpca_fit(k, 6), 1);
  const double err_top = (kernel_reconstruction(kpca_project(top)) - k).frobenius_norm();

  // Brute force: rank-1 pieces from every eigenpair.
  const auto eig = sym_eig(k);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 6; ++i) {
    Matrix vi(6, 1);
    for (std::size_t r = 0; r < 6; ++r) vi(r, 0) = eig.eigenvectors(r, i);
    Matrix rank1 = matmul_nt(vi, vi);
    rank1 *= eig.eigenvalues[i];
    best = std::min(best, (rank1 - k).frobenius_norm());
  }
  CHECK(err_top <= best + 1e-10);
}

TEST_CASE("kernel approximation error is non-increasing in the component count") {
  Rng rng(4);
  const Matrix k = random_psd(15, rng, 0.2);
  const KpcaModel full = kpca_fit(k, 15);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= full.num_components; ++m) {
    const KpcaModel sub = kpca_truncate(full, m);
    const double loss = code_loss(kernel_reconstruction(kpca_project(sub)), k);
    CHECK(loss <= prev + 1e-12);
    prev = loss;
  }
}

TEST_CASE("nystrom_project reproduces training projections on training rows") {
  Rng rng(5);
  const Matrix k = random_psd(12, rng, 0.5);
  const KpcaModel model = kpca_fit(k, 8);
  const Matrix z = kpca_project(model);
  const Matrix z_again = nystrom_project(model, k);
  CHECK((z_again - z).frobenius_norm() <= 1e-8);
  CHECK_THROWS_AS(nystrom_project(model, Matrix(3, 11)), DimensionError);
}

TEST_CASE("nystrom_project maps equal kernel rows to equal projections") {
  Rng rng(6);
  const Matrix k = random_psd(9, rng, 0.5);
  const KpcaModel model = kpca_fit(k, 4);
  Matrix cross(2, 9);
  for (std::size_t j = 0; j < 9; ++j) {
    cross(0, j) = k(2, j);
    cross(1, j) = k(2, j);
  }
  const Matrix z = nystrom_project(model, cross);
  for (std::size_t j = 0; j < z.cols(); ++j) CHECK(z(0, j) == z(1, j));
}

TEST_CASE("nystrom test-block approximation improves with more components") {
  Rng data_rng(7);
  // Two clusters; kernel via RBF so the spectrum decays smoothly.
  Matrix all(30, 2);
  for (std::size_t i = 0; i < 30; ++i) {
    const double center = i % 2 == 0 ? 0.0 : 4.0;
    all(i, 0) = center + data_rng.normal(0.0, 0.6);
    all(i, 1) = data_rng.normal(0.0, 0.6);
  }
  const Matrix train = all.select_rows({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14,
                                        15, 16, 17, 18, 19});
  const Matrix test = all.select_rows({20, 21, 22, 23, 24, 25, 26, 27, 28, 29});

  const Matrix k_train = rbf_kernel(train, 1.5);
  const Matrix k_cross = rbf_kernel(test, train, 1.5);
  const Matrix k_test = rbf_kernel(test, 1.5);

  const KpcaModel full = kpca_fit(k_train, 20);
  const auto test_error = [&](std::size_t m) {
    const KpcaModel sub = kpca_truncate(full, m);
    const Matrix z_test = nystrom_project(sub, k_cross);
    return (kernel_reconstruction(z_test) - k_test).frobenius_norm();
  };
  CHECK(test_error(8) < test_error(2));
}

TEST_CASE("pca full basis round trip") {
  Rng rng(8);
  const Matrix data = random_matrix(12, 4, rng);
  const PcaModel model = pca_fit(data, 4);
  const Matrix back = pca_backproject(model, pca_project(model, data));
  CHECK((back - data).frobenius_norm() <= 1e-8);
  for (std::size_t j = 1; j < model.variances.size(); ++j) {
    CHECK(model.variances[j - 1] >= model.variances[j]);
  }
}

TEST_CASE("pca recovers an exact two-dimensional affine subspace") {
  Rng rng(9);
  Matrix data(20, 5);
  for (std::size_t i = 0; i < 20; ++i) {
    const double a = rng.uniform(-1.0, 1.0);
    const double b = rng.uniform(-1.0, 1.0);
    data(i, 0) = 1.0 + a;
    data(i, 1) = 2.0 + b;
    data(i, 2) = -0.5 + a - b;
    data(i, 3) = 0.25 + 2.0 * a + b;
    data(i, 4) = 3.0 - a;
  }
  const PcaModel model = pca_fit(data, 2);
  const Matrix back = pca_backproject(model, pca_project(model, data));
  CHECK((back - data).frobenius_norm() <= 1e-8);
}

TEST_CASE("pca retained variance never exceeds the total and reaches it at full rank") {
  Rng rng(10);
  const Matrix data = random_matrix(25, 6, rng);
  std::vector<double> mean(6, 0.0);
  for (std::size_t i = 0; i < 25; ++i) {
    for (std::size_t j = 0; j < 6; ++j) mean[j] += data(i, j);
  }
  for (double& v : mean) v /= 25.0;
  double total_variance = 0.0;
  for (std::size_t i = 0; i < 25; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      total_variance += (data(i, j) - mean[j]) * (data(i, j) - mean[j]);
    }
  }
  total_variance /= 24.0;

  for (std::size_t m : {2, 4, 6}) {
    const PcaModel model = pca_fit(data, m);
    double retained = 0.0;
    for (double v : model.variances) retained += v;
    CHECK(retained <= total_variance + 1e-10);
    if (m == 6) CHECK(retained == doctest::Approx(total_variance).epsilon(1e-10));
  }
  CHECK_THROWS_AS(pca_fit(data, 0), std::invalid_argument);
  CHECK_THROWS_AS(pca_fit(data, 7), std::invalid_argument);
}
