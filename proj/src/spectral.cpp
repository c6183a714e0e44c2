#include "dkae/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dkae/errors.hpp"
#include "dkae/numerics.hpp"

namespace dkae {

KpcaModel kpca_fit(const KernelMatrix& kernel, std::size_t m) {
  if (m < 1) throw std::invalid_argument("kpca_fit: need at least one component");
  if (m > kernel.rows()) {
    throw std::invalid_argument("kpca_fit: more components than samples");
  }
  const EigenDecomposition eig = sym_eig(kernel);

  std::size_t kept = 0;
  while (kept < m && eig.eigenvalues[kept] > 0.0) ++kept;

  KpcaModel model;
  model.requested_components = m;
  model.num_components = kept;
  model.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + std::ptrdiff_t(kept));
  model.eigenvectors = Matrix(kernel.rows(), kept);
  for (std::size_t i = 0; i < kernel.rows(); ++i) {
    for (std::size_t j = 0; j < kept; ++j) model.eigenvectors(i, j) = eig.eigenvectors(i, j);
  }
  return model;
}

Matrix kpca_project(const KpcaModel& model) {
  Matrix z = model.eigenvectors;
  for (std::size_t j = 0; j < model.num_components; ++j) {
    const double scale = std::sqrt(model.eigenvalues[j]);
    for (std::size_t i = 0; i < z.rows(); ++i) z(i, j) *= scale;
  }
  return z;
}

KernelMatrix kernel_reconstruction(const Matrix& z) { return gram(z); }

Matrix nystrom_project(const KpcaModel& model, const KernelMatrix& cross_kernel) {
  if (cross_kernel.cols() != model.eigenvectors.rows()) {
    throw DimensionError("nystrom_project: cross kernel has " +
                         std::to_string(cross_kernel.cols()) + " columns, training set has " +
                         std::to_string(model.eigenvectors.rows()) + " points");
  }
  Matrix z = matmul(cross_kernel, model.eigenvectors);
  for (std::size_t j = 0; j < model.num_components; ++j) {
    const double scale = 1.0 / std::sqrt(model.eigenvalues[j]);
    for (std::size_t i = 0; i < z.rows(); ++i) z(i, j) *= scale;
  }
  return z;
}

KpcaModel kpca_truncate(const KpcaModel& model, std::size_t m) {
  if (m < 1) throw std::invalid_argument("kpca_truncate: need at least one component");
  const std::size_t kept = std::min(m, model.num_components);
  KpcaModel out;
  out.requested_components = m;
  out.num_components = kept;
  out.eigenvalues.assign(model.eigenvalues.begin(),
                         model.eigenvalues.begin() + std::ptrdiff_t(kept));
  out.eigenvectors = Matrix(model.eigenvectors.rows(), kept);
  for (std::size_t i = 0; i < model.eigenvectors.rows(); ++i) {
    for (std::size_t j = 0; j < kept; ++j) out.eigenvectors(i, j) = model.eigenvectors(i, j);
  }
  return out;
}

PcaModel pca_fit(const Matrix& data, std::size_t m) {
  const std::size_t n = data.rows();
  const std::size_t dim = data.cols();
  if (n == 0) throw std::invalid_argument("pca_fit: empty data");
  if (m < 1 || m > std::min(n, dim)) {
    throw std::invalid_argument("pca_fit: component count out of range");
  }

  PcaModel model;
  model.mean.assign(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = data.row(i);
    for (std::size_t j = 0; j < dim; ++j) model.mean[j] += row[j];
  }
  for (double& v : model.mean) v /= double(n);

  Matrix centered = data;
  for (std::size_t i = 0; i < n; ++i) {
    double* row = centered.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] -= model.mean[j];
  }

  Matrix covariance = matmul_tn(centered, centered);
  covariance *= 1.0 / double(std::max<std::size_t>(1, n - 1));
  const EigenDecomposition eig = sym_eig(covariance);

  model.directions = Matrix(dim, m);
  model.variances.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    model.variances[j] = std::max(eig.eigenvalues[j], 0.0);
    for (std::size_t i = 0; i < dim; ++i) model.directions(i, j) = eig.eigenvectors(i, j);
  }
  return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& data) {
  if (data.cols() != model.mean.size()) {
    throw DimensionError("pca_project: dimension mismatch");
  }
  Matrix centered = data;
  for (std::size_t i = 0; i < centered.rows(); ++i) {
    double* row = centered.row(i);
    for (std::size_t j = 0; j < centered.cols(); ++j) row[j] -= model.mean[j];
  }
  return matmul(centered, model.directions);
}

Matrix pca_backproject(const PcaModel& model, const Matrix& scores) {
  if (scores.cols() != model.directions.cols()) {
    throw DimensionError("pca_backproject: score dimension mismatch");
  }
  Matrix out = matmul_nt(scores, model.directions);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* row = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) row[j] += model.mean[j];
  }
  return out;
}

}  // namespace dkae
