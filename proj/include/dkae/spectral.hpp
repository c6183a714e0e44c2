#pragma once

#include <cstddef>
#include <vector>

#include "dkae/kernels.hpp"
#include "dkae/matrix.hpp"

namespace dkae {

// Truncated eigensystem of a kernel matrix. Non-positive eigenvalues are
// dropped, so num_components may be smaller than requested_components.
struct KpcaModel {
  std::vector<double> eigenvalues;  // positive, descending
  Matrix eigenvectors;              // n x num_components, orthonormal columns
  std::size_t num_components = 0;
  std::size_t requested_components = 0;
};

KpcaModel kpca_fit(const KernelMatrix& kernel, std::size_t m);

// Training projections Z = E * Lambda^{1/2}, one row per training sample.
Matrix kpca_project(const KpcaModel& model);

// Rank-limited kernel approximation Z * Z^T.
KernelMatrix kernel_reconstruction(const Matrix& z);

// Out-of-sample projection z(x) = k_cross * E * Lambda^{-1/2}. cross_kernel
// holds kernel values between new points (rows) and the training points in
// training order (columns).
Matrix nystrom_project(const KpcaModel& model, const KernelMatrix& cross_kernel);

// Restriction of a fitted model to its leading components.
KpcaModel kpca_truncate(const KpcaModel& model, std::size_t m);

// Mean-centered linear PCA.
struct PcaModel {
  std::vector<double> mean;
  Matrix directions;              // dim x m, orthonormal columns
  std::vector<double> variances;  // descending, non-negative
};

PcaModel pca_fit(const Matrix& data, std::size_t m);
Matrix pca_project(const PcaModel& model, const Matrix& data);
Matrix pca_backproject(const PcaModel& model, const Matrix& scores);

}  // namespace dkae
