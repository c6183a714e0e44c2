#pragma once

#include <cstddef>
#include <vector>

#include "dkae/kernels.hpp"
#include "dkae/matrix.hpp"

namespace dkae {

// RBF kernel ridge regression from a projected feature space back to input
// space, used to invert kernel projections approximately.
struct KrrModel {
  Matrix alpha;              // n x d ridge coefficients
  Matrix train_projections;  // n x m
  double sigma = 0.0;
  double reg = 0.0;
  bool clamp_outputs = false;  // clamp predictions to [0, 1] (pixel data)
};

// Median of all pairwise Euclidean distances between rows of z; the mean of
// the two middle values when the count is even.
double median_sigma(const Matrix& z);

// alpha = (K_Z + reg I)^{-1} X with K_Z the RBF Gram matrix of z.
KrrModel krr_fit(const Matrix& z, const Matrix& x, double sigma, double reg,
                 bool clamp_outputs = false);

Matrix krr_predict(const KrrModel& model, const Matrix& z_new);

// Candidate minimizing held-out prediction MSE; ties break toward the
// smaller regularizer. Candidates that fail to factorize are skipped.
double grid_search_reg(const Matrix& z_train, const Matrix& x_train, const Matrix& z_val,
                       const Matrix& x_val, double sigma, std::vector<double> candidates);

}  // namespace dkae
