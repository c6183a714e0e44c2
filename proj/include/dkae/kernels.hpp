#pragma once

#include <cstddef>
#include <vector>

#include "dkae/matrix.hpp"
#include "dkae/rng.hpp"

namespace dkae {

// Kernel matrices are plain matrices. Square kernels over a single sample set
// are exactly symmetric by construction.
using KernelMatrix = Matrix;

inline constexpr double kVarianceFloor = 1e-6;

// Diagonal-covariance Gaussian mixture.
struct GmmModel {
  std::vector<double> weights;  // simplex vector, length g
  Matrix means;                 // g x d
  Matrix variances;             // g x d, floored at kVarianceFloor

  // Average log-likelihood at the start of each EM iteration; non-decreasing.
  std::vector<double> loglik_trace;

  std::size_t num_components() const noexcept { return weights.size(); }
  std::size_t dim() const noexcept { return means.cols(); }
};

// EM fit with means initialized at g distinct random samples, uniform
// weights, and per-dimension sample variance. Stops at max_iters or when the
// relative log-likelihood improvement drops below tol.
GmmModel fit_gmm(const Matrix& x, std::size_t g, Rng& rng, std::size_t max_iters = 100,
                 double tol = 1e-6);

// Responsibilities: rows are probability vectors over components, computed
// in log space with max subtraction.
Matrix gmm_posteriors(const GmmModel& model, const Matrix& x);

// Mixtures fitted for every component count g in {2..G} under Q randomized
// initializations each; models are stored q-major ((q=1,g=2..G), (q=2,...)).
struct PckEnsemble {
  std::vector<GmmModel> models;
  std::size_t num_inits = 0;       // Q
  std::size_t max_components = 0;  // G
  std::size_t dim = 0;
  double normalizer = 0.0;         // Z = Q * (G - 1)
};

// Fits the Q * (G - 1) mixtures. Each model trains on its own stream split
// from rng (stream index q * (G - 1) + (g - 2)), so the result does not
// depend on fit order.
PckEnsemble fit_pck(const Matrix& x, std::size_t num_inits, std::size_t max_components, Rng& rng);

// Ensemble kernel: entry (i, j) is the posterior inner product averaged over
// all models, in [0, 1].
KernelMatrix pck_kernel(const PckEnsemble& ensemble, const Matrix& x);
KernelMatrix pck_kernel(const PckEnsemble& ensemble, const Matrix& xa, const Matrix& xb);

// exp(-||xa_i - xb_j||^2 / (2 sigma^2)).
KernelMatrix rbf_kernel(const Matrix& x, double sigma);
KernelMatrix rbf_kernel(const Matrix& xa, const Matrix& xb, double sigma);

// 1 where labels match, 0 elsewhere.
KernelMatrix ideal_kernel(const std::vector<int>& labels);

// Normalized Frobenius inner product <C, P>_F / (||C||_F ||P||_F), in [-1, 1].
double alignment(const KernelMatrix& c, const KernelMatrix& p);

// || C/||C||_F - P/||P||_F ||_F. Equals sqrt(2 - 2 * alignment(C, P)).
double code_loss(const KernelMatrix& c, const KernelMatrix& p);

}  // namespace dkae
