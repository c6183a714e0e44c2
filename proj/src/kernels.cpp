#include "dkae/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dkae/errors.hpp"
#include "dkae/numerics.hpp"

namespace dkae {

namespace {

constexpr double kEmptyComponentMass = 1e-10;
constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

// Log density of every sample under every component, n x g.
Matrix component_log_densities(const GmmModel& model, const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t g = model.num_components();
  const std::size_t d = model.dim();
  Matrix logp(n, g);
  for (std::size_t c = 0; c < g; ++c) {
    const double* mu = model.means.row(c);
    const double* var = model.variances.row(c);
    double log_norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) log_norm += std::log(var[j]);
    log_norm = -0.5 * (double(d) * kLogTwoPi + log_norm);
    const double log_w = std::log(model.weights[c]);
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = x.row(i);
      double quad = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = xi[j] - mu[j];
        quad += diff * diff / var[j];
      }
      logp(i, c) = log_w + log_norm - 0.5 * quad;
    }
  }
  return logp;
}

// Normalizes log joints into responsibilities; returns the average
// log-likelihood over samples.
double posteriors_from_log(const Matrix& logp, Matrix& post) {
  const std::size_t n = logp.rows();
  const std::size_t g = logp.cols();
  post = Matrix(n, g);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* lp = logp.row(i);
    double m = lp[0];
    for (std::size_t c = 1; c < g; ++c) m = std::max(m, lp[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < g; ++c) {
      const double e = std::exp(lp[c] - m);
      post(i, c) = e;
      sum += e;
    }
    for (std::size_t c = 0; c < g; ++c) post(i, c) /= sum;
    total += m + std::log(sum);
  }
  return total / double(n);
}

std::vector<double> per_dim_variance(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < d; ++j) mean[j] += xi[j];
  }
  for (std::size_t j = 0; j < d; ++j) mean[j] /= double(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = xi[j] - mean[j];
      var[j] += diff * diff;
    }
  }
  for (std::size_t j = 0; j < d; ++j) var[j] = std::max(var[j] / double(n), kVarianceFloor);
  return var;
}

void require_dim(const Matrix& x, std::size_t d, const char* op) {
  if (x.cols() != d) {
    throw DimensionError(std::string(op) + ": feature dimension " + std::to_string(x.cols()) +
                         ", expected " + std::to_string(d));
  }
}

void require_nonzero_norms(double nc, double np, const char* op) {
  if (nc < 1e-12 || np < 1e-12) {
    throw DegenerateInputError(std::string(op) + ": zero-norm matrix");
  }
}

}  // namespace

GmmModel fit_gmm(const Matrix& x, std::size_t g, Rng& rng, std::size_t max_iters, double tol) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (g < 1 || n < g) throw std::invalid_argument("fit_gmm: need n >= g >= 1");

  const std::vector<double> global_var = per_dim_variance(x);

  GmmModel model;
  model.weights.assign(g, 1.0 / double(g));
  model.means = x.select_rows(rng.sample_without_replacement(n, g));
  model.variances = Matrix(g, d);
  for (std::size_t c = 0; c < g; ++c) {
    for (std::size_t j = 0; j < d; ++j) model.variances(c, j) = global_var[j];
  }

  Matrix post;
  double prev_ll = 0.0;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    const double ll = posteriors_from_log(component_log_densities(model, x), post);
    model.loglik_trace.push_back(ll);
    if (iter > 0 && ll - prev_ll < tol * (std::abs(prev_ll) + 1e-12)) break;
    prev_ll = ll;

    // M-step.
    for (std::size_t c = 0; c < g; ++c) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) mass += post(i, c);
      if (mass < kEmptyComponentMass) {
        // Re-seed a dead component at a random sample with global variance.
        const std::size_t pick = rng.uniform_index(n);
        for (std::size_t j = 0; j < d; ++j) {
          model.means(c, j) = x(pick, j);
          model.variances(c, j) = global_var[j];
        }
        model.weights[c] = 1e-12;
        continue;
      }
      model.weights[c] = mass / double(n);
      for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += post(i, c) * x(i, j);
        model.means(c, j) = m / mass;
      }
      for (std::size_t j = 0; j < d; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double diff = x(i, j) - model.means(c, j);
          v += post(i, c) * diff * diff;
        }
        model.variances(c, j) = std::max(v / mass, kVarianceFloor);
      }
    }
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;
  }
  return model;
}

Matrix gmm_posteriors(const GmmModel& model, const Matrix& x) {
  require_dim(x, model.dim(), "gmm_posteriors");
  Matrix post;
  posteriors_from_log(component_log_densities(model, x), post);
  return post;
}

PckEnsemble fit_pck(const Matrix& x, std::size_t num_inits, std::size_t max_components,
                    Rng& rng) {
  if (max_components < 2) throw std::invalid_argument("fit_pck: need max component count >= 2");
  if (num_inits < 1) throw std::invalid_argument("fit_pck: need at least one initialization");
  if (x.rows() < max_components) {
    throw std::invalid_argument("fit_pck: need at least as many samples as components");
  }

  PckEnsemble ens;
  ens.num_inits = num_inits;
  ens.max_components = max_components;
  ens.dim = x.cols();
  ens.normalizer = double(num_inits) * double(max_components - 1);
  ens.models.reserve(num_inits * (max_components - 1));
  for (std::size_t q = 0; q < num_inits; ++q) {
    for (std::size_t g = 2; g <= max_components; ++g) {
      const std::uint64_t stream = q * (max_components - 1) + (g - 2);
      Rng model_rng = rng.split(stream);
      ens.models.push_back(fit_gmm(x, g, model_rng));
    }
  }
  return ens;
}

KernelMatrix pck_kernel(const PckEnsemble& ensemble, const Matrix& x) {
  require_dim(x, ensemble.dim, "pck_kernel");
  Matrix k(x.rows(), x.rows());
  for (const GmmModel& model : ensemble.models) {
    k += gram(gmm_posteriors(model, x));
  }
  k *= 1.0 / ensemble.normalizer;
  return k;
}

KernelMatrix pck_kernel(const PckEnsemble& ensemble, const Matrix& xa, const Matrix& xb) {
  require_dim(xa, ensemble.dim, "pck_kernel");
  require_dim(xb, ensemble.dim, "pck_kernel");
  Matrix k(xa.rows(), xb.rows());
  for (const GmmModel& model : ensemble.models) {
    k += matmul_nt(gmm_posteriors(model, xa), gmm_posteriors(model, xb));
  }
  k *= 1.0 / ensemble.normalizer;
  return k;
}

KernelMatrix rbf_kernel(const Matrix& x, double sigma) { return rbf_kernel(x, x, sigma); }

KernelMatrix rbf_kernel(const Matrix& xa, const Matrix& xb, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("rbf_kernel: sigma must be positive");
  Matrix k = pairwise_sq_dists(xa, xb);
  const double scale = -1.0 / (2.0 * sigma * sigma);
  for (double& v : k.data()) v = std::exp(v * scale);
  return k;
}

KernelMatrix ideal_kernel(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("ideal_kernel: empty labels");
  Matrix k(labels.size(), labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      k(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
    }
  }
  return k;
}

double alignment(const KernelMatrix& c, const KernelMatrix& p) {
  if (!c.same_shape(p)) throw DimensionError("alignment: shape mismatch");
  const double nc = c.frobenius_norm();
  const double np = p.frobenius_norm();
  require_nonzero_norms(nc, np, "alignment");
  return std::clamp(frobenius_dot(c, p) / (nc * np), -1.0, 1.0);
}

double code_loss(const KernelMatrix& c, const KernelMatrix& p) {
  if (!c.same_shape(p)) throw DimensionError("code_loss: shape mismatch");
  const double nc = c.frobenius_norm();
  const double np = p.frobenius_norm();
  require_nonzero_norms(nc, np, "code_loss");
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double diff = c.data()[i] / nc - p.data()[i] / np;
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

}  // namespace dkae
