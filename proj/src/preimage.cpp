#include "dkae/preimage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dkae/errors.hpp"
#include "dkae/numerics.hpp"

namespace dkae {

double median_sigma(const Matrix& z) {
  const std::size_t n = z.rows();
  if (n < 2) throw DegenerateInputError("median_sigma: need at least two points");
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double* zi = z.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* zj = z.row(j);
      double sum = 0.0;
      for (std::size_t k = 0; k < z.cols(); ++k) {
        const double diff = zi[k] - zj[k];
        sum += diff * diff;
      }
      dists.push_back(std::sqrt(sum));
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t count = dists.size();
  const double median = (count % 2 == 1)
                            ? dists[count / 2]
                            : 0.5 * (dists[count / 2 - 1] + dists[count / 2]);
  if (!(median > 0.0)) {
    throw DegenerateInputError("median_sigma: median pairwise distance is zero");
  }
  return median;
}

KrrModel krr_fit(const Matrix& z, const Matrix& x, double sigma, double reg,
                 bool clamp_outputs) {
  if (z.rows() != x.rows()) {
    throw DimensionError("krr_fit: projection and target row counts differ");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("krr_fit: sigma must be positive");
  if (reg < 0.0) throw std::invalid_argument("krr_fit: negative regularizer");

  Matrix system = rbf_kernel(z, sigma);
  for (std::size_t i = 0; i < system.rows(); ++i) system(i, i) += reg;

  KrrModel model;
  model.alpha = solve_spd(system, x);
  model.train_projections = z;
  model.sigma = sigma;
  model.reg = reg;
  model.clamp_outputs = clamp_outputs;
  return model;
}

Matrix krr_predict(const KrrModel& model, const Matrix& z_new) {
  if (z_new.cols() != model.train_projections.cols()) {
    throw DimensionError("krr_predict: projection dimension mismatch");
  }
  const Matrix cross = rbf_kernel(z_new, model.train_projections, model.sigma);
  Matrix out = matmul(cross, model.alpha);
  if (model.clamp_outputs) {
    for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

double grid_search_reg(const Matrix& z_train, const Matrix& x_train, const Matrix& z_val,
                       const Matrix& x_val, double sigma, std::vector<double> candidates) {
  if (candidates.empty()) throw std::invalid_argument("grid_search_reg: no candidates");
  std::sort(candidates.begin(), candidates.end());

  double best_reg = candidates.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (double reg : candidates) {
    double mse;
    try {
      const KrrModel model = krr_fit(z_train, x_train, sigma, reg);
      const Matrix pred = krr_predict(model, z_val);
      double sum = 0.0;
      for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred.data()[i] - x_val.data()[i];
        sum += diff * diff;
      }
      mse = sum / double(pred.size());
    } catch (const DefinitenessError&) {
      continue;
    }
    if (mse < best_mse) {
      best_mse = mse;
      best_reg = reg;
    }
  }
  if (!std::isfinite(best_mse)) {
    throw DegenerateInputError("grid_search_reg: no candidate produced a usable fit");
  }
  return best_reg;
}

}  // namespace dkae
