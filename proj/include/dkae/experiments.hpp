#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dkae/autoencoder.hpp"
#include "dkae/data.hpp"
#include "dkae/kernels.hpp"

namespace dkae {

// Full description of an experiment run. Serializes to a flat key=value text
// format; unknown keys are rejected.
struct ExperimentConfig {
  // Dataset: synthetic Gaussian blobs or an IDX image/label file pair.
  std::string dataset = "blobs";  // "blobs" | "idx"
  std::size_t blobs_n = 600;
  std::size_t blobs_dim = 20;
  std::size_t blobs_classes = 3;
  double blobs_separation = 8.0;
  std::string idx_images;
  std::string idx_labels;
  std::size_t idx_subset = 2000;  // random subset drawn from the file; 0 = all

  SplitFractions fractions;

  // Prior kernel: mixtures fitted on a random training subset.
  std::size_t pck_inits = 10;       // Q
  std::size_t pck_components = 10;  // G
  std::size_t gmm_subset = 200;

  TrainConfig train;

  std::vector<double> lambda_grid = {0.0, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  std::vector<std::size_t> code_dim_grid = {4, 16, 64};
  std::vector<std::size_t> kpca_grid = {1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};

  std::size_t components = 32;  // shared by the denoising pipelines
  double noise_std = 0.25;
  int denoise_class_a = 0;
  int denoise_class_b = 1;
  double krr_reg = 0.0;  // 0 = grid search
  std::vector<double> krr_reg_grid = {1e-3, 1e-2, 0.1, 0.5, 1.0, 10.0};
  std::size_t max_image_dumps = 8;

  // Single-model runs (kpca-compare, denoise) load this checkpoint instead
  // of training when set; those runs also save their model to the output
  // directory either way.
  std::string checkpoint_load;

  std::string out_dir = "out";
  std::uint64_t seed = 42;

  static ExperimentConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  // Canonical sorted key=value text; basis of the manifest and config hash.
  std::string canonical() const;
};

struct LambdaSweepRow {
  double lambda;
  double validation_reconstruction;
  double validation_code_loss;
};

struct CodeSweepRow {
  std::size_t code_dim;
  double validation_reconstruction;
  double validation_code_loss;
};

struct IdealKernelReport {
  // Order: prior, plain autoencoder (lambda = 0), aligned codes.
  std::vector<std::string> names;
  std::vector<double> losses;                      // vs the label kernel
  std::vector<std::vector<double>> improvements;  // signed percentages
};

struct KpcaCompareRow {
  std::size_t components;
  double kpca_train_loss;
  double kpca_test_loss;
};

struct KpcaCompareReport {
  std::vector<KpcaCompareRow> rows;
  double dkae_train_loss = 0.0;
  double dkae_test_loss = 0.0;
};

struct DenoiseReport {
  double noise_std = 0.0;
  std::size_t components = 0;
  double mse_kpca = 0.0;
  double mse_dkae_pca = 0.0;
  // Plain reconstruction error of the autoencoder on the clean test set;
  // the code-space pipeline approaches this as noise goes to zero and the
  // projection basis becomes full.
  double ae_recon_mse = 0.0;
  double krr_sigma = 0.0;
  double krr_reg = 0.0;
};

std::vector<LambdaSweepRow> run_lambda_sweep(const ExperimentConfig& cfg);
std::vector<CodeSweepRow> run_code_size_sweep(const ExperimentConfig& cfg);
IdealKernelReport run_ideal_kernel_table(const ExperimentConfig& cfg);
KpcaCompareReport run_kpca_comparison(const ExperimentConfig& cfg);
DenoiseReport run_denoising(const ExperimentConfig& cfg);

// Mean squared reconstruction error per sample and dimension.
double mean_reconstruction_error(const Network& net, const Matrix& x);

std::string version_string();

}  // namespace dkae
