#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dkae/experiments.hpp"
#include "dkae/io.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<std::size_t> code_dim;
  std::optional<std::size_t> components;
  std::optional<double> noise_std;
  std::string mnist_images;
  std::string mnist_labels;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Flat key=value configuration file");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--seed", opts.seed, "Master seed");
  cmd->add_option("--lambda", opts.lambda, "Code-alignment weight override");
  cmd->add_option("--code-dim", opts.code_dim, "Code layer size override");
  cmd->add_option("--components", opts.components, "Projection component count override");
  cmd->add_option("--noise-std", opts.noise_std, "Test-set noise standard deviation");
  cmd->add_option("--mnist-images", opts.mnist_images, "IDX image file (switches dataset to idx)");
  cmd->add_option("--mnist-labels", opts.mnist_labels, "IDX label file");
}

dkae::ExperimentConfig build_config(const CommonOptions& opts, const std::string& command) {
  dkae::ExperimentConfig cfg;
  if (!opts.config_path.empty()) cfg = dkae::ExperimentConfig::from_file(opts.config_path);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.lambda) {
    cfg.train.lambda = *opts.lambda;
    if (command == "lambda-sweep") cfg.lambda_grid = {*opts.lambda};
  }
  if (opts.code_dim) {
    cfg.train.code_dim = *opts.code_dim;
    if (command == "code-sweep") cfg.code_dim_grid = {*opts.code_dim};
  }
  if (opts.components) cfg.components = *opts.components;
  if (opts.noise_std) cfg.noise_std = *opts.noise_std;
  if (!opts.mnist_images.empty() || !opts.mnist_labels.empty()) {
    if (opts.mnist_images.empty() || opts.mnist_labels.empty()) {
      throw std::invalid_argument("--mnist-images and --mnist-labels must be given together");
    }
    cfg.dataset = "idx";
    cfg.idx_images = opts.mnist_images;
    cfg.idx_labels = opts.mnist_labels;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-aligned autoencoder experiments"};
  app.set_version_flag("--version", dkae::version_string());
  app.require_subcommand(1);

  CommonOptions opts;
  CLI::App* lambda_sweep = app.add_subcommand(
      "lambda-sweep", "Validation losses across code-alignment weights");
  CLI::App* code_sweep =
      app.add_subcommand("code-sweep", "Validation losses across code layer sizes");
  CLI::App* ideal_table = app.add_subcommand(
      "ideal-table", "Code losses of prior/plain/aligned kernels against the label kernel");
  CLI::App* kpca_compare = app.add_subcommand(
      "kpca-compare", "Kernel approximation quality: truncated kernel PCA vs learned codes");
  CLI::App* denoise = app.add_subcommand(
      "denoise", "Two-class denoising: kernel PCA + ridge back-mapping vs code-space PCA");
  for (CLI::App* cmd : {lambda_sweep, code_sweep, ideal_table, kpca_compare, denoise}) {
    add_common_options(cmd, opts);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (lambda_sweep->parsed()) {
      const auto rows = dkae::run_lambda_sweep(build_config(opts, "lambda-sweep"));
      for (const auto& row : rows) {
        std::cout << "lambda=" << dkae::format_double(row.lambda)
                  << " recon=" << dkae::format_double(row.validation_reconstruction)
                  << " code=" << dkae::format_double(row.validation_code_loss) << "\n";
      }
    } else if (code_sweep->parsed()) {
      const auto rows = dkae::run_code_size_sweep(build_config(opts, "code-sweep"));
      for (const auto& row : rows) {
        std::cout << "code_dim=" << row.code_dim
                  << " recon=" << dkae::format_double(row.validation_reconstruction)
                  << " code=" << dkae::format_double(row.validation_code_loss) << "\n";
      }
    } else if (ideal_table->parsed()) {
      const auto report = dkae::run_ideal_kernel_table(build_config(opts, "ideal-table"));
      for (std::size_t i = 0; i < report.names.size(); ++i) {
        std::cout << report.names[i] << " loss_vs_ideal="
                  << dkae::format_double(report.losses[i]) << "\n";
      }
    } else if (kpca_compare->parsed()) {
      const auto report = dkae::run_kpca_comparison(build_config(opts, "kpca-compare"));
      std::cout << "dkae_train=" << dkae::format_double(report.dkae_train_loss)
                << " dkae_test=" << dkae::format_double(report.dkae_test_loss) << "\n";
      for (const auto& row : report.rows) {
        std::cout << "m=" << row.components
                  << " train=" << dkae::format_double(row.kpca_train_loss)
                  << " test=" << dkae::format_double(row.kpca_test_loss) << "\n";
      }
    } else if (denoise->parsed()) {
      const auto report = dkae::run_denoising(build_config(opts, "denoise"));
      std::cout << "noise_std=" << dkae::format_double(report.noise_std)
                << " components=" << report.components
                << " mse_kpca_krr=" << dkae::format_double(report.mse_kpca)
                << " mse_dkae_pca=" << dkae::format_double(report.mse_dkae_pca) << "\n";
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
