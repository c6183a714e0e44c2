#include "dkae/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "dkae/errors.hpp"
#include "dkae/io.hpp"
#include "dkae/numerics.hpp"
#include "dkae/preimage.hpp"
#include "dkae/spectral.hpp"

namespace dkae {

namespace {

// Rng stream ids derived from the master seed. Sweep points start at 100 so
// independent points could run concurrently on disjoint streams.
enum Stream : std::uint64_t {
  kDataStream = 11,
  kSplitStream = 12,
  kGmmSubsetStream = 13,
  kPckStream = 14,
  kNoiseStream = 15,
  kSweepBase = 100,
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + value + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size() || v < 0) throw std::invalid_argument(value);
    return std::size_t(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad count for " + key + ": '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + value + "'");
  }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) out.push_back(parse_double(key, item));
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(value)) out.push_back(parse_size(key, item));
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out.push_back(',');
    if constexpr (std::is_same_v<T, double>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

struct Prepared {
  Dataset train;
  Dataset val;
  Dataset test;
  PckEnsemble ensemble;
  KernelMatrix prior_train;
};

Dataset build_dataset(const ExperimentConfig& cfg, Rng& rng) {
  if (cfg.dataset == "blobs") {
    return make_blobs(cfg.blobs_n, cfg.blobs_dim, cfg.blobs_classes, cfg.blobs_separation, rng);
  }
  if (cfg.dataset == "idx") {
    if (cfg.idx_images.empty() || cfg.idx_labels.empty()) {
      throw std::invalid_argument("config: dataset=idx requires idx.images and idx.labels");
    }
    Dataset all = load_idx(cfg.idx_images, cfg.idx_labels);
    if (cfg.idx_subset > 0 && cfg.idx_subset < all.size()) {
      const auto pick = rng.sample_without_replacement(all.size(), cfg.idx_subset);
      Dataset subset;
      subset.samples = all.samples.select_rows(pick);
      subset.labels.reserve(pick.size());
      for (std::size_t i : pick) subset.labels.push_back(all.labels[i]);
      subset.image_rows = all.image_rows;
      subset.image_cols = all.image_cols;
      return subset;
    }
    return all;
  }
  throw std::invalid_argument("config: unknown dataset '" + cfg.dataset + "'");
}

Prepared prepare(const ExperimentConfig& cfg, bool two_class_only) {
  Rng master(cfg.seed);
  Rng data_rng = master.split(kDataStream);
  Dataset all = build_dataset(cfg, data_rng);
  if (two_class_only) all = select_classes(all, cfg.denoise_class_a, cfg.denoise_class_b);

  Rng split_rng = master.split(kSplitStream);
  SplitResult parts = split(all, cfg.fractions, split_rng);

  const std::size_t subset = std::min(cfg.gmm_subset, parts.train.size());
  if (subset < cfg.pck_components) {
    throw std::invalid_argument("prior: mixture fit subset smaller than component count");
  }
  Rng subset_rng = master.split(kGmmSubsetStream);
  const Matrix fit_rows = parts.train.samples.select_rows(
      subset_rng.sample_without_replacement(parts.train.size(), subset));

  Rng pck_rng = master.split(kPckStream);
  Prepared prep;
  prep.ensemble = fit_pck(fit_rows, cfg.pck_inits, cfg.pck_components, pck_rng);
  prep.prior_train = pck_kernel(prep.ensemble, parts.train.samples);
  prep.train = std::move(parts.train);
  prep.val = std::move(parts.val);
  prep.test = std::move(parts.test);
  return prep;
}

double gram_code_loss(const Network& net, const Matrix& x, const KernelMatrix& prior) {
  return code_loss(gram(encode(net, x)), prior);
}

Network obtain_model(const ExperimentConfig& cfg, const Prepared& prep, Rng train_rng) {
  if (!cfg.checkpoint_load.empty()) return load_checkpoint(cfg.checkpoint_load);
  return train_dkae(prep.train, prep.prior_train, cfg.train, train_rng);
}

std::string hex_u64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command) {
  const std::string canon = cfg.canonical();
  std::string out = "tool=" + version_string() + "\n";
  out += "command=" + command + "\n";
  out += "seed=" + std::to_string(cfg.seed) + "\n";
  out += "config_hash=" + hex_u64(fnv1a64(canon)) + "\n";
  out += canon;
  write_file_atomic(cfg.out_dir + "/manifest.txt", out);
}

void ensure_out_dir(const ExperimentConfig& cfg, const std::string& subdir = "") {
  std::filesystem::create_directories(cfg.out_dir);
  if (!subdir.empty()) std::filesystem::create_directories(cfg.out_dir + "/" + subdir);
}

// Indices of rows grouped by label, for class-sorted kernel heatmaps.
std::vector<std::size_t> class_sorted_order(const std::vector<int>& labels) {
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  return order;
}

std::pair<std::size_t, std::size_t> image_shape(const Dataset& data) {
  if (data.image_rows * data.image_cols == data.feature_dim() && data.image_rows > 0) {
    return {data.image_rows, data.image_cols};
  }
  return {1, data.feature_dim()};
}

}  // namespace

std::string version_string() { return "dkae 0.1.0"; }

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key=value: '" + line + "'");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "dataset") {
    dataset = value;
  } else if (key == "blobs.n") {
    blobs_n = parse_size(key, value);
  } else if (key == "blobs.dim") {
    blobs_dim = parse_size(key, value);
  } else if (key == "blobs.classes") {
    blobs_classes = parse_size(key, value);
  } else if (key == "blobs.separation") {
    blobs_separation = parse_double(key, value);
  } else if (key == "idx.images") {
    idx_images = value;
  } else if (key == "idx.labels") {
    idx_labels = value;
  } else if (key == "idx.subset") {
    idx_subset = parse_size(key, value);
  } else if (key == "split.train") {
    fractions.train = parse_double(key, value);
  } else if (key == "split.val") {
    fractions.val = parse_double(key, value);
  } else if (key == "split.test") {
    fractions.test = parse_double(key, value);
  } else if (key == "pck.inits") {
    pck_inits = parse_size(key, value);
  } else if (key == "pck.components") {
    pck_components = parse_size(key, value);
  } else if (key == "pck.gmm_subset") {
    gmm_subset = parse_size(key, value);
  } else if (key == "train.lambda") {
    train.lambda = parse_double(key, value);
  } else if (key == "train.batch_size") {
    train.batch_size = parse_size(key, value);
  } else if (key == "train.pretrain_epochs") {
    train.pretrain_epochs = parse_size(key, value);
  } else if (key == "train.finetune_epochs") {
    train.finetune_epochs = parse_size(key, value);
  } else if (key == "train.learning_rate") {
    train.learning_rate = parse_double(key, value);
  } else if (key == "train.beta1") {
    train.beta1 = parse_double(key, value);
  } else if (key == "train.beta2") {
    train.beta2 = parse_double(key, value);
  } else if (key == "train.epsilon") {
    train.epsilon = parse_double(key, value);
  } else if (key == "train.batches_per_epoch") {
    train.batches_per_epoch = parse_size(key, value);
  } else if (key == "train.hidden_dims") {
    train.hidden_dims = parse_size_list(key, value);
  } else if (key == "train.code_dim") {
    train.code_dim = parse_size(key, value);
  } else if (key == "sweep.lambda") {
    lambda_grid = parse_double_list(key, value);
  } else if (key == "sweep.code_dim") {
    code_dim_grid = parse_size_list(key, value);
  } else if (key == "sweep.kpca") {
    kpca_grid = parse_size_list(key, value);
  } else if (key == "denoise.components") {
    components = parse_size(key, value);
  } else if (key == "denoise.noise_std") {
    noise_std = parse_double(key, value);
  } else if (key == "denoise.class_a") {
    denoise_class_a = parse_int(key, value);
  } else if (key == "denoise.class_b") {
    denoise_class_b = parse_int(key, value);
  } else if (key == "denoise.krr_reg") {
    krr_reg = parse_double(key, value);
  } else if (key == "denoise.krr_reg_grid") {
    krr_reg_grid = parse_double_list(key, value);
  } else if (key == "images.max_dumps") {
    max_image_dumps = parse_size(key, value);
  } else if (key == "checkpoint.load") {
    checkpoint_load = value;
  } else if (key == "out") {
    out_dir = value;
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(std::stoull(value));
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  const auto add = [&](const std::string& key, const std::string& value) {
    out += "config." + key + "=" + value + "\n";
  };
  add("blobs.classes", std::to_string(blobs_classes));
  add("blobs.dim", std::to_string(blobs_dim));
  add("blobs.n", std::to_string(blobs_n));
  add("blobs.separation", format_double(blobs_separation));
  add("checkpoint.load", checkpoint_load);
  add("dataset", dataset);
  add("denoise.class_a", std::to_string(denoise_class_a));
  add("denoise.class_b", std::to_string(denoise_class_b));
  add("denoise.components", std::to_string(components));
  add("denoise.krr_reg", format_double(krr_reg));
  add("denoise.krr_reg_grid", join(krr_reg_grid));
  add("denoise.noise_std", format_double(noise_std));
  add("idx.images", idx_images);
  add("idx.labels", idx_labels);
  add("idx.subset", std::to_string(idx_subset));
  add("images.max_dumps", std::to_string(max_image_dumps));
  add("out", out_dir);
  add("pck.components", std::to_string(pck_components));
  add("pck.gmm_subset", std::to_string(gmm_subset));
  add("pck.inits", std::to_string(pck_inits));
  add("seed", std::to_string(seed));
  add("split.test", format_double(fractions.test));
  add("split.train", format_double(fractions.train));
  add("split.val", format_double(fractions.val));
  add("sweep.code_dim", join(code_dim_grid));
  add("sweep.kpca", join(kpca_grid));
  add("sweep.lambda", join(lambda_grid));
  add("train.batch_size", std::to_string(train.batch_size));
  add("train.batches_per_epoch", std::to_string(train.batches_per_epoch));
  add("train.beta1", format_double(train.beta1));
  add("train.beta2", format_double(train.beta2));
  add("train.code_dim", std::to_string(train.code_dim));
  add("train.epsilon", format_double(train.epsilon));
  add("train.finetune_epochs", std::to_string(train.finetune_epochs));
  add("train.hidden_dims", join(train.hidden_dims));
  add("train.lambda", format_double(train.lambda));
  add("train.learning_rate", format_double(train.learning_rate));
  add("train.pretrain_epochs", std::to_string(train.pretrain_epochs));
  return out;
}

double mean_reconstruction_error(const Network& net, const Matrix& x) {
  const Matrix reconstruction = decode(net, encode(net, x));
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = reconstruction.data()[i] - x.data()[i];
    sum += diff * diff;
  }
  return sum / double(x.size());
}

std::vector<LambdaSweepRow> run_lambda_sweep(const ExperimentConfig& cfg) {
  Rng master(cfg.seed);
  const Prepared prep = prepare(cfg, false);
  const KernelMatrix prior_val = pck_kernel(prep.ensemble, prep.val.samples);

  std::vector<LambdaSweepRow> rows;
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    TrainConfig tc = cfg.train;
    tc.lambda = cfg.lambda_grid[i];
    Rng train_rng = master.split(kSweepBase + i);
    const Network net = train_dkae(prep.train, prep.prior_train, tc, train_rng);
    rows.push_back({tc.lambda, mean_reconstruction_error(net, prep.val.samples),
                    gram_code_loss(net, prep.val.samples, prior_val)});
  }

  ensure_out_dir(cfg);
  std::vector<std::vector<double>> records;
  for (const auto& row : rows) {
    records.push_back({row.lambda, row.validation_reconstruction, row.validation_code_loss});
  }
  write_csv(cfg.out_dir + "/lambda_sweep.csv",
            {"lambda", "validation_reconstruction", "validation_code_loss"}, records);
  write_manifest(cfg, "lambda-sweep");
  return rows;
}

std::vector<CodeSweepRow> run_code_size_sweep(const ExperimentConfig& cfg) {
  Rng master(cfg.seed);
  const Prepared prep = prepare(cfg, false);
  const KernelMatrix prior_val = pck_kernel(prep.ensemble, prep.val.samples);

  std::vector<std::size_t> grid = cfg.code_dim_grid;
  std::sort(grid.begin(), grid.end());

  std::vector<CodeSweepRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TrainConfig tc = cfg.train;
    tc.code_dim = grid[i];
    Rng train_rng = master.split(kSweepBase + i);
    const Network net = train_dkae(prep.train, prep.prior_train, tc, train_rng);
    rows.push_back({grid[i], mean_reconstruction_error(net, prep.val.samples),
                    gram_code_loss(net, prep.val.samples, prior_val)});
  }

  ensure_out_dir(cfg);
  std::vector<std::vector<double>> records;
  for (const auto& row : rows) {
    records.push_back({double(row.code_dim), row.validation_reconstruction,
                       row.validation_code_loss});
  }
  write_csv(cfg.out_dir + "/code_sweep.csv",
            {"code_dim", "validation_reconstruction", "validation_code_loss"}, records);
  write_manifest(cfg, "code-sweep");
  return rows;
}

IdealKernelReport run_ideal_kernel_table(const ExperimentConfig& cfg) {
  Rng master(cfg.seed);
  const Prepared prep = prepare(cfg, false);
  if (!prep.test.has_labels()) {
    throw std::invalid_argument("ideal-table: dataset has no labels");
  }

  const KernelMatrix prior_test = pck_kernel(prep.ensemble, prep.test.samples);
  const KernelMatrix label_kernel = ideal_kernel(prep.test.labels);

  TrainConfig aligned_cfg = cfg.train;
  Rng aligned_rng = master.split(kSweepBase);
  const Network aligned_net = train_dkae(prep.train, prep.prior_train, aligned_cfg, aligned_rng);

  TrainConfig plain_cfg = cfg.train;
  plain_cfg.lambda = 0.0;
  Rng plain_rng = master.split(kSweepBase + 1);
  const Network plain_net = train_dkae(prep.train, prep.prior_train, plain_cfg, plain_rng);

  const KernelMatrix aligned_gram = gram(encode(aligned_net, prep.test.samples));
  const KernelMatrix plain_gram = gram(encode(plain_net, prep.test.samples));

  IdealKernelReport report;
  report.names = {"prior", "plain_ae", "aligned"};
  report.losses = {code_loss(prior_test, label_kernel), code_loss(plain_gram, label_kernel),
                   code_loss(aligned_gram, label_kernel)};
  report.improvements.assign(3, std::vector<double>(3, 0.0));
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      report.improvements[a][b] =
          100.0 * (report.losses[b] - report.losses[a]) / report.losses[a];
    }
  }

  ensure_out_dir(cfg, "kernels");
  save_checkpoint(aligned_net, cfg.out_dir + "/model_aligned.ckpt");
  save_checkpoint(plain_net, cfg.out_dir + "/model_plain.ckpt");
  std::string csv = "kernel,code_loss_vs_ideal,improvement_vs_prior_pct,"
                    "improvement_vs_plain_ae_pct,improvement_vs_aligned_pct\n";
  for (std::size_t a = 0; a < 3; ++a) {
    csv += report.names[a] + "," + format_double(report.losses[a]);
    for (std::size_t b = 0; b < 3; ++b) csv += "," + format_double(report.improvements[a][b]);
    csv += "\n";
  }
  write_file_atomic(cfg.out_dir + "/ideal_table.csv", csv);

  const auto order = class_sorted_order(prep.test.labels);
  write_matrix_pgm(cfg.out_dir + "/kernels/prior.pgm", submatrix(prior_test, order, order));
  write_matrix_pgm(cfg.out_dir + "/kernels/plain_ae.pgm", submatrix(plain_gram, order, order));
  write_matrix_pgm(cfg.out_dir + "/kernels/aligned.pgm", submatrix(aligned_gram, order, order));
  write_matrix_pgm(cfg.out_dir + "/kernels/ideal.pgm", submatrix(label_kernel, order, order));
  write_manifest(cfg, "ideal-table");
  return report;
}

KpcaCompareReport run_kpca_comparison(const ExperimentConfig& cfg) {
  Rng master(cfg.seed);
  const Prepared prep = prepare(cfg, false);
  const KernelMatrix prior_test = pck_kernel(prep.ensemble, prep.test.samples);

  const Network net = obtain_model(cfg, prep, master.split(kSweepBase));

  KpcaCompareReport report;
  report.dkae_train_loss = gram_code_loss(net, prep.train.samples, prep.prior_train);
  report.dkae_test_loss = gram_code_loss(net, prep.test.samples, prior_test);

  const KpcaModel full = kpca_fit(prep.prior_train, prep.prior_train.rows());
  const KernelMatrix cross_test =
      pck_kernel(prep.ensemble, prep.test.samples, prep.train.samples);

  std::set<std::size_t> grid(cfg.kpca_grid.begin(), cfg.kpca_grid.end());
  for (std::size_t m : grid) {
    if (m < 1 || m > full.num_components) continue;
    const KpcaModel sub = kpca_truncate(full, m);
    const Matrix z_train = kpca_project(sub);
    const double train_loss = code_loss(kernel_reconstruction(z_train), prep.prior_train);
    const Matrix z_test = nystrom_project(sub, cross_test);
    const double test_loss = code_loss(kernel_reconstruction(z_test), prior_test);
    report.rows.push_back({m, train_loss, test_loss});
  }

  ensure_out_dir(cfg);
  save_checkpoint(net, cfg.out_dir + "/model.ckpt");
  std::vector<std::vector<double>> records;
  for (const auto& row : report.rows) {
    records.push_back({double(row.components), row.kpca_train_loss, row.kpca_test_loss,
                       report.dkae_train_loss, report.dkae_test_loss});
  }
  write_csv(cfg.out_dir + "/kpca_compare.csv",
            {"components", "kpca_train_loss", "kpca_test_loss", "dkae_train_loss",
             "dkae_test_loss"},
            records);
  write_manifest(cfg, "kpca-compare");
  return report;
}

DenoiseReport run_denoising(const ExperimentConfig& cfg) {
  Rng master(cfg.seed);
  const Prepared prep = prepare(cfg, /*two_class_only=*/true);

  const Network net = obtain_model(cfg, prep, master.split(kSweepBase));

  const std::size_t n_train = prep.train.size();
  // Both pipelines project onto the same number of components.
  const std::size_t m = std::min({cfg.components, std::max<std::size_t>(1, n_train / 4),
                                  net.code_dim(), n_train});

  const KpcaModel kp = kpca_fit(prep.prior_train, m);
  const Matrix z_train = kpca_project(kp);
  const double sigma = median_sigma(z_train);

  double reg = cfg.krr_reg;
  if (reg <= 0.0) {
    const KernelMatrix cross_val =
        pck_kernel(prep.ensemble, prep.val.samples, prep.train.samples);
    const Matrix z_val = nystrom_project(kp, cross_val);
    reg = grid_search_reg(z_train, prep.train.samples, z_val, prep.val.samples, sigma,
                          cfg.krr_reg_grid);
  }
  const KrrModel krr = krr_fit(z_train, prep.train.samples, sigma, reg, /*clamp_outputs=*/true);

  Rng noise_rng = master.split(kNoiseStream);
  const Dataset noisy = add_gaussian_noise(prep.test, cfg.noise_std, noise_rng);

  // Kernel projection, then ridge back-mapping.
  const KernelMatrix cross_noisy =
      pck_kernel(prep.ensemble, noisy.samples, prep.train.samples);
  const Matrix denoised_kpca = krr_predict(krr, nystrom_project(kp, cross_noisy));

  // Code-space projection, then decoding.
  const Matrix codes_train = encode(net, prep.train.samples);
  const PcaModel pca = pca_fit(codes_train, m);
  const Matrix codes_noisy = encode(net, noisy.samples);
  const Matrix denoised_dkae = decode(net, pca_backproject(pca, pca_project(pca, codes_noisy)));

  const auto mse_vs_clean = [&](const Matrix& denoised) {
    double sum = 0.0;
    for (std::size_t i = 0; i < denoised.size(); ++i) {
      const double diff = denoised.data()[i] - prep.test.samples.data()[i];
      sum += diff * diff;
    }
    return sum / double(denoised.size());
  };

  DenoiseReport report;
  report.noise_std = cfg.noise_std;
  report.components = m;
  report.mse_kpca = mse_vs_clean(denoised_kpca);
  report.mse_dkae_pca = mse_vs_clean(denoised_dkae);
  report.ae_recon_mse = mean_reconstruction_error(net, prep.test.samples);
  report.krr_sigma = sigma;
  report.krr_reg = reg;

  ensure_out_dir(cfg, "images");
  save_checkpoint(net, cfg.out_dir + "/model.ckpt");
  write_csv(cfg.out_dir + "/denoise.csv",
            {"noise_std", "components", "mse_kpca_krr", "mse_dkae_pca", "ae_recon_mse",
             "krr_sigma", "krr_reg"},
            {{report.noise_std, double(report.components), report.mse_kpca, report.mse_dkae_pca,
              report.ae_recon_mse, report.krr_sigma, report.krr_reg}});

  const auto [img_rows, img_cols] = image_shape(prep.test);
  const std::size_t dumps = std::min(cfg.max_image_dumps, prep.test.size());
  for (std::size_t i = 0; i < dumps; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "/images/original_%03zu.pgm", i);
    write_pgm(cfg.out_dir + name, prep.test.samples.row(i), img_rows, img_cols);
    std::snprintf(name, sizeof(name), "/images/noisy_%03zu.pgm", i);
    write_pgm(cfg.out_dir + name, noisy.samples.row(i), img_rows, img_cols);
    std::snprintf(name, sizeof(name), "/images/kpca_%03zu.pgm", i);
    write_pgm(cfg.out_dir + name, denoised_kpca.row(i), img_rows, img_cols);
    std::snprintf(name, sizeof(name), "/images/dkae_%03zu.pgm", i);
    write_pgm(cfg.out_dir + name, denoised_dkae.row(i), img_rows, img_cols);
  }
  write_manifest(cfg, "denoise");
  return report;
}

}  // namespace dkae
