#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "dkae/autoencoder.hpp"
#include "dkae/data.hpp"
#include "dkae/errors.hpp"
#include "dkae/kernels.hpp"

using namespace dkae;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = 0.0,
                     double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

Matrix random_prior(std::size_t k, Rng& rng) {
  Matrix p = gram(random_matrix(k, 3, rng, 0.0, 1.0));
  for (std::size_t i = 0; i < k; ++i) p(i, i) += 0.1;
  return p;
}

Network zero_network(const std::vector<std::size_t>& dims) {
  Network net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    LayerParams layer;
    layer.weight = Matrix(dims[l + 1], dims[l]);
    layer.bias_enc.assign(dims[l + 1], 0.0);
    layer.bias_dec.assign(dims[l], 0.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Network random_network(const std::vector<std::size_t>& dims, Rng& rng) {
  Network net = init_glorot(dims, rng);
  for (LayerParams& layer : net.layers) {
    for (double& b : layer.bias_enc) b = rng.uniform(-0.5, 0.5);
    for (double& b : layer.bias_dec) b = rng.uniform(-0.5, 0.5);
  }
  return net;
}

bool networks_equal(const Network& a, const Network& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].weight.data() != b.layers[l].weight.data()) return false;
    if (a.layers[l].bias_enc != b.layers[l].bias_enc) return false;
    if (a.layers[l].bias_dec != b.layers[l].bias_dec) return false;
  }
  return true;
}

// Scalar re-implementation of the joint batch objective using nothing but
// plain loops, kept independent of the library's matrix path.
double oracle_batch_total(const Network& net, const Matrix& x, const Matrix& prior,
                          double lambda) {
  const auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const std::size_t k = x.rows();
  const std::size_t d = x.cols();

  std::vector<std::vector<double>> codes(k);
  double recon_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> h(x.row(i), x.row(i) + d);
    for (const LayerParams& layer : net.layers) {
      std::vector<double> next(layer.weight.rows());
      for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
        double z = layer.bias_enc[r];
        for (std::size_t c = 0; c < layer.weight.cols(); ++c) z += layer.weight(r, c) * h[c];
        next[r] = sig(z);
      }
      h = std::move(next);
    }
    codes[i] = h;
    for (std::size_t s = net.layers.size(); s-- > 0;) {
      const LayerParams& layer = net.layers[s];
      std::vector<double> next(layer.weight.cols());
      for (std::size_t c = 0; c < layer.weight.cols(); ++c) {
        double z = layer.bias_dec[c];
        for (std::size_t r = 0; r < layer.weight.rows(); ++r) z += layer.weight(r, c) * h[r];
        next[c] = sig(z);
      }
      h = std::move(next);
    }
    for (std::size_t j = 0; j < d; ++j) {
      recon_sum += (x(i, j) - h[j]) * (x(i, j) - h[j]);
    }
  }

  double gram_sq = 0.0;
  double prior_sq = 0.0;
  std::vector<std::vector<double>> c(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < codes[i].size(); ++t) dot += codes[i][t] * codes[j][t];
      c[i][j] = dot;
      gram_sq += dot * dot;
      prior_sq += prior(i, j) * prior(i, j);
    }
  }
  double diff_sq = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double diff =
          c[i][j] / std::sqrt(gram_sq) - prior(i, j) / std::sqrt(prior_sq);
      diff_sq += diff * diff;
    }
  }
  return (1.0 - lambda) / (double(k) * double(d)) * recon_sum + lambda * std::sqrt(diff_sq);
}

// Max relative error between analytic and central-difference gradients,
// relative to the largest gradient magnitude.
double gradient_check(Network net, const Matrix& x, const Matrix& prior, double lambda) {
  const NetworkGrads analytic = gradients(net, x, prior, lambda);
  const double h = 1e-6;
  double max_diff = 0.0;
  double scale = 0.0;

  const auto probe = [&](double& value, double grad) {
    const double original = value;
    value = original + h;
    const double up = batch_loss(net, x, prior, lambda).total;
    value = original - h;
    const double down = batch_loss(net, x, prior, lambda).total;
    value = original;
    const double fd = (up - down) / (2.0 * h);
    max_diff = std::max(max_diff, std::abs(fd - grad));
    scale = std::max({scale, std::abs(fd), std::abs(grad)});
  };

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerParams& layer = net.layers[l];
    const LayerParams& g = analytic.layers[l];
    for (std::size_t i = 0; i < layer.weight.size(); ++i) {
      probe(layer.weight.data()[i], g.weight.data()[i]);
    }
    for (std::size_t i = 0; i < layer.bias_enc.size(); ++i) {
      probe(layer.bias_enc[i], g.bias_enc[i]);
    }
    for (std::size_t i = 0; i < layer.bias_dec.size(); ++i) {
      probe(layer.bias_dec[i], g.bias_dec[i]);
    }
  }
  return max_diff / std::max(scale, 1e-12);
}

double total_grad_norm(const NetworkGrads& grads) {
  double sum = 0.0;
  for (const LayerParams& layer : grads.layers) {
    for (double v : layer.weight.data()) sum += v * v;
    for (double v : layer.bias_enc) sum += v * v;
    for (double v : layer.bias_dec) sum += v * v;
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("init_glorot bound, zero biases, determinism") {
  Rng rng(1);
  const Network net = init_glorot({4, 3}, rng);
  const double bound = std::sqrt(6.0 / 7.0);
  for (double w : net.layers[0].weight.data()) CHECK(std::abs(w) <= bound);
  for (double b : net.layers[0].bias_enc) CHECK(b == 0.0);
  for (double b : net.layers[0].bias_dec) CHECK(b == 0.0);

  Rng a(2);
  Rng b(2);
  CHECK(networks_equal(init_glorot({5, 4, 3}, a), init_glorot({5, 4, 3}, b)));
  CHECK_THROWS_AS(init_glorot({5}, rng), std::invalid_argument);
  CHECK_THROWS_AS(init_glorot({5, 0, 3}, rng), std::invalid_argument);
}

TEST_CASE("encode with zero parameters returns one half everywhere") {
  const Network net = zero_network({4, 3, 2});
  Rng rng(3);
  const Matrix x = random_matrix(5, 4, rng);
  const Matrix codes = encode(net, x);
  CHECK(codes.rows() == 5);
  CHECK(codes.cols() == 2);
  for (double v : codes.data()) CHECK(v == 0.5);
  const Matrix out = decode(net, codes);
  for (double v : out.data()) CHECK(v == 0.5);
}

TEST_CASE("encode saturates with a large positive encoder bias") {
  Network net = zero_network({3, 2});
  net.layers[0].bias_enc.assign(2, 40.0);
  Rng rng(4);
  const Matrix codes = encode(net, random_matrix(4, 3, rng));
  for (double v : codes.data()) CHECK(v > 1.0 - 1e-12);
}

TEST_CASE("encode and decode act row-wise") {
  Rng rng(5);
  const Network net = random_network({4, 3, 2}, rng);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix batch_codes = encode(net, x);
  for (std::size_t i = 0; i < 3; ++i) {
    const Matrix single = encode(net, x.select_rows({i}));
    for (std::size_t j = 0; j < 2; ++j) CHECK(single(0, j) == batch_codes(i, j));
  }
  CHECK_THROWS_AS(encode(net, Matrix(2, 5)), DimensionError);
  CHECK_THROWS_AS(decode(net, Matrix(2, 3)), DimensionError);
}

TEST_CASE("decode uses the transposed encoder weight (tied)") {
  Rng rng(6);
  const Network net = random_network({3, 2}, rng);
  Matrix codes = random_matrix(1, 2, rng);
  const Matrix out = decode(net, codes);
  for (std::size_t c = 0; c < 3; ++c) {
    double z = net.layers[0].bias_dec[c];
    for (std::size_t r = 0; r < 2; ++r) z += net.layers[0].weight(r, c) * codes(0, r);
    CHECK(out(0, c) == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-14));
  }
}

TEST_CASE("encode outputs stay strictly inside (0,1) for Glorot networks") {
  Rng rng(7);
  const Network net = init_glorot({6, 5, 4}, rng);
  const Matrix codes = encode(net, random_matrix(20, 6, rng));
  for (double v : codes.data()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("reconstruction_loss examples") {
  const std::vector<double> a{1.0, 0.0};
  const std::vector<double> b{0.0, 1.0};
  CHECK(reconstruction_loss(a, a) == 0.0);
  CHECK(reconstruction_loss(a, b) == 2.0);
  const std::vector<double> c{0.5};
  CHECK_THROWS_AS(reconstruction_loss(a, c), DimensionError);
}

TEST_CASE("batch_loss endpoints and decomposition") {
  Rng rng(8);
  const Network net = random_network({4, 3}, rng);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix prior = random_prior(3, rng);

  const BatchLoss at_zero = batch_loss(net, x, prior, 0.0);
  double recon = 0.0;
  const Matrix reconstruction = decode(net, encode(net, x));
  for (std::size_t i = 0; i < x.size(); ++i) {
    recon += (reconstruction.data()[i] - x.data()[i]) * (reconstruction.data()[i] - x.data()[i]);
  }
  recon /= double(x.size());
  CHECK(at_zero.total == doctest::Approx(recon).epsilon(1e-12));

  const BatchLoss at_one = batch_loss(net, x, prior, 1.0);
  CHECK(at_one.total == doctest::Approx(code_loss(gram(encode(net, x)), prior)).epsilon(1e-12));

  for (double lambda : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const BatchLoss loss = batch_loss(net, x, prior, lambda);
    CHECK(std::abs(loss.total -
                   ((1.0 - lambda) * loss.reconstruction + lambda * loss.code)) <= 1e-12);
  }
}

TEST_CASE("batch_loss matches the independent scalar evaluation") {
  Rng rng(9);
  const Network net = random_network({4, 5, 3}, rng);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix prior = random_prior(3, rng);
  for (double lambda : {0.0, 0.1, 0.5, 1.0}) {
    const double expected = oracle_batch_total(net, x, prior, lambda);
    CHECK(batch_loss(net, x, prior, lambda).total ==
          doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("batch_loss with full batch equals the full-data objective") {
  // With k = n and the full prior, the mini-batch objective is the complete
  // one; spot-check against the scalar oracle at that size.
  Rng rng(10);
  const Network net = random_network({3, 2}, rng);
  const Matrix x = random_matrix(8, 3, rng);
  const Matrix prior = random_prior(8, rng);
  CHECK(batch_loss(net, x, prior, 0.3).total ==
        doctest::Approx(oracle_batch_total(net, x, prior, 0.3)).epsilon(1e-11));
}

TEST_CASE("batch_loss error paths") {
  Rng rng(11);
  const Network net = random_network({4, 3}, rng);
  const Matrix x = random_matrix(3, 4, rng);
  CHECK_THROWS_AS(batch_loss(net, x, random_prior(5, rng), 0.5), DimensionError);
  CHECK_THROWS_AS(batch_loss(net, x, Matrix(3, 3), 0.5), DegenerateInputError);
  CHECK_THROWS_AS(batch_loss(net, x, KernelMatrix(), 0.5), std::invalid_argument);
  CHECK_NOTHROW(batch_loss(net, x, KernelMatrix(), 0.0));
}

TEST_CASE("gradients vanish at a perfect reconstruction with lambda 0") {
  const Network net = zero_network({3, 2});
  const Matrix x(4, 3, 0.5);  // reconstruction is exactly 0.5 everywhere
  const NetworkGrads grads = gradients(net, x, KernelMatrix(), 0.0);
  CHECK(total_grad_norm(grads) == 0.0);
}

TEST_CASE("code gradient vanishes when the code Gram is proportional to the prior") {
  Rng rng(12);
  Network net = random_network({4, 3}, rng);
  Matrix x(3, 4);
  const Matrix row = random_matrix(1, 4, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = row(0, j);
  }
  // Identical samples give identical codes, so the Gram is a constant
  // multiple of the all-ones prior.
  const Matrix prior(3, 3, 1.0);
  const NetworkGrads grads = gradients(net, x, prior, 1.0);
  CHECK(total_grad_norm(grads) <= 1e-8);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(13);
  const std::vector<std::vector<std::size_t>> architectures = {
      {5, 3}, {4, 5, 3}, {6, 4, 3, 2}};
  for (const auto& dims : architectures) {
    for (double lambda : {0.0, 0.1, 0.5, 1.0}) {
      const Network net = random_network(dims, rng);
      const std::size_t k = 2 + rng.uniform_index(5);
      const Matrix x = random_matrix(k, dims.front(), rng);
      const Matrix prior = random_prior(k, rng);
      const double rel = gradient_check(net, x, prior, lambda);
      CHECK(rel <= 1e-5);
    }
  }
}

TEST_CASE("adam first step moves by about the learning rate against the gradient sign") {
  Network net = zero_network({2, 1});
  net.layers[0].weight(0, 0) = 0.3;
  AdamState state = AdamState::zeros_like(net);
  NetworkGrads grads;
  grads.layers.push_back({Matrix(1, 2), std::vector<double>(1, 0.0),
                          std::vector<double>(2, 0.0)});
  grads.layers[0].weight(0, 0) = 0.75;  // arbitrary nonzero gradient

  const double lr = 1e-3;
  adam_step(net, grads, state, lr, 0.9, 0.999, 1e-8);
  // First bias-corrected step is -lr * g / (|g| + eps') ~ -lr * sign(g).
  CHECK(net.layers[0].weight(0, 0) == doctest::Approx(0.3 - lr).epsilon(1e-4));
  CHECK(state.step == 1);
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  Rng rng(14);
  Network net = random_network({3, 2}, rng);
  const Network before = net;
  AdamState state = AdamState::zeros_like(net);
  NetworkGrads zero;
  zero.layers.push_back({Matrix(2, 3), std::vector<double>(2, 0.0),
                         std::vector<double>(3, 0.0)});
  for (int step = 0; step < 5; ++step) {
    adam_step(net, zero, state, 1e-3, 0.9, 0.999, 1e-8);
  }
  CHECK(networks_equal(net, before));
}

TEST_CASE("adam is deterministic") {
  Rng rng(15);
  Network net_a = random_network({3, 2}, rng);
  Network net_b = net_a;
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix prior = random_prior(4, rng);
  AdamState state_a = AdamState::zeros_like(net_a);
  AdamState state_b = AdamState::zeros_like(net_b);
  for (int step = 0; step < 3; ++step) {
    const NetworkGrads ga = gradients(net_a, x, prior, 0.4);
    const NetworkGrads gb = gradients(net_b, x, prior, 0.4);
    adam_step(net_a, ga, state_a, 1e-3, 0.9, 0.999, 1e-8);
    adam_step(net_b, gb, state_b, 1e-3, 0.9, 0.999, 1e-8);
  }
  CHECK(networks_equal(net_a, net_b));
}

TEST_CASE("finetune with zero epochs is a no-op") {
  Rng data_rng(16);
  const Dataset blobs = make_blobs(30, 6, 2, 6.0, data_rng);
  const KernelMatrix prior = rbf_kernel(blobs.samples, 1.0);
  TrainConfig cfg;
  cfg.hidden_dims = {};
  cfg.code_dim = 3;
  cfg.batch_size = 8;
  cfg.finetune_epochs = 0;
  Rng init_rng(17);
  const Network net = init_glorot({6, 3}, init_rng);
  Rng train_rng(18);
  const Network tuned = finetune(net, blobs, prior, cfg, train_rng);
  CHECK(networks_equal(net, tuned));
}

TEST_CASE("pretraining lowers the reconstruction error of the stack") {
  Rng data_rng(19);
  const Dataset blobs = make_blobs(60, 20, 3, 8.0, data_rng);
  const KernelMatrix prior = rbf_kernel(blobs.samples, 1.0);
  TrainConfig cfg;
  cfg.hidden_dims = {8};
  cfg.code_dim = 4;
  cfg.batch_size = 16;
  cfg.lambda = 0.1;
  cfg.pretrain_epochs = 0;
  Rng rng_init(20);
  const Network untrained = pretrain(blobs, prior, cfg, rng_init);
  cfg.pretrain_epochs = 30;
  Rng rng_train(20);
  const Network trained = pretrain(blobs, prior, cfg, rng_train);

  const auto recon_error = [&](const Network& net) {
    const Matrix reconstruction = decode(net, encode(net, blobs.samples));
    double sum = 0.0;
    for (std::size_t i = 0; i < blobs.samples.size(); ++i) {
      const double diff = reconstruction.data()[i] - blobs.samples.data()[i];
      sum += diff * diff;
    }
    return sum / double(blobs.samples.size());
  };
  CHECK(recon_error(trained) < recon_error(untrained));
}

TEST_CASE("pretrain on a single-layer stack equals one joint training loop") {
  Rng data_rng(21);
  const Dataset blobs = make_blobs(24, 5, 2, 6.0, data_rng);
  const KernelMatrix prior = rbf_kernel(blobs.samples, 1.0);
  TrainConfig cfg;
  cfg.hidden_dims = {};
  cfg.code_dim = 3;
  cfg.batch_size = 6;
  cfg.lambda = 0.2;
  cfg.pretrain_epochs = 4;

  Rng rng_a(22);
  const Network stacked = pretrain(blobs, prior, cfg, rng_a);

  Rng rng_b(22);
  Rng layer_rng = rng_b.split(0);
  Network direct = init_glorot({5, 3}, layer_rng);
  run_training_loop(direct, blobs.samples, &prior, cfg.lambda, cfg.pretrain_epochs, cfg,
                    layer_rng);
  CHECK(networks_equal(stacked, direct));
}

TEST_CASE("finetune decreases the training objective on blobs") {
  Rng data_rng(23);
  const Dataset blobs = make_blobs(60, 10, 2, 8.0, data_rng);
  const KernelMatrix prior = rbf_kernel(blobs.samples, 1.0);
  TrainConfig cfg;
  cfg.hidden_dims = {6};
  cfg.code_dim = 4;
  cfg.batch_size = 16;
  cfg.lambda = 0.1;
  cfg.finetune_epochs = 25;
  Rng init_rng(24);
  const Network net = init_glorot({10, 6, 4}, init_rng);
  const double before = batch_loss(net, blobs.samples, prior, cfg.lambda).total;
  Rng train_rng(25);
  const Network tuned = finetune(net, blobs, prior, cfg, train_rng);
  const double after = batch_loss(tuned, blobs.samples, prior, cfg.lambda).total;
  CHECK(after <= before);
}

TEST_CASE("train_dkae composes pretrain and finetune on split streams") {
  Rng data_rng(26);
  const Dataset blobs = make_blobs(30, 6, 2, 6.0, data_rng);
  const KernelMatrix prior = rbf_kernel(blobs.samples, 1.0);
  TrainConfig cfg;
  cfg.hidden_dims = {4};
  cfg.code_dim = 3;
  cfg.batch_size = 8;
  cfg.pretrain_epochs = 3;
  cfg.finetune_epochs = 3;

  Rng rng_a(27);
  const Network direct = train_dkae(blobs, prior, cfg, rng_a);

  Rng rng_b(27);
  Rng pre_rng = rng_b.split(0);
  Rng fine_rng = rng_b.split(1);
  const Network composed =
      finetune(pretrain(blobs, prior, cfg, pre_rng), blobs, prior, cfg, fine_rng);
  CHECK(networks_equal(direct, composed));

  // End-to-end determinism.
  Rng rng_c(27);
  CHECK(networks_equal(direct, train_dkae(blobs, prior, cfg, rng_c)));
}

TEST_CASE("checkpoint round trip preserves every parameter") {
  Rng rng(28);
  const Network net = random_network({6, 4, 3}, rng);
  const auto dir = std::filesystem::temp_directory_path() / "dkae_ae_tests";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();
  save_checkpoint(net, path);
  const Network loaded = load_checkpoint(path);
  CHECK(networks_equal(net, loaded));

  const std::string bad_path = (dir / "bad.ckpt").string();
  {
    std::ofstream out(bad_path, std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(bad_path), FormatError);
}
