#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dkae/data.hpp"
#include "dkae/kernels.hpp"
#include "dkae/matrix.hpp"
#include "dkae/rng.hpp"

namespace dkae {

// One tied layer: the decoder applies the transpose of the stored encoder
// weight, so the tie holds bitwise at all times. Biases are not tied.
struct LayerParams {
  Matrix weight;                 // out x in
  std::vector<double> bias_enc;  // out
  std::vector<double> bias_dec;  // in
};

// Stack of tied sigmoid layers. Encoding applies layers front to back,
// decoding back to front with transposed weights.
struct Network {
  std::vector<LayerParams> layers;

  std::size_t input_dim() const { return layers.front().weight.cols(); }
  std::size_t code_dim() const { return layers.back().weight.rows(); }
  std::vector<std::size_t> dims() const;
};

// Gradient of the batch objective with respect to every parameter; shapes
// mirror the network's.
struct NetworkGrads {
  std::vector<LayerParams> layers;
};

struct TrainConfig {
  double lambda = 0.1;         // code-alignment weight in [0, 1]
  std::size_t batch_size = 200;  // k >= 2 (a 1-sample Gram is degenerate)
  std::size_t pretrain_epochs = 30;
  std::size_t finetune_epochs = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  // 0 selects round((n/k)^2) batches per epoch, never fewer than one.
  std::size_t batches_per_epoch = 0;
  std::vector<std::size_t> hidden_dims = {16};
  std::size_t code_dim = 8;
};

struct AdamState {
  NetworkGrads first_moment;
  NetworkGrads second_moment;
  std::uint64_t step = 0;

  static AdamState zeros_like(const Network& net);
};

struct BatchLoss {
  double total = 0.0;
  double reconstruction = 0.0;  // mean squared error per sample and dimension
  double code = 0.0;            // normalized Frobenius distance of Gram matrices
};

// Glorot-uniform weights (+-sqrt(6 / (fan_in + fan_out))), zero biases.
Network init_glorot(const std::vector<std::size_t>& dims, Rng& rng);

Matrix encode(const Network& net, const Matrix& x);
Matrix decode(const Network& net, const Matrix& codes);

// Squared Euclidean distance between a sample and its reconstruction.
double reconstruction_loss(std::span<const double> x, std::span<const double> x_tilde);

// total = (1 - lambda) * reconstruction + lambda * code, where the code term
// compares the batch code Gram matrix against the prior submatrix for the
// same samples (recomputed per batch).
BatchLoss batch_loss(const Network& net, const Matrix& x, const KernelMatrix& prior,
                     double lambda);

// Exact gradient of batch_loss, including the paths through the code Gram
// matrix and its norm, and both encoder and decoder uses of each tied weight.
NetworkGrads gradients(const Network& net, const Matrix& x, const KernelMatrix& prior,
                       double lambda);

// Bias-corrected Adam update, in place.
void adam_step(Network& params, const NetworkGrads& grads, AdamState& state, double learning_rate,
               double beta1, double beta2, double epsilon);

// Mini-batch Adam loop: epochs * batches_per_epoch steps on batches sampled
// uniformly without replacement. prior may be null when lambda is 0.
void run_training_loop(Network& net, const Matrix& x, const KernelMatrix* prior, double lambda,
                       std::size_t epochs, const TrainConfig& config, Rng& rng);

// Greedy layer-wise pretraining: inner layers minimize reconstruction only;
// the code layer trains with the full joint objective against the prior.
Network pretrain(const Dataset& data, const KernelMatrix& prior, const TrainConfig& config,
                 Rng& rng);

// End-to-end fine-tuning of an existing network with the joint objective.
Network finetune(Network net, const Dataset& data, const KernelMatrix& prior,
                 const TrainConfig& config, Rng& rng);

// pretrain followed by finetune, on rng streams split(0) and split(1).
Network train_dkae(const Dataset& data, const KernelMatrix& prior, const TrainConfig& config,
                   Rng& rng);

// Versioned little-endian binary checkpoint.
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace dkae
