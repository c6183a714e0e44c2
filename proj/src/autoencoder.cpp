#include "dkae/autoencoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "dkae/errors.hpp"
#include "dkae/io.hpp"

namespace dkae {

namespace {

constexpr double kDegenerateNorm = 1e-12;

inline double sigmoid(double v) {
  if (v >= 0.0) {
    const double e = std::exp(-v);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(v);
  return e / (1.0 + e);
}

void add_bias_and_sigmoid(Matrix& m, const std::vector<double>& bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] = sigmoid(row[j] + bias[j]);
  }
}

std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) sums[j] += row[j];
  }
  return sums;
}

// delta * out * (1 - out), elementwise, in place on delta.
void apply_sigmoid_derivative(Matrix& delta, const Matrix& out) {
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double o = out.data()[i];
    delta.data()[i] *= o * (1.0 - o);
  }
}

void validate_network(const Network& net) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerParams& layer = net.layers[l];
    if (layer.weight.rows() != layer.bias_enc.size() ||
        layer.weight.cols() != layer.bias_dec.size()) {
      throw DimensionError("layer " + std::to_string(l) + ": bias sizes do not match weight");
    }
    if (l + 1 < net.layers.size() &&
        net.layers[l + 1].weight.cols() != layer.weight.rows()) {
      throw DimensionError("layer " + std::to_string(l + 1) + ": input dimension mismatch");
    }
  }
}

void validate_config(const TrainConfig& config) {
  if (config.lambda < 0.0 || config.lambda > 1.0) {
    throw std::invalid_argument("train config: lambda must be in [0, 1]");
  }
  if (config.batch_size < 2) {
    throw std::invalid_argument("train config: batch size must be at least 2");
  }
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("train config: learning rate must be positive");
  }
  if (config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 || config.beta2 >= 1.0) {
    throw std::invalid_argument("train config: betas must be in [0, 1)");
  }
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("train config: epsilon must be positive");
  if (config.code_dim < 1) throw std::invalid_argument("train config: code dim must be positive");
  for (std::size_t h : config.hidden_dims) {
    if (h < 1) throw std::invalid_argument("train config: hidden dims must be positive");
  }
}

struct ForwardCache {
  std::vector<Matrix> enc;  // enc[0] = input, enc[L] = codes
  std::vector<Matrix> dec;  // dec[0] = codes, dec[L] = reconstruction
};

void forward(const Network& net, const Matrix& x, ForwardCache& cache) {
  const std::size_t num_layers = net.layers.size();
  cache.enc.clear();
  cache.dec.clear();
  cache.enc.reserve(num_layers + 1);
  cache.dec.reserve(num_layers + 1);

  cache.enc.push_back(x);
  for (std::size_t l = 0; l < num_layers; ++l) {
    Matrix z = matmul_nt(cache.enc.back(), net.layers[l].weight);
    add_bias_and_sigmoid(z, net.layers[l].bias_enc);
    cache.enc.push_back(std::move(z));
  }
  cache.dec.push_back(cache.enc.back());
  for (std::size_t s = 0; s < num_layers; ++s) {
    const LayerParams& layer = net.layers[num_layers - 1 - s];
    Matrix y = matmul(cache.dec.back(), layer.weight);
    add_bias_and_sigmoid(y, layer.bias_dec);
    cache.dec.push_back(std::move(y));
  }
}

NetworkGrads zero_grads(const Network& net) {
  NetworkGrads grads;
  grads.layers.reserve(net.layers.size());
  for (const LayerParams& layer : net.layers) {
    grads.layers.push_back({Matrix(layer.weight.rows(), layer.weight.cols()),
                            std::vector<double>(layer.bias_enc.size(), 0.0),
                            std::vector<double>(layer.bias_dec.size(), 0.0)});
  }
  return grads;
}

// When the code term is degenerate (vanishing Gram or prior norm, or the two
// normalized matrices coincide), its loss and gradient contributions are
// zero; `strict` escalates a vanishing norm to an error instead.
struct Evaluation {
  BatchLoss loss;
  bool code_active = false;
};

Evaluation evaluate(const Network& net, const Matrix& x, const KernelMatrix* prior,
                    double lambda, bool strict, NetworkGrads* grads) {
  if (x.cols() != net.input_dim()) {
    throw DimensionError("batch: sample dimension " + std::to_string(x.cols()) +
                         ", network expects " + std::to_string(net.input_dim()));
  }
  if (x.rows() == 0) throw std::invalid_argument("batch: no samples");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("batch: lambda must be in [0, 1]");

  const std::size_t k = x.rows();
  const std::size_t d = x.cols();
  const std::size_t num_layers = net.layers.size();

  ForwardCache cache;
  forward(net, x, cache);
  const Matrix& reconstruction = cache.dec.back();
  const Matrix& codes = cache.enc.back();

  Evaluation ev;
  double recon_sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = reconstruction.data()[i] - x.data()[i];
    recon_sum += diff * diff;
  }
  ev.loss.reconstruction = recon_sum / (double(k) * double(d));

  Matrix code_gram;
  double gram_norm = 0.0;
  double prior_norm = 0.0;
  const bool want_code = prior != nullptr && !prior->empty();
  if (want_code) {
    if (prior->rows() != k || prior->cols() != k) {
      throw DimensionError("batch: prior is " + std::to_string(prior->rows()) + "x" +
                           std::to_string(prior->cols()) + ", expected " + std::to_string(k) +
                           "x" + std::to_string(k));
    }
    code_gram = gram(codes);
    gram_norm = code_gram.frobenius_norm();
    prior_norm = prior->frobenius_norm();
    if (gram_norm < kDegenerateNorm || prior_norm < kDegenerateNorm) {
      if (lambda > 0.0) {
        if (strict) throw DegenerateInputError("batch: zero-norm code Gram or prior matrix");
        std::cerr << "warning: degenerate code Gram or prior norm; skipping code term for batch\n";
      }
    } else {
      double sum = 0.0;
      for (std::size_t i = 0; i < code_gram.size(); ++i) {
        const double diff = code_gram.data()[i] / gram_norm - prior->data()[i] / prior_norm;
        sum += diff * diff;
      }
      ev.loss.code = std::sqrt(sum);
      ev.code_active = true;
    }
  } else if (lambda > 0.0) {
    throw std::invalid_argument("batch: code weight is nonzero but no prior was given");
  }
  ev.loss.total = (1.0 - lambda) * ev.loss.reconstruction + lambda * ev.loss.code;

  if (grads == nullptr) return ev;

  *grads = zero_grads(net);
  // Reconstruction path, backward through the decoder.
  Matrix delta(k, d);
  const double recon_scale = 2.0 * (1.0 - lambda) / (double(k) * double(d));
  for (std::size_t i = 0; i < delta.size(); ++i) {
    delta.data()[i] = recon_scale * (reconstruction.data()[i] - x.data()[i]);
  }
  for (std::size_t s = num_layers; s-- > 0;) {
    const std::size_t l = num_layers - 1 - s;
    const Matrix& out = cache.dec[s + 1];
    const Matrix& in = cache.dec[s];
    apply_sigmoid_derivative(delta, out);
    LayerParams& layer_grads = grads->layers[l];
    const std::vector<double> bias = column_sums(delta);
    for (std::size_t j = 0; j < bias.size(); ++j) layer_grads.bias_dec[j] += bias[j];
    layer_grads.weight += matmul_tn(in, delta);
    delta = matmul_nt(delta, net.layers[l].weight);
  }

  // Code-alignment path enters at the codes.
  if (lambda > 0.0 && ev.code_active && ev.loss.code >= kDegenerateNorm) {
    const double inv_gram = 1.0 / gram_norm;
    const double inv_prior = 1.0 / prior_norm;
    Matrix normalized_residual = code_gram;
    for (std::size_t i = 0; i < normalized_residual.size(); ++i) {
      normalized_residual.data()[i] =
          code_gram.data()[i] * inv_gram - prior->data()[i] * inv_prior;
    }
    const double residual_dot_gram = frobenius_dot(normalized_residual, code_gram);
    // d code_loss / d Gram = (N - <N, C> C / ||C||^2) / (||C|| * code_loss)
    const double a = 1.0 / (ev.loss.code * gram_norm);
    const double b = residual_dot_gram / (ev.loss.code * gram_norm * gram_norm * gram_norm);
    Matrix gram_grad = normalized_residual;
    for (std::size_t i = 0; i < gram_grad.size(); ++i) {
      gram_grad.data()[i] = a * normalized_residual.data()[i] - b * code_gram.data()[i];
    }
    // Gram = H H^T with symmetric upstream gradient G gives dH = 2 G H.
    Matrix code_delta = matmul(gram_grad, codes);
    code_delta *= 2.0 * lambda;
    delta += code_delta;
  }

  // Backward through the encoder; tied weights accumulate on top of the
  // decoder contributions.
  for (std::size_t l = num_layers; l-- > 0;) {
    const Matrix& out = cache.enc[l + 1];
    const Matrix& in = cache.enc[l];
    apply_sigmoid_derivative(delta, out);
    LayerParams& layer_grads = grads->layers[l];
    const std::vector<double> bias = column_sums(delta);
    for (std::size_t j = 0; j < bias.size(); ++j) layer_grads.bias_enc[j] += bias[j];
    layer_grads.weight += matmul_tn(delta, in);
    if (l > 0) delta = matmul(delta, net.layers[l].weight);
  }
  return ev;
}

}  // namespace

std::vector<std::size_t> Network::dims() const {
  std::vector<std::size_t> out;
  out.reserve(layers.size() + 1);
  out.push_back(input_dim());
  for (const LayerParams& layer : layers) out.push_back(layer.weight.rows());
  return out;
}

AdamState AdamState::zeros_like(const Network& net) {
  AdamState state;
  state.first_moment = zero_grads(net);
  state.second_moment = zero_grads(net);
  state.step = 0;
  return state;
}

Network init_glorot(const std::vector<std::size_t>& dims, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("init_glorot: need at least two dimensions");
  for (std::size_t d : dims) {
    if (d < 1) throw std::invalid_argument("init_glorot: dimensions must be positive");
  }
  Network net;
  net.layers.reserve(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l];
    const std::size_t fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
    LayerParams layer;
    layer.weight = Matrix(fan_out, fan_in);
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    layer.bias_enc.assign(fan_out, 0.0);
    layer.bias_dec.assign(fan_in, 0.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Matrix encode(const Network& net, const Matrix& x) {
  validate_network(net);
  if (x.cols() != net.input_dim()) {
    throw DimensionError("encode: sample dimension " + std::to_string(x.cols()) +
                         ", network expects " + std::to_string(net.input_dim()));
  }
  Matrix h = x;
  for (const LayerParams& layer : net.layers) {
    Matrix z = matmul_nt(h, layer.weight);
    add_bias_and_sigmoid(z, layer.bias_enc);
    h = std::move(z);
  }
  return h;
}

Matrix decode(const Network& net, const Matrix& codes) {
  validate_network(net);
  if (codes.cols() != net.code_dim()) {
    throw DimensionError("decode: code dimension " + std::to_string(codes.cols()) +
                         ", network expects " + std::to_string(net.code_dim()));
  }
  Matrix h = codes;
  for (std::size_t s = net.layers.size(); s-- > 0;) {
    Matrix y = matmul(h, net.layers[s].weight);
    add_bias_and_sigmoid(y, net.layers[s].bias_dec);
    h = std::move(y);
  }
  return h;
}

double reconstruction_loss(std::span<const double> x, std::span<const double> x_tilde) {
  if (x.size() != x_tilde.size()) {
    throw DimensionError("reconstruction_loss: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - x_tilde[i];
    sum += diff * diff;
  }
  return sum;
}

BatchLoss batch_loss(const Network& net, const Matrix& x, const KernelMatrix& prior,
                     double lambda) {
  validate_network(net);
  return evaluate(net, x, prior.empty() ? nullptr : &prior, lambda, /*strict=*/true, nullptr)
      .loss;
}

NetworkGrads gradients(const Network& net, const Matrix& x, const KernelMatrix& prior,
                       double lambda) {
  validate_network(net);
  NetworkGrads grads;
  evaluate(net, x, prior.empty() ? nullptr : &prior, lambda, /*strict=*/true, &grads);
  return grads;
}

void adam_step(Network& params, const NetworkGrads& grads, AdamState& state, double learning_rate,
               double beta1, double beta2, double epsilon) {
  if (grads.layers.size() != params.layers.size() ||
      state.first_moment.layers.size() != params.layers.size()) {
    throw std::invalid_argument("adam_step: layer count mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(beta2, double(state.step));

  const auto update = [&](double& p, double g, double& m, double& v) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    p -= learning_rate * (m / bc1) / (std::sqrt(v / bc2) + epsilon);
  };

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    LayerParams& layer = params.layers[l];
    const LayerParams& g = grads.layers[l];
    LayerParams& m = state.first_moment.layers[l];
    LayerParams& v = state.second_moment.layers[l];
    if (!layer.weight.same_shape(g.weight)) {
      throw std::invalid_argument("adam_step: gradient shape mismatch at layer " +
                                  std::to_string(l));
    }
    for (std::size_t i = 0; i < layer.weight.size(); ++i) {
      update(layer.weight.data()[i], g.weight.data()[i], m.weight.data()[i], v.weight.data()[i]);
    }
    for (std::size_t i = 0; i < layer.bias_enc.size(); ++i) {
      update(layer.bias_enc[i], g.bias_enc[i], m.bias_enc[i], v.bias_enc[i]);
    }
    for (std::size_t i = 0; i < layer.bias_dec.size(); ++i) {
      update(layer.bias_dec[i], g.bias_dec[i], m.bias_dec[i], v.bias_dec[i]);
    }
  }
}

void run_training_loop(Network& net, const Matrix& x, const KernelMatrix* prior, double lambda,
                       std::size_t epochs, const TrainConfig& config, Rng& rng) {
  validate_network(net);
  const std::size_t n = x.rows();
  if (n == 0) throw std::invalid_argument("training: empty sample matrix");
  const std::size_t k = std::min(config.batch_size, n);
  std::size_t batches = config.batches_per_epoch;
  if (batches == 0) {
    const double ratio = double(n) / double(k);
    batches = std::max<std::size_t>(1, std::size_t(std::llround(ratio * ratio)));
  }
  if (lambda > 0.0 && (prior == nullptr || prior->rows() != n || prior->cols() != n)) {
    throw DimensionError("training: prior must be n x n over the training rows");
  }

  AdamState state = AdamState::zeros_like(net);
  NetworkGrads grads;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t b = 0; b < batches; ++b) {
      const std::vector<std::size_t> idx = rng.sample_without_replacement(n, k);
      const Matrix batch = x.select_rows(idx);
      Matrix prior_k;
      if (lambda > 0.0) prior_k = submatrix(*prior, idx, idx);
      evaluate(net, batch, lambda > 0.0 ? &prior_k : nullptr, lambda, /*strict=*/false, &grads);
      adam_step(net, grads, state, config.learning_rate, config.beta1, config.beta2,
                config.epsilon);
    }
  }
}

Network pretrain(const Dataset& data, const KernelMatrix& prior, const TrainConfig& config,
                 Rng& rng) {
  validate_config(config);
  if (data.size() == 0) throw std::invalid_argument("pretrain: empty dataset");
  if (config.lambda > 0.0 &&
      (prior.rows() != data.size() || prior.cols() != data.size())) {
    throw DimensionError("pretrain: prior must be n x n over the training rows");
  }

  std::vector<std::size_t> dims;
  dims.push_back(data.feature_dim());
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(config.code_dim);

  Network stacked;
  Matrix current = data.samples;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Rng layer_rng = rng.split(l);
    Network single = init_glorot({dims[l], dims[l + 1]}, layer_rng);
    const bool is_code_layer = (l + 2 == dims.size());
    run_training_loop(single, current, is_code_layer ? &prior : nullptr,
                      is_code_layer ? config.lambda : 0.0, config.pretrain_epochs, config,
                      layer_rng);
    current = encode(single, current);
    stacked.layers.push_back(std::move(single.layers.front()));
  }
  return stacked;
}

Network finetune(Network net, const Dataset& data, const KernelMatrix& prior,
                 const TrainConfig& config, Rng& rng) {
  validate_config(config);
  validate_network(net);
  if (net.input_dim() != data.feature_dim()) {
    throw DimensionError("finetune: network input dimension does not match data");
  }
  run_training_loop(net, data.samples, &prior, config.lambda, config.finetune_epochs, config,
                    rng);
  return net;
}

Network train_dkae(const Dataset& data, const KernelMatrix& prior, const TrainConfig& config,
                   Rng& rng) {
  Rng pre_rng = rng.split(0);
  Rng fine_rng = rng.split(1);
  Network net = pretrain(data, prior, config, pre_rng);
  return finetune(std::move(net), data, prior, config, fine_rng);
}

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x444B4145;  // "DKAE"
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kTransferSigmoid = 0;

void write_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char(static_cast<unsigned char>(v >> (8 * i))));
}

void write_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char(static_cast<unsigned char>(v >> (8 * i))));
}

void write_f64(std::string& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t read_u32(std::istream& in, const char* field) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw FormatError(std::string("checkpoint: truncated ") + field);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in, const char* field) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw FormatError(std::string("checkpoint: truncated ") + field);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& in, const char* field) {
  return std::bit_cast<double>(read_u64(in, field));
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
  validate_network(net);
  std::string out;
  write_u32(out, kCheckpointMagic);
  write_u32(out, kCheckpointVersion);
  write_u32(out, kTransferSigmoid);
  write_u64(out, net.layers.size());
  for (const LayerParams& layer : net.layers) {
    write_u64(out, layer.weight.rows());
    write_u64(out, layer.weight.cols());
  }
  for (const LayerParams& layer : net.layers) {
    for (double v : layer.weight.data()) write_f64(out, v);
    for (double v : layer.bias_enc) write_f64(out, v);
    for (double v : layer.bias_dec) write_f64(out, v);
  }
  write_file_atomic(path, out);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("load_checkpoint: cannot open " + path);
  if (read_u32(in, "magic") != kCheckpointMagic) {
    throw FormatError("checkpoint: bad magic in " + path);
  }
  if (read_u32(in, "version") != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version in " + path);
  }
  if (read_u32(in, "transfer") != kTransferSigmoid) {
    throw FormatError("checkpoint: unsupported transfer function in " + path);
  }
  const std::uint64_t num_layers = read_u64(in, "layer count");
  if (num_layers == 0 || num_layers > 1024) throw FormatError("checkpoint: bad layer count");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> shapes;
  shapes.reserve(num_layers);
  for (std::uint64_t l = 0; l < num_layers; ++l) {
    const std::uint64_t rows = read_u64(in, "layer rows");
    const std::uint64_t cols = read_u64(in, "layer cols");
    if (rows == 0 || cols == 0) throw FormatError("checkpoint: bad layer shape");
    shapes.emplace_back(rows, cols);
  }
  Network net;
  net.layers.reserve(num_layers);
  for (const auto& [rows, cols] : shapes) {
    LayerParams layer;
    layer.weight = Matrix(rows, cols);
    for (double& v : layer.weight.data()) v = read_f64(in, "weight");
    layer.bias_enc.resize(rows);
    for (double& v : layer.bias_enc) v = read_f64(in, "encoder bias");
    layer.bias_dec.resize(cols);
    for (double& v : layer.bias_dec) v = read_f64(in, "decoder bias");
    net.layers.push_back(std::move(layer));
  }
  validate_network(net);
  return net;
}

}  // namespace dkae
