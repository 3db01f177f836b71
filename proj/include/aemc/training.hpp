#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "aemc/autoencoder.hpp"
#include "aemc/rng.hpp"

namespace aemc {

enum class Optimizer { sgd, adam };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  AdamParams adam;
  std::uint64_t seed = 0;
  bool standardize = true;
};

// Layer widths and activations for both halves of the autoencoder.
// encoder_dims front() is the ambient dimension D, back() the latent r.
struct ArchSpec {
  std::vector<int> encoder_dims;
  std::vector<Activation> encoder_acts;
  std::vector<int> decoder_dims;
  std::vector<Activation> decoder_acts;

  // Single affine map on each side (the linear architecture used in the
  // experiments: input layer, latent layer, output layer).
  static ArchSpec linear(int d, int r) {
    return {{d, r}, {Activation::identity}, {r, d}, {Activation::identity}};
  }

  // tanh hidden layer on each side; the decoder matches the
  // q_v = D2 tanh(D1 q_h + b1) form the latent gradients assume.
  static ArchSpec tanh_hidden(int d, int hidden, int r) {
    return {{d, hidden, r},
            {Activation::tanh_act, Activation::identity},
            {r, hidden, d},
            {Activation::tanh_act, Activation::identity}};
  }
};

struct TrainReport {
  std::vector<double> epoch_mse;  // full-data reconstruction MSE per epoch
  double final_mse = 0.0;
};

namespace detail {

inline std::vector<AffineLayer> init_layers(const std::vector<int>& dims,
                                            const std::vector<Activation>& acts,
                                            RngStream& rng) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw std::invalid_argument("inconsistent architecture spec");
  std::vector<AffineLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    int fan_in = dims[l];
    int fan_out = dims[l + 1];
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    AffineLayer layer;
    layer.weight.resize(fan_out, fan_in);
    for (Eigen::Index i = 0; i < fan_out; ++i)
      for (Eigen::Index j = 0; j < fan_in; ++j)
        layer.weight(i, j) = a * (2.0 * rng.uniform() - 1.0);
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation = acts[l];
    layers.push_back(std::move(layer));
  }
  return layers;
}

struct LayerGrads {
  Eigen::MatrixXd dw;
  Eigen::VectorXd db;
};

struct AdamState {
  Eigen::MatrixXd mw, vw;
  Eigen::VectorXd mb, vb;
};

// Forward a batch (columns = samples) storing each layer's output.
inline void forward_batch(const std::vector<AffineLayer>& layers,
                          const Eigen::MatrixXd& x,
                          std::vector<Eigen::MatrixXd>& outs) {
  outs.clear();
  outs.reserve(layers.size());
  const Eigen::MatrixXd* cur = &x;
  for (const auto& l : layers) {
    Eigen::MatrixXd a = (l.weight * (*cur)).colwise() + l.bias;
    if (l.activation == Activation::tanh_act) a = a.array().tanh();
    outs.push_back(std::move(a));
    cur = &outs.back();
  }
}

inline double full_data_mse(const std::vector<AffineLayer>& layers,
                            const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> outs;
  forward_batch(layers, x, outs);
  return (outs.back() - x).squaredNorm() / static_cast<double>(x.size());
}

}  // namespace detail

// Minibatch reconstruction training of an autoencoder on `samples`
// (rows = observations). Deterministic given cfg.seed. The per-coordinate
// standardization used during training is folded back into the first
// encoder and last decoder layer, so callers see the original scale.
inline Autoencoder train_autoencoder(const Eigen::MatrixXd& samples,
                                     const ArchSpec& arch,
                                     const TrainConfig& cfg,
                                     TrainReport* report = nullptr) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (arch.encoder_dims.front() != d || arch.decoder_dims.back() != d)
    throw std::invalid_argument("architecture ambient dim does not match data");
  if (arch.encoder_dims.back() != arch.decoder_dims.front())
    throw std::invalid_argument("architecture latent dims do not match");
  if (arch.encoder_dims.back() >= d)
    throw std::invalid_argument("latent dimension must be smaller than D");
  if (cfg.batch_size < 1 || cfg.batch_size > n)
    throw std::invalid_argument("batch size must be in [1, n]");
  if (cfg.learning_rate <= 0.0)
    throw std::invalid_argument("learning rate must be positive");
  if (cfg.standardize &&
      arch.decoder_acts.back() != Activation::identity)
    throw std::invalid_argument(
        "standardization requires a linear decoder output layer");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(d);
  if (cfg.standardize) {
    mean = samples.colwise().mean();
    for (Eigen::Index j = 0; j < d; ++j) {
      double s = std::sqrt((samples.col(j).array() - mean[j]).square().mean());
      scale[j] = s > 1e-12 ? s : 1.0;
    }
  }
  // columns = samples, standardized
  Eigen::MatrixXd x = ((samples.rowwise() - mean.transpose()).array().rowwise() /
                       scale.transpose().array())
                          .transpose();

  RngStream rng(cfg.seed);
  std::vector<AffineLayer> layers =
      detail::init_layers(arch.encoder_dims, arch.encoder_acts, rng);
  {
    auto dec = detail::init_layers(arch.decoder_dims, arch.decoder_acts, rng);
    layers.insert(layers.end(), dec.begin(), dec.end());
  }
  const std::size_t n_layers = layers.size();
  const std::size_t n_enc = arch.encoder_dims.size() - 1;

  std::vector<detail::AdamState> adam(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    adam[l].mw = Eigen::MatrixXd::Zero(layers[l].weight.rows(), layers[l].weight.cols());
    adam[l].vw = adam[l].mw;
    adam[l].mb = Eigen::VectorXd::Zero(layers[l].bias.size());
    adam[l].vb = adam[l].mb;
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  std::vector<Eigen::MatrixXd> outs;
  long step = 0;
  if (report) report->epoch_mse.clear();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd batch(d, b);
      for (Eigen::Index k = 0; k < b; ++k)
        batch.col(k) = x.col(order[start + k]);

      detail::forward_batch(layers, batch, outs);

      // dLoss/d(output) for loss = |out - batch|^2 / (b * d)
      Eigen::MatrixXd delta =
          2.0 * (outs.back() - batch) / static_cast<double>(b * d);

      std::vector<detail::LayerGrads> grads(n_layers);
      for (std::size_t li = n_layers; li-- > 0;) {
        const Eigen::MatrixXd& out = outs[li];
        const Eigen::MatrixXd& in = li == 0 ? batch : outs[li - 1];
        if (layers[li].activation == Activation::tanh_act)
          delta.array() *= (1.0 - out.array().square());
        grads[li].dw = delta * in.transpose();
        grads[li].db = delta.rowwise().sum();
        if (li > 0) delta = layers[li].weight.transpose() * delta;
      }

      ++step;
      for (std::size_t li = 0; li < n_layers; ++li) {
        auto& l = layers[li];
        auto& g = grads[li];
        if (cfg.optimizer == Optimizer::sgd) {
          l.weight -= cfg.learning_rate * g.dw;
          l.bias -= cfg.learning_rate * g.db;
        } else {
          auto& s = adam[li];
          const auto& ap = cfg.adam;
          s.mw = ap.beta1 * s.mw + (1.0 - ap.beta1) * g.dw;
          s.vw = ap.beta2 * s.vw.array().matrix() +
                 (1.0 - ap.beta2) * g.dw.array().square().matrix();
          s.mb = ap.beta1 * s.mb + (1.0 - ap.beta1) * g.db;
          s.vb = ap.beta2 * s.vb.array().matrix() +
                 (1.0 - ap.beta2) * g.db.array().square().matrix();
          double c1 = 1.0 - std::pow(ap.beta1, step);
          double c2 = 1.0 - std::pow(ap.beta2, step);
          l.weight.array() -= cfg.learning_rate * (s.mw.array() / c1) /
                              ((s.vw.array() / c2).sqrt() + ap.eps);
          l.bias.array() -= cfg.learning_rate * (s.mb.array() / c1) /
                            ((s.vb.array() / c2).sqrt() + ap.eps);
        }
      }
    }

    double mse = detail::full_data_mse(layers, x);
    if (!std::isfinite(mse))
      throw std::runtime_error(
          "training diverged (non-finite loss); lower the learning rate");
    if (report) report->epoch_mse.push_back(mse);
  }

  if (report && !report->epoch_mse.empty())
    report->final_mse = report->epoch_mse.back();

  std::vector<AffineLayer> enc(layers.begin(), layers.begin() + n_enc);
  std::vector<AffineLayer> dec(layers.begin() + n_enc, layers.end());

  if (cfg.standardize) {
    // encode(x) must equal trained_encoder((x - mean) / scale)
    Eigen::VectorXd inv_scale = scale.cwiseInverse();
    enc.front().bias -= enc.front().weight * (mean.cwiseProduct(inv_scale));
    enc.front().weight = enc.front().weight * inv_scale.asDiagonal();
    // decode(z) must equal scale * trained_decoder(z) + mean
    dec.back().weight = scale.asDiagonal() * dec.back().weight;
    dec.back().bias = scale.cwiseProduct(dec.back().bias) + mean;
  }

  Autoencoder ae(std::move(enc), std::move(dec));
  ae.set_standardization(mean, scale);
  return ae;
}

}  // namespace aemc
