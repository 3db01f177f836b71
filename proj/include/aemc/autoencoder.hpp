#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include <json.hpp>

namespace aemc {

enum class Activation { identity, tanh_act };

inline std::string activation_name(Activation a) {
  return a == Activation::identity ? "identity" : "tanh";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh_act;
  throw std::invalid_argument("unknown activation tag: " + s);
}

// One fully connected layer: x -> act(W x + b).
struct AffineLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::identity;

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    Eigen::VectorXd a = weight * x + bias;
    if (activation == Activation::tanh_act) a = a.array().tanh();
    return a;
  }
};

// Encoder phi (D -> r) and decoder psi (r -> D) as stacks of affine layers.
// Immutable once built; shared across chains.
class Autoencoder {
 public:
  Autoencoder(std::vector<AffineLayer> encoder, std::vector<AffineLayer> decoder)
      : enc_(std::move(encoder)), dec_(std::move(decoder)) {
    if (enc_.empty() || dec_.empty())
      throw std::invalid_argument("encoder and decoder need at least one layer");
    for (std::size_t i = 0; i + 1 < enc_.size(); ++i)
      if (enc_[i].out_dim() != enc_[i + 1].in_dim())
        throw std::invalid_argument("encoder layer dimensions do not chain");
    for (std::size_t i = 0; i + 1 < dec_.size(); ++i)
      if (dec_[i].out_dim() != dec_[i + 1].in_dim())
        throw std::invalid_argument("decoder layer dimensions do not chain");
    if (enc_.front().in_dim() != dec_.back().out_dim())
      throw std::invalid_argument("ambient dims of encoder/decoder differ");
    if (enc_.back().out_dim() != dec_.front().in_dim())
      throw std::invalid_argument("latent dims of encoder/decoder differ");
  }

  Eigen::Index ambient_dim() const { return enc_.front().in_dim(); }
  Eigen::Index latent_dim() const { return enc_.back().out_dim(); }

  const std::vector<AffineLayer>& encoder_layers() const { return enc_; }
  const std::vector<AffineLayer>& decoder_layers() const { return dec_; }

  Eigen::VectorXd encode(const Eigen::VectorXd& x) const {
    if (x.size() != ambient_dim())
      throw std::invalid_argument("encode: dimension mismatch");
    Eigen::VectorXd v = x;
    for (const auto& l : enc_) v = l.forward(v);
    return v;
  }

  Eigen::VectorXd decode(const Eigen::VectorXd& z) const {
    if (z.size() != latent_dim())
      throw std::invalid_argument("decode: dimension mismatch");
    Eigen::VectorXd v = z;
    for (const auto& l : dec_) v = l.forward(v);
    return v;
  }

  // Decoder with the output-layer bias dropped; used on the momentum path so
  // that K_h(0) = 0 and the latent kinetic gradient matches its closed form.
  Eigen::VectorXd decode_momentum(const Eigen::VectorXd& z) const {
    if (z.size() != latent_dim())
      throw std::invalid_argument("decode_momentum: dimension mismatch");
    Eigen::VectorXd v = z;
    for (std::size_t i = 0; i + 1 < dec_.size(); ++i) v = dec_[i].forward(v);
    const AffineLayer& last = dec_.back();
    Eigen::VectorXd a = last.weight * v;
    if (last.activation == Activation::tanh_act) a = a.array().tanh();
    return a;
  }

  Eigen::MatrixXd encoder_jacobian(const Eigen::VectorXd& x) const {
    if (x.size() != ambient_dim())
      throw std::invalid_argument("encoder_jacobian: dimension mismatch");
    return chain_jacobian(enc_, x);
  }

  Eigen::MatrixXd decoder_jacobian(const Eigen::VectorXd& z) const {
    if (z.size() != latent_dim())
      throw std::invalid_argument("decoder_jacobian: dimension mismatch");
    return chain_jacobian(dec_, z);
  }

  // Identity map with r = D; AE-HMC with this autoencoder reproduces HMC.
  static Autoencoder identity(Eigen::Index d) {
    AffineLayer l{Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d),
                  Activation::identity};
    return Autoencoder({l}, {l});
  }

  // Per-coordinate standardization of the training data, kept for the record;
  // it is already folded into the first encoder / last decoder layer.
  void set_standardization(Eigen::VectorXd mean, Eigen::VectorXd scale) {
    std_mean_ = std::move(mean);
    std_scale_ = std::move(scale);
  }
  const Eigen::VectorXd& standardization_mean() const { return std_mean_; }
  const Eigen::VectorXd& standardization_scale() const { return std_scale_; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["ambient_dim"] = ambient_dim();
    j["latent_dim"] = latent_dim();
    j["encoder"] = layers_to_json(enc_);
    j["decoder"] = layers_to_json(dec_);
    j["standardization_mean"] = vector_to_json(std_mean_);
    j["standardization_scale"] = vector_to_json(std_scale_);
    return j;
  }

  static Autoencoder from_json(const nlohmann::json& j) {
    Autoencoder ae(layers_from_json(j.at("encoder")),
                   layers_from_json(j.at("decoder")));
    ae.std_mean_ = vector_from_json(j.at("standardization_mean"));
    ae.std_scale_ = vector_from_json(j.at("standardization_scale"));
    return ae;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_json().dump(2) << "\n";
  }

  static Autoencoder load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }

 private:
  static Eigen::MatrixXd chain_jacobian(const std::vector<AffineLayer>& layers,
                                        const Eigen::VectorXd& x0) {
    Eigen::VectorXd x = x0;
    Eigen::MatrixXd jac =
        Eigen::MatrixXd::Identity(layers.front().in_dim(), layers.front().in_dim());
    for (const auto& l : layers) {
      Eigen::VectorXd a = l.weight * x + l.bias;
      if (l.activation == Activation::tanh_act) {
        Eigen::VectorXd t = a.array().tanh();
        Eigen::VectorXd d = 1.0 - t.array().square();
        jac = d.asDiagonal() * (l.weight * jac);
        x = t;
      } else {
        jac = l.weight * jac;
        x = a;
      }
    }
    return jac;
  }

  static nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  }

  static Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
  }

  static nlohmann::json layers_to_json(const std::vector<AffineLayer>& layers) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& l : layers) {
      nlohmann::json jl;
      jl["rows"] = l.weight.rows();
      jl["cols"] = l.weight.cols();
      jl["activation"] = activation_name(l.activation);
      nlohmann::json w = nlohmann::json::array();
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
        for (Eigen::Index k = 0; k < l.weight.cols(); ++k)
          w.push_back(l.weight(i, k));  // row-major
      jl["weight"] = std::move(w);
      jl["bias"] = vector_to_json(l.bias);
      out.push_back(std::move(jl));
    }
    return out;
  }

  static std::vector<AffineLayer> layers_from_json(const nlohmann::json& arr) {
    std::vector<AffineLayer> layers;
    for (const auto& jl : arr) {
      AffineLayer l;
      Eigen::Index rows = jl.at("rows").get<Eigen::Index>();
      Eigen::Index cols = jl.at("cols").get<Eigen::Index>();
      l.weight.resize(rows, cols);
      const auto& w = jl.at("weight");
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k)
          l.weight(i, k) = w[static_cast<std::size_t>(i * cols + k)].get<double>();
      l.bias = vector_from_json(jl.at("bias"));
      l.activation = activation_from_name(jl.at("activation").get<std::string>());
      layers.push_back(std::move(l));
    }
    return layers;
  }

  std::vector<AffineLayer> enc_;
  std::vector<AffineLayer> dec_;
  Eigen::VectorXd std_mean_;
  Eigen::VectorXd std_scale_;
};

}  // namespace aemc
