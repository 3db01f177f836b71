#pragma once

#include <atomic>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "aemc/autoencoder.hpp"
#include "aemc/targets.hpp"

namespace aemc {

// Pullback of the ambient potential gradient through the decoder:
// grad U_h(z) = (d psi / d z)^T grad U_v(psi(z)).
inline Eigen::VectorXd latent_grad_U(const Target& target, const Autoencoder& ae,
                                     const Eigen::VectorXd& z) {
  return ae.decoder_jacobian(z).transpose() * target.gradient(ae.decode(z));
}

// Latent kinetic energy K_h(p_h) = psi0(p_h)' M^-1 psi0(p_h) / 2 with psi0
// the decoder without its output bias.
inline double latent_kinetic(const Autoencoder& ae, const Eigen::VectorXd& p_h,
                             const Eigen::VectorXd& mass_diag) {
  Eigen::VectorXd pv = ae.decode_momentum(p_h);
  return 0.5 * (pv.array().square() / mass_diag.array()).sum();
}

inline Eigen::VectorXd latent_grad_K(const Autoencoder& ae,
                                     const Eigen::VectorXd& p_h,
                                     const Eigen::VectorXd& mass_diag) {
  Eigen::VectorXd pv = ae.decode_momentum(p_h);
  return ae.decoder_jacobian(p_h).transpose() *
         (pv.array() / mass_diag.array()).matrix();
}

// Gradient/energy evaluations for leapfrog in the latent space.
//
// The generic path pulls the ambient gradient back through the decoder
// Jacobian. For the decoder forms the experiments use (a single linear
// output layer, optionally behind one tanh hidden layer) the quadratic
// forms D2' M^-1 D2, D2' D2 and X D2 are precomputed, so a latent gradient
// evaluation costs O(N r) instead of O(N D) for the logistic target.
class LatentDynamics {
 public:
  LatentDynamics(const Target& target, const Autoencoder& ae,
                 Eigen::VectorXd mass_diag)
      : target_(target), ae_(ae), mass_(std::move(mass_diag)) {
    if (ae_.ambient_dim() != target_.dim())
      throw std::invalid_argument("autoencoder ambient dim != target dim");
    if (mass_.size() != target_.dim())
      throw std::invalid_argument("mass matrix dim != target dim");

    const auto& dec = ae_.decoder_layers();
    if (dec.size() == 1 && dec[0].activation == Activation::identity) {
      form_ = DecoderForm::linear;
    } else if (dec.size() == 2 && dec[0].activation == Activation::tanh_act &&
               dec[1].activation == Activation::identity) {
      form_ = DecoderForm::tanh_hidden;
    } else {
      form_ = DecoderForm::generic;
    }

    if (form_ != DecoderForm::generic) {
      const AffineLayer& out = dec.back();
      d2_minv_d2_ = out.weight.transpose() *
                    (mass_.cwiseInverse().asDiagonal() * out.weight);
      const auto* logistic =
          dynamic_cast<const LogisticRegressionTarget*>(&target_);
      if (logistic != nullptr) {
        logistic_ = logistic;
        xd2_ = logistic->design() * out.weight;         // N x (r or hidden)
        xb2_ = logistic->design() * out.bias;           // N
        d2t_d2_ = out.weight.transpose() * out.weight;  // gram of D2
        d2t_b2_ = out.weight.transpose() * out.bias;
        b2_sq_ = out.bias.squaredNorm();
        xty_ = xd2_.transpose() * logistic->labels();
      }
    }
  }

  const Eigen::VectorXd& mass_diag() const { return mass_; }
  const Autoencoder& autoencoder() const { return ae_; }
  bool has_fast_potential() const { return logistic_ != nullptr; }

  std::uint64_t latent_grad_evals() const {
    return grad_evals_.load(std::memory_order_relaxed);
  }

  double potential(const Eigen::VectorXd& z) const {
    if (logistic_ != nullptr) {
      Eigen::VectorXd t = hidden(z);
      Eigen::VectorXd s = xd2_ * t + xb2_;  // X q_v
      double qv_sq = t.dot(d2t_d2_ * t) + 2.0 * d2t_b2_.dot(t) + b2_sq_;
      double u = 0.5 * qv_sq / logistic_->prior_variance() -
                 logistic_->labels().dot(s);
      for (Eigen::Index i = 0; i < s.size(); ++i) u += log1p_exp(s[i]);
      return u;
    }
    return target_.potential(ae_.decode(z));
  }

  Eigen::VectorXd grad_U(const Eigen::VectorXd& z) const {
    grad_evals_.fetch_add(1, std::memory_order_relaxed);
    if (logistic_ != nullptr) {
      Eigen::VectorXd t = hidden(z);
      Eigen::VectorXd s = xd2_ * t + xb2_;
      Eigen::VectorXd probs(s.size());
      for (Eigen::Index i = 0; i < s.size(); ++i) probs[i] = sigmoid(s[i]);
      // D2-side gradient; prior + likelihood, all in the reduced dimension
      Eigen::VectorXd inner =
          (d2t_d2_ * t + d2t_b2_) / logistic_->prior_variance() - xty_ +
          xd2_.transpose() * probs;
      return chain_to_latent(z, t, inner);
    }
    return latent_grad_U(target_, ae_, z);
  }

  Eigen::VectorXd grad_K(const Eigen::VectorXd& p_h) const {
    switch (form_) {
      case DecoderForm::linear:
        return d2_minv_d2_ * p_h;
      case DecoderForm::tanh_hidden: {
        const AffineLayer& h = ae_.decoder_layers().front();
        Eigen::VectorXd t = (h.weight * p_h + h.bias).array().tanh();
        Eigen::VectorXd inner = d2_minv_d2_ * t;
        return h.weight.transpose() *
               ((1.0 - t.array().square()) * inner.array()).matrix();
      }
      case DecoderForm::generic:
        return latent_grad_K(ae_, p_h, mass_);
    }
    throw std::logic_error("unreachable");
  }

  double kinetic(const Eigen::VectorXd& p_h) const {
    if (form_ == DecoderForm::linear) return 0.5 * p_h.dot(d2_minv_d2_ * p_h);
    return latent_kinetic(ae_, p_h, mass_);
  }

 private:
  enum class DecoderForm { linear, tanh_hidden, generic };

  // Output of the layer feeding the decoder's linear output layer,
  // with the momentum-path convention (no output bias involved here).
  Eigen::VectorXd hidden(const Eigen::VectorXd& z) const {
    if (form_ == DecoderForm::linear) return z;
    const AffineLayer& h = ae_.decoder_layers().front();
    return (h.weight * z + h.bias).array().tanh();
  }

  Eigen::VectorXd chain_to_latent(const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& t,
                                  const Eigen::VectorXd& inner) const {
    if (form_ == DecoderForm::linear) return inner;
    const AffineLayer& h = ae_.decoder_layers().front();
    return h.weight.transpose() *
           ((1.0 - t.array().square()) * inner.array()).matrix();
  }

  const Target& target_;
  const Autoencoder& ae_;
  Eigen::VectorXd mass_;
  DecoderForm form_ = DecoderForm::generic;
  const LogisticRegressionTarget* logistic_ = nullptr;

  Eigen::MatrixXd d2_minv_d2_;
  Eigen::MatrixXd xd2_;
  Eigen::VectorXd xb2_;
  Eigen::MatrixXd d2t_d2_;
  Eigen::VectorXd d2t_b2_;
  Eigen::VectorXd xty_;
  double b2_sq_ = 0.0;

  mutable std::atomic<std::uint64_t> grad_evals_{0};
};

}  // namespace aemc
