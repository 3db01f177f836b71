#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "aemc/autoencoder.hpp"
#include "aemc/gp.hpp"
#include "aemc/gramian.hpp"
#include "aemc/hmc.hpp"
#include "aemc/rng.hpp"

namespace aemc {

inline double pcn_rho(double h) { return (1.0 - h / 4.0) / (1.0 + h / 4.0); }

// Preconditioned Crank-Nicolson step: q* = rho q + sqrt(1 - rho^2) p with
// p ~ N(0, C). Prior-reversible, so the ratio involves the misfit only.
inline StepOutcome pcn_step(const GpLinearInverseTarget& target,
                            const Eigen::VectorXd& q, const SamplerConfig& cfg,
                            RngStream& rng) {
  if (cfg.pcn_step < 0.0)
    throw std::invalid_argument("pCN step size must be non-negative");
  double rho = pcn_rho(cfg.pcn_step);
  Eigen::VectorXd p = target.prior_sample(rng);

  StepOutcome out;
  out.proposal = rho * q + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * p;
  out.h_start = target.misfit(q);
  out.h_end = target.misfit(out.proposal);
  out.divergent = !std::isfinite(out.h_start) || !std::isfinite(out.h_end);
  out.log_rho = out.divergent ? -std::numeric_limits<double>::infinity()
                              : out.h_start - out.h_end;
  detail::finish_metropolis(out, q, rng);
  return out;
}

// Reference measure of the latent pCN proposal: empirical mean and covariance
// of the encoded warm-up samples, with identity fallback when the
// factorization fails (degenerate warm-up). The mean matters: a trained
// encoder maps the posterior to a latent cloud far from the origin, and a
// zero-centered reference would pull every proposal away from it.
class LatentGaussian {
 public:
  explicit LatentGaussian(Eigen::Index dim)
      : mean_(Eigen::VectorXd::Zero(dim)),
        cov_(Eigen::MatrixXd::Identity(dim, dim)) {
    llt_.compute(cov_);
  }

  static LatentGaussian from_covariance(Eigen::MatrixXd cov) {
    LatentGaussian g(cov.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("latent covariance is not positive definite");
    g.cov_ = std::move(cov);
    g.llt_ = std::move(llt);
    return g;
  }

  static LatentGaussian from_samples(const Eigen::MatrixXd& encoded) {
    const Eigen::Index n = encoded.rows();
    const Eigen::Index r = encoded.cols();
    if (n < 2) return LatentGaussian(r);
    Eigen::VectorXd mean = encoded.colwise().mean();
    Eigen::MatrixXd centered = encoded.rowwise() - mean.transpose();
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);
    cov.diagonal().array() += 1e-10 * cov.diagonal().maxCoeff();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) return LatentGaussian(r);
    LatentGaussian g(r);
    g.mean_ = std::move(mean);
    g.cov_ = std::move(cov);
    g.llt_ = std::move(llt);
    return g;
  }

  Eigen::Index dim() const { return cov_.rows(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  // zero-mean fluctuation with the reference covariance
  Eigen::VectorXd sample(RngStream& rng) const {
    return llt_.matrixL() * rng.normal_vector(dim());
  }

  double quadratic(const Eigen::VectorXd& x) const {
    Eigen::VectorXd c = x - mean_;
    return c.dot(llt_.solve(c));
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// AE-pCN: pCN proposal in the latent space under the reference measure
// N(0, C_h), decoded and accepted against the ambient posterior. The
// Gaussian proposal-density ratio reduces to the difference of the two
// C_h-quadratic forms, so with the identity autoencoder and C_h = C this
// step coincides with pcn_step.
// q_h_io, when given, carries the latent position across steps (see
// ae_hmc_step: re-encoding every call is only exact when encode(decode(.)) is
// the identity on the latent space).
inline StepOutcome ae_pcn_step(const Target& target, const Autoencoder& ae,
                               const LatentGaussian& latent_ref,
                               const Eigen::VectorXd& q_v,
                               const SamplerConfig& cfg, RngStream& rng,
                               Eigen::VectorXd* q_h_io = nullptr) {
  if (cfg.pcn_step < 0.0)
    throw std::invalid_argument("pCN step size must be non-negative");
  if (ae.ambient_dim() != target.dim())
    throw std::invalid_argument("autoencoder ambient dim != target dim");
  double rho = pcn_rho(cfg.pcn_step);

  Eigen::VectorXd q_h = q_h_io && q_h_io->size() == ae.latent_dim()
                            ? *q_h_io
                            : ae.encode(q_v);
  Eigen::VectorXd zeta = latent_ref.sample(rng);
  Eigen::VectorXd q_h_star =
      latent_ref.mean() + rho * (q_h - latent_ref.mean()) +
      std::sqrt(std::max(0.0, 1.0 - rho * rho)) * zeta;

  StepOutcome out;
  out.proposal = ae.decode(q_h_star);
  out.h_start = target.potential(q_v);
  out.h_end = target.potential(out.proposal);
  out.divergent = !std::isfinite(out.h_start) || !std::isfinite(out.h_end);
  if (out.divergent) {
    out.log_rho = -std::numeric_limits<double>::infinity();
  } else {
    out.log_rho = out.h_start - out.h_end +
                  0.5 * latent_ref.quadratic(q_h_star) -
                  0.5 * latent_ref.quadratic(q_h);
    if (cfg.volume_correction) {
      try {
        out.log_volume_factor = log_gramian_volume(ae.decoder_jacobian(q_h_star)) +
                                log_gramian_volume(ae.encoder_jacobian(q_v));
        out.log_rho += out.log_volume_factor;
      } catch (const DegenerateVolumeError&) {
        out.divergent = true;
        out.log_rho = -std::numeric_limits<double>::infinity();
      }
    }
  }
  detail::finish_metropolis(out, q_v, rng);
  if (q_h_io) *q_h_io = out.accepted ? q_h_star : q_h;
  return out;
}

}  // namespace aemc
