#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "aemc/autoencoder.hpp"
#include "aemc/gramian.hpp"
#include "aemc/latent.hpp"
#include "aemc/rng.hpp"
#include "aemc/targets.hpp"

namespace aemc {

// |dH| above this (or any non-finite value) marks the trajectory divergent;
// divergent proposals are rejected.
inline constexpr double kDivergenceThreshold = 1000.0;

struct SamplerConfig {
  double step_size = 0.1;
  int n_leapfrog = 10;
  Eigen::VectorXd mass_diag;  // empty -> identity
  bool volume_correction = true;
  double pcn_step = 1.0;  // h in rho = (1 - h/4)/(1 + h/4)
  std::uint64_t seed = 0;

  Eigen::VectorXd mass_or_identity(Eigen::Index d) const {
    if (mass_diag.size() == 0) return Eigen::VectorXd::Ones(d);
    if (mass_diag.size() != d)
      throw std::invalid_argument("mass matrix dimension mismatch");
    if (mass_diag.minCoeff() <= 0.0)
      throw std::invalid_argument("mass matrix must be positive definite");
    return mass_diag;
  }

  void validate() const {
    if (step_size <= 0.0) throw std::invalid_argument("step size must be > 0");
    if (n_leapfrog < 1) throw std::invalid_argument("n_leapfrog must be >= 1");
  }
};

struct PhaseState {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
};

struct StepOutcome {
  Eigen::VectorXd next;      // accepted ? proposal : input state
  Eigen::VectorXd proposal;  // q*
  bool accepted = false;
  bool divergent = false;
  double log_rho = 0.0;
  double h_start = 0.0;
  double h_end = 0.0;
  double log_volume_factor = 0.0;  // 0 when the correction is off
  double u = 0.0;                  // logged MH uniform
};

inline double kinetic(const Eigen::VectorXd& p, const Eigen::VectorXd& mass_diag) {
  if (p.size() != mass_diag.size())
    throw std::invalid_argument("kinetic: dimension mismatch");
  return 0.5 * (p.array().square() / mass_diag.array()).sum();
}

// L leapfrog steps (half-kick, drift, half-kick) of the ambient dynamics.
// Sets *divergent on non-finite intermediates instead of throwing.
inline PhaseState leapfrog_ambient(const Target& target, PhaseState s,
                                   double eps, int L,
                                   const Eigen::VectorXd& mass_diag,
                                   bool* divergent = nullptr) {
  if (divergent) *divergent = false;
  for (int i = 0; i < L; ++i) {
    s.p -= 0.5 * eps * target.gradient(s.q);
    s.q += eps * (s.p.array() / mass_diag.array()).matrix();
    s.p -= 0.5 * eps * target.gradient(s.q);
    if (!s.q.allFinite() || !s.p.allFinite()) {
      if (divergent) *divergent = true;
      return s;
    }
  }
  return s;
}

// Same scheme in the latent space: dq_h/dt = grad K_h, dp_h/dt = -grad U_h.
inline PhaseState leapfrog_latent(const LatentDynamics& dyn, PhaseState s,
                                  double eps, int L, bool* divergent = nullptr) {
  if (divergent) *divergent = false;
  for (int i = 0; i < L; ++i) {
    s.p -= 0.5 * eps * dyn.grad_U(s.q);
    s.q += eps * dyn.grad_K(s.p);
    s.p -= 0.5 * eps * dyn.grad_U(s.q);
    if (!s.q.allFinite() || !s.p.allFinite()) {
      if (divergent) *divergent = true;
      return s;
    }
  }
  return s;
}

namespace detail {

inline void finish_metropolis(StepOutcome& out, const Eigen::VectorXd& current,
                              RngStream& rng) {
  out.u = rng.uniform();
  out.accepted = !out.divergent && out.u < std::min(1.0, std::exp(out.log_rho));
  out.next = out.accepted ? out.proposal : current;
}

inline bool is_divergent(double h_start, double h_end) {
  return !std::isfinite(h_start) || !std::isfinite(h_end) ||
         std::abs(h_end - h_start) > kDivergenceThreshold;
}

}  // namespace detail

inline StepOutcome hmc_step(const Target& target, const Eigen::VectorXd& q,
                            const SamplerConfig& cfg, RngStream& rng) {
  cfg.validate();
  Eigen::VectorXd mass = cfg.mass_or_identity(target.dim());
  Eigen::VectorXd p = rng.normal_vector(target.dim());
  p.array() *= mass.array().sqrt();

  StepOutcome out;
  out.h_start = target.potential(q) + kinetic(p, mass);
  bool div = false;
  PhaseState end = leapfrog_ambient(target, {q, p}, cfg.step_size,
                                    cfg.n_leapfrog, mass, &div);
  out.proposal = end.q;
  if (div) {
    out.divergent = true;
    out.h_end = std::numeric_limits<double>::quiet_NaN();
    out.log_rho = -std::numeric_limits<double>::infinity();
  } else {
    out.h_end = target.potential(end.q) + kinetic(end.p, mass);
    out.divergent = detail::is_divergent(out.h_start, out.h_end);
    out.log_rho = out.divergent ? -std::numeric_limits<double>::infinity()
                                : out.h_start - out.h_end;
  }
  detail::finish_metropolis(out, q, rng);
  return out;
}

inline StepOutcome rwm_step(const Target& target, const Eigen::VectorXd& q,
                            double proposal_sd, RngStream& rng) {
  if (proposal_sd < 0.0)
    throw std::invalid_argument("proposal sd must be non-negative");
  StepOutcome out;
  out.proposal = q + proposal_sd * rng.normal_vector(target.dim());
  out.h_start = target.potential(q);
  out.h_end = target.potential(out.proposal);
  out.divergent = detail::is_divergent(out.h_start, out.h_end);
  out.log_rho = out.divergent ? -std::numeric_limits<double>::infinity()
                              : out.h_start - out.h_end;
  detail::finish_metropolis(out, q, rng);
  return out;
}

// Log of the endpoint volume factor in the acceptance ratio: the phase-space
// Jacobians are block-diagonal in (q, p), so each Gramian splits into a
// position and a momentum block.
inline double ae_hmc_log_volume(const Autoencoder& ae,
                                const Eigen::VectorXd& q_v,
                                const Eigen::VectorXd& p_v,
                                const Eigen::VectorXd& q_h_end,
                                const Eigen::VectorXd& p_h_end) {
  return log_gramian_volume(ae.decoder_jacobian(q_h_end)) +
         log_gramian_volume(ae.decoder_jacobian(p_h_end)) +
         log_gramian_volume(ae.encoder_jacobian(q_v)) +
         log_gramian_volume(ae.encoder_jacobian(p_v));
}

// One AE-HMC transition: encode position and momentum, run leapfrog in the
// latent space, decode, and accept with the (optionally volume-corrected)
// Metropolis ratio.
//
// q_h_io, when given, carries the latent position across steps. Without it
// the current latent point is re-derived as encode(q_v) every call, which is
// only correct when encode(decode(.)) is the identity on the latent space
// (identity or PCA autoencoders). For trained autoencoders the re-encoding
// drifts and the chain must keep its latent state.
inline StepOutcome ae_hmc_step(const Target& target, const Autoencoder& ae,
                               const LatentDynamics& dyn,
                               const Eigen::VectorXd& q_v,
                               const SamplerConfig& cfg, RngStream& rng,
                               Eigen::VectorXd* q_h_io = nullptr) {
  cfg.validate();
  if (ae.ambient_dim() != target.dim())
    throw std::invalid_argument("autoencoder ambient dim != target dim");
  Eigen::VectorXd mass = cfg.mass_or_identity(target.dim());
  Eigen::VectorXd p_v = rng.normal_vector(target.dim());
  p_v.array() *= mass.array().sqrt();

  StepOutcome out;
  out.h_start = target.potential(q_v) + kinetic(p_v, mass);

  Eigen::VectorXd q_h = q_h_io && q_h_io->size() == ae.latent_dim()
                            ? *q_h_io
                            : ae.encode(q_v);
  Eigen::VectorXd p_h = ae.encode(p_v);
  bool div = false;
  PhaseState end =
      leapfrog_latent(dyn, {q_h, p_h}, cfg.step_size, cfg.n_leapfrog, &div);

  if (div) {
    out.proposal = q_v;
    out.divergent = true;
    out.h_end = std::numeric_limits<double>::quiet_NaN();
    out.log_rho = -std::numeric_limits<double>::infinity();
    detail::finish_metropolis(out, q_v, rng);
    if (q_h_io) *q_h_io = q_h;
    return out;
  }

  Eigen::VectorXd q_v_star = ae.decode(end.q);
  Eigen::VectorXd p_v_star = ae.decode_momentum(end.p);
  out.proposal = q_v_star;
  out.h_end = target.potential(q_v_star) + kinetic(p_v_star, mass);
  out.divergent = detail::is_divergent(out.h_start, out.h_end);
  if (out.divergent) {
    out.log_rho = -std::numeric_limits<double>::infinity();
  } else {
    out.log_rho = out.h_start - out.h_end;
    if (cfg.volume_correction) {
      try {
        out.log_volume_factor = ae_hmc_log_volume(ae, q_v, p_v, end.q, end.p);
        out.log_rho += out.log_volume_factor;
      } catch (const DegenerateVolumeError&) {
        out.divergent = true;
        out.log_rho = -std::numeric_limits<double>::infinity();
      }
    }
  }
  detail::finish_metropolis(out, q_v, rng);
  if (q_h_io) *q_h_io = out.accepted ? end.q : q_h;
  return out;
}

// Negate-momentum round trip through the deterministic part of the AE-HMC
// proposal. Returns the sup-norm defect against (q_v, -p_v); ~1e-16..1e-8
// when the autoencoder round-trips the visited points exactly, and of the
// order of the reconstruction error otherwise.
inline double reversibility_defect(const Target& target, const Autoencoder& ae,
                                   const Eigen::VectorXd& q_v,
                                   const Eigen::VectorXd& p_v,
                                   const SamplerConfig& cfg) {
  cfg.validate();
  Eigen::VectorXd mass = cfg.mass_or_identity(target.dim());
  LatentDynamics dyn(target, ae, mass);
  auto propose = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& p) {
    PhaseState end = leapfrog_latent(dyn, {ae.encode(q), ae.encode(p)},
                                     cfg.step_size, cfg.n_leapfrog);
    return PhaseState{ae.decode(end.q), ae.decode_momentum(end.p)};
  };
  PhaseState fwd = propose(q_v, p_v);
  PhaseState back = propose(fwd.q, -fwd.p);
  double dq = (back.q - q_v).cwiseAbs().maxCoeff();
  double dp = (back.p + p_v).cwiseAbs().maxCoeff();
  return std::max(dq, dp);
}

}  // namespace aemc
