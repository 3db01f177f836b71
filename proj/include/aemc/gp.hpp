#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "aemc/rng.hpp"
#include "aemc/targets.hpp"

namespace aemc {

// Linearized Bayesian inverse problem on a regular m x m grid over [0,1]^2.
// Prior: u ~ N(0, C) with exponential kernel
//   c(s,s') = sigma_u^2 exp(-|s-s'| / (2 s0)),
// observations y = O u + eta at a fixed set of sensor nodes,
// eta ~ N(0, noise_sd^2 I).
class GpLinearInverseTarget final : public Target {
 public:
  GpLinearInverseTarget(int grid_side, double sigma_u, double s0,
                        std::vector<int> sensors, Eigen::VectorXd obs,
                        double noise_sd, double jitter_scale = 1e-8)
      : Target(static_cast<Eigen::Index>(grid_side) * grid_side),
        grid_side_(grid_side),
        sigma_u_(sigma_u),
        s0_(s0),
        sensors_(std::move(sensors)),
        obs_(std::move(obs)),
        noise_sd_(noise_sd) {
    if (grid_side < 2) throw std::invalid_argument("grid side must be >= 2");
    if (sigma_u <= 0.0 || s0 <= 0.0)
      throw std::invalid_argument("kernel parameters must be positive");
    if (obs_.size() != static_cast<Eigen::Index>(sensors_.size()))
      throw std::invalid_argument("observation count does not match sensors");
    if (!sensors_.empty() && noise_sd_ <= 0.0)
      throw std::invalid_argument("noise sd must be positive");
    for (int s : sensors_)
      if (s < 0 || s >= dim())
        throw std::invalid_argument("sensor index out of range");

    coords_ = node_coordinates(grid_side);
    prior_cov_ = Eigen::MatrixXd(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        double d = (coords_.row(i) - coords_.row(j)).norm();
        double c = sigma_u * sigma_u * std::exp(-d / (2.0 * s0));
        prior_cov_(i, j) = c;
        prior_cov_(j, i) = c;
      }
    prior_cov_.diagonal().array() += jitter_scale * sigma_u * sigma_u;
    llt_.compute(prior_cov_);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error(
          "prior covariance factorization failed; raise the jitter");
  }

  int grid_side() const { return grid_side_; }
  double sigma_u() const { return sigma_u_; }
  double s0() const { return s0_; }
  double noise_sd() const { return noise_sd_; }
  const std::vector<int>& sensors() const { return sensors_; }
  const Eigen::VectorXd& observations() const { return obs_; }
  const Eigen::MatrixXd& prior_cov() const { return prior_cov_; }
  const Eigen::MatrixXd& node_coords() const { return coords_; }

  static Eigen::MatrixXd node_coordinates(int m) {
    Eigen::MatrixXd coords(static_cast<Eigen::Index>(m) * m, 2);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        coords(static_cast<Eigen::Index>(i) * m + j, 0) = double(i) / (m - 1);
        coords(static_cast<Eigen::Index>(i) * m + j, 1) = double(j) / (m - 1);
      }
    return coords;
  }

  // k x k sub-lattice of node indices, evenly spread over the grid.
  static std::vector<int> sensor_lattice(int m, int k = 5) {
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(k) * k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        int i = static_cast<int>(std::lround(double(a) * (m - 1) / (k - 1)));
        int j = static_cast<int>(std::lround(double(b) * (m - 1) / (k - 1)));
        idx.push_back(i * m + j);
      }
    return idx;
  }

  Eigen::VectorXd observe(const Eigen::VectorXd& u) const {
    Eigen::VectorXd ou(sensors_.size());
    for (std::size_t i = 0; i < sensors_.size(); ++i) ou[i] = u[sensors_[i]];
    return ou;
  }

  // Data misfit Phi(u) = |y - O u|^2 / (2 noise_sd^2); zero when there are
  // no observations (flat likelihood).
  double misfit(const Eigen::VectorXd& u) const {
    if (sensors_.empty()) return 0.0;
    return (obs_ - observe(u)).squaredNorm() / (2.0 * noise_sd_ * noise_sd_);
  }

  // Full observation log-density, constants included.
  double obs_loglik(const Eigen::VectorXd& u) const {
    if (sensors_.empty()) return 0.0;
    double n = static_cast<double>(sensors_.size());
    return -misfit(u) -
           n * 0.5 * std::log(2.0 * std::numbers::pi * noise_sd_ * noise_sd_);
  }

  // Draw u ~ N(0, C) as L z with L the lower Cholesky factor of C.
  Eigen::VectorXd prior_sample(RngStream& rng) const {
    return llt_.matrixL() * rng.normal_vector(dim());
  }

  double prior_quadratic(const Eigen::VectorXd& u) const {
    return u.dot(llt_.solve(u));
  }

 private:
  double potential_impl(const Eigen::VectorXd& u) const override {
    return 0.5 * prior_quadratic(u) + misfit(u);
  }

  Eigen::VectorXd gradient_impl(const Eigen::VectorXd& u) const override {
    Eigen::VectorXd g = llt_.solve(u);
    if (!sensors_.empty()) {
      Eigen::VectorXd r = (observe(u) - obs_) / (noise_sd_ * noise_sd_);
      for (std::size_t i = 0; i < sensors_.size(); ++i) g[sensors_[i]] += r[i];
    }
    return g;
  }

  int grid_side_;
  double sigma_u_;
  double s0_;
  std::vector<int> sensors_;
  Eigen::VectorXd obs_;
  double noise_sd_;
  Eigen::MatrixXd coords_;
  Eigen::MatrixXd prior_cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace aemc
