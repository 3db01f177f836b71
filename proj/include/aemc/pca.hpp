#pragma once

#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "aemc/autoencoder.hpp"

namespace aemc {

// Linear autoencoder from the top-r principal components of the samples
// (rows = observations). Encoder rows are orthonormal eigenvectors of the
// sample covariance; the mean is carried in the biases, so decode(encode(x))
// is the rank-r PCA reconstruction.
inline Autoencoder pca_fit(const Eigen::MatrixXd& samples, Eigen::Index r) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (r < 1 || r > std::min(n, d))
    throw std::invalid_argument("pca_fit: r must be in [1, min(n, D)]");

  Eigen::VectorXd mean = samples.colwise().mean();
  Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n > 1 ? n - 1 : 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("pca_fit: eigendecomposition failed");

  // Eigen sorts ascending; take the trailing r columns in descending order.
  Eigen::MatrixXd p(r, d);
  for (Eigen::Index k = 0; k < r; ++k)
    p.row(k) = es.eigenvectors().col(d - 1 - k).transpose();

  AffineLayer enc{p, -p * mean, Activation::identity};
  AffineLayer dec{p.transpose(), mean, Activation::identity};
  return Autoencoder({enc}, {dec});
}

}  // namespace aemc
