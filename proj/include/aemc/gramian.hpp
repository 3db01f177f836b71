#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace aemc {

struct DegenerateVolumeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// log sqrt(det(J'J)) for tall J, log sqrt(det(JJ')) for wide J: the log of
// the k-volume scaling of the linear map, k = min(rows, cols). Equals the
// sum of log singular values.
inline double log_gramian_volume(const Eigen::MatrixXd& j) {
  if (j.rows() == 0 || j.cols() == 0)
    throw std::invalid_argument("gramian of an empty matrix");
  Eigen::MatrixXd g = j.rows() >= j.cols()
                          ? Eigen::MatrixXd(j.transpose() * j)
                          : Eigen::MatrixXd(j * j.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw DegenerateVolumeError("rank-deficient Jacobian in volume factor");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    double l = llt.matrixLLT()(i, i);
    if (!(l > 0.0) || !std::isfinite(l))
      throw DegenerateVolumeError("rank-deficient Jacobian in volume factor");
    log_det += std::log(l);
  }
  if (log_det < std::log(1e-300))
    throw DegenerateVolumeError("volume factor underflows");
  return log_det;  // 2 * sum(log L_ii) / 2
}

inline double gramian_volume(const Eigen::MatrixXd& j) {
  return std::exp(log_gramian_volume(j));
}

}  // namespace aemc
