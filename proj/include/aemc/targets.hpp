#pragma once

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace aemc {

// Target distribution seen through its potential U(q) = -log pi(q) and
// gradient. Additive constants are dropped consistently; only differences
// of U enter acceptance ratios. Immutable after construction.
class Target {
 public:
  virtual ~Target() = default;

  Eigen::Index dim() const { return dim_; }

  double potential(const Eigen::VectorXd& q) const {
    check_dim(q);
    return potential_impl(q);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& q) const {
    check_dim(q);
    grad_evals_.fetch_add(1, std::memory_order_relaxed);
    return gradient_impl(q);
  }

  std::uint64_t gradient_evals() const {
    return grad_evals_.load(std::memory_order_relaxed);
  }

 protected:
  explicit Target(Eigen::Index dim) : dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("target dimension must be positive");
  }

  virtual double potential_impl(const Eigen::VectorXd& q) const = 0;
  virtual Eigen::VectorXd gradient_impl(const Eigen::VectorXd& q) const = 0;

  void check_dim(const Eigen::VectorXd& q) const {
    if (q.size() != dim_)
      throw std::invalid_argument("state dimension does not match target");
  }

 private:
  Eigen::Index dim_;
  mutable std::atomic<std::uint64_t> grad_evals_{0};
};

// Multivariate Gaussian N(mean, cov). U(q) = (q-mean)' cov^-1 (q-mean) / 2.
class GaussianTarget final : public Target {
 public:
  GaussianTarget(Eigen::VectorXd mean, Eigen::MatrixXd cov)
      : Target(mean.size()), mean_(std::move(mean)), cov_(std::move(cov)) {
    if (cov_.rows() != dim() || cov_.cols() != dim())
      throw std::invalid_argument("covariance shape does not match mean");
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("covariance is not positive definite");
    llt_.compute(cov_);
    precision_ = llt_.solve(Eigen::MatrixXd::Identity(dim(), dim()));
  }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::MatrixXd& precision() const { return precision_; }

  // Covariance used in the paper's 3D illustration.
  static Eigen::MatrixXd illustration_covariance() {
    Eigen::MatrixXd s(3, 3);
    s << 1.0, 0.95, 0.7,
         0.95, 1.0, 0.5,
         0.7, 0.5, 1.0;
    return s;
  }

 private:
  double potential_impl(const Eigen::VectorXd& q) const override {
    Eigen::VectorXd r = q - mean_;
    return 0.5 * r.dot(llt_.solve(r));
  }

  Eigen::VectorXd gradient_impl(const Eigen::VectorXd& q) const override {
    return llt_.solve(q - mean_);
  }

  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd precision_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline double log1p_exp(double x) {
  // log(1 + exp(x)) without overflow.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

// Bayesian logistic regression with N(0, prior_variance I) prior on the
// coefficients. U(q) = q'q/(2 s^2) - y'Xq + sum_i log(1 + exp(X_i q)).
class LogisticRegressionTarget final : public Target {
 public:
  LogisticRegressionTarget(Eigen::MatrixXd design, Eigen::VectorXd labels,
                           double prior_variance = 100.0)
      : Target(design.cols()),
        design_(std::move(design)),
        labels_(std::move(labels)),
        prior_variance_(prior_variance) {
    if (labels_.size() != design_.rows())
      throw std::invalid_argument("label count does not match design rows");
    if (!design_.allFinite())
      throw std::invalid_argument("design matrix has non-finite entries");
    for (Eigen::Index i = 0; i < labels_.size(); ++i)
      if (labels_[i] != 0.0 && labels_[i] != 1.0)
        throw std::invalid_argument("labels must be exactly 0 or 1");
    if (prior_variance_ <= 0.0)
      throw std::invalid_argument("prior variance must be positive");
  }

  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  double prior_variance() const { return prior_variance_; }

  std::pair<double, Eigen::VectorXd> value_and_gradient(
      const Eigen::VectorXd& q) const {
    check_dim(q);
    Eigen::VectorXd s = design_ * q;
    double u = 0.5 * q.squaredNorm() / prior_variance_ - labels_.dot(s);
    Eigen::VectorXd probs(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      u += log1p_exp(s[i]);
      probs[i] = sigmoid(s[i]);
    }
    Eigen::VectorXd g =
        q / prior_variance_ - design_.transpose() * (labels_ - probs);
    if (!std::isfinite(u) || !g.allFinite())
      throw std::runtime_error("logistic potential/gradient is non-finite");
    return {u, g};
  }

 private:
  double potential_impl(const Eigen::VectorXd& q) const override {
    Eigen::VectorXd s = design_ * q;
    double u = 0.5 * q.squaredNorm() / prior_variance_ - labels_.dot(s);
    for (Eigen::Index i = 0; i < s.size(); ++i) u += log1p_exp(s[i]);
    if (!std::isfinite(u))
      throw std::runtime_error("logistic potential is non-finite");
    return u;
  }

  Eigen::VectorXd gradient_impl(const Eigen::VectorXd& q) const override {
    return value_and_gradient(q).second;
  }

  Eigen::MatrixXd design_;
  Eigen::VectorXd labels_;
  double prior_variance_;
};

}  // namespace aemc
