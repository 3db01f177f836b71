#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <json.hpp>

#include "aemc/chain.hpp"
#include "aemc/targets.hpp"

namespace aemc {

struct EssResult {
  double ess = 0.0;
  bool degenerate = false;  // constant series
};

// Effective sample size n / (1 + 2 sum rho_k) with the autocovariance sum
// truncated by Geyer's initial positive sequence (stop at the first
// non-positive pair sum rho_{2m} + rho_{2m+1}).
inline EssResult ess(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size();
  if (n < 10) throw std::invalid_argument("ess: need at least 10 points");

  double mean = series.mean();
  Eigen::VectorXd centered = series.array() - mean;
  double c0 = centered.squaredNorm() / static_cast<double>(n);
  if (c0 <= 0.0 || !std::isfinite(c0)) return {0.0, true};

  auto rho = [&](Eigen::Index k) {
    return centered.head(n - k).dot(centered.tail(n - k)) /
           static_cast<double>(n) / c0;
  };

  double tau = 1.0;  // = 1 + 2 sum rho_k, accumulated in Geyer pairs
  for (Eigen::Index m = 0;; ++m) {
    Eigen::Index k1 = 2 * m + 1, k2 = 2 * m + 2;
    if (k1 >= n - 1) break;
    double pair = rho(k1) + (k2 < n - 1 ? rho(k2) : 0.0);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  double out = static_cast<double>(n) / tau;
  return {std::clamp(out, 1e-300, static_cast<double>(n)), false};
}

// Posterior-mean predictive classification accuracy: average the predictive
// probability sigmoid(X q) over posterior samples and threshold at 0.5
// (ties classify as 1).
inline double predictive_accuracy(const Eigen::MatrixXd& samples,
                                  const Eigen::MatrixXd& x_test,
                                  const Eigen::VectorXd& y_test) {
  if (samples.rows() == 0) throw std::invalid_argument("no posterior samples");
  if (samples.cols() != x_test.cols())
    throw std::invalid_argument("sample dim != design columns");
  if (y_test.size() != x_test.rows())
    throw std::invalid_argument("label count != test rows");

  Eigen::VectorXd prob = Eigen::VectorXd::Zero(x_test.rows());
  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    Eigen::VectorXd lin = x_test * samples.row(s).transpose();
    for (Eigen::Index i = 0; i < lin.size(); ++i) prob[i] += sigmoid(lin[i]);
  }
  prob /= static_cast<double>(samples.rows());

  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < prob.size(); ++i) {
    double pred = prob[i] >= 0.5 ? 1.0 : 0.0;
    if (pred == y_test[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(prob.size());
}

inline double min_ess(const ChainTrace& trace) {
  double out = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < trace.samples.cols(); ++j)
    out = std::min(out, ess(trace.samples.col(j)).ess);
  return out;
}

inline double mean_ess(const ChainTrace& trace) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < trace.samples.cols(); ++j)
    acc += ess(trace.samples.col(j)).ess;
  return acc / static_cast<double>(trace.samples.cols());
}

// Per-method wall time, gradient-evaluation cost and ESS rates, with
// ratios relative to the first (baseline) entry.
inline nlohmann::json cost_report(const std::vector<std::string>& names,
                                  const std::vector<const ChainTrace*>& traces) {
  if (names.size() != traces.size() || traces.size() < 2)
    throw std::invalid_argument("cost_report: need >= 2 named traces");
  nlohmann::json out = nlohmann::json::array();
  const ChainTrace& base = *traces.front();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const ChainTrace& t = *traces[i];
    nlohmann::json j;
    j["method"] = names[i];
    j["wall_time_s"] = t.wall_time_s;
    j["n_grad_evals"] = t.n_grad_evals;
    double per_grad =
        t.n_grad_evals > 0 ? t.wall_time_s / static_cast<double>(t.n_grad_evals)
                           : 0.0;
    j["time_per_grad_eval_s"] = per_grad;
    double m_ess = t.samples.rows() >= 10 ? mean_ess(t) : 0.0;
    j["mean_ess"] = m_ess;
    j["ess_per_second"] = t.wall_time_s > 0.0 ? m_ess / t.wall_time_s : 0.0;
    j["wall_time_ratio_vs_baseline"] =
        base.wall_time_s > 0.0 ? t.wall_time_s / base.wall_time_s : 0.0;
    double base_per_grad = base.n_grad_evals > 0
                               ? base.wall_time_s /
                                     static_cast<double>(base.n_grad_evals)
                               : 0.0;
    j["per_grad_time_ratio_vs_baseline"] =
        base_per_grad > 0.0 ? per_grad / base_per_grad : 0.0;
    out.push_back(std::move(j));
  }
  return out;
}

// Per-parameter posterior summary plus run-level counters.
inline nlohmann::json summarize_trace(const ChainTrace& trace) {
  nlohmann::json j;
  j["n_kept"] = trace.samples.rows();
  j["acceptance_rate"] = trace.acceptance_rate();
  j["wall_time_s"] = trace.wall_time_s;
  j["n_grad_evals"] = trace.n_grad_evals;
  j["completed"] = trace.completed;

  nlohmann::json params = nlohmann::json::array();
  const Eigen::Index n = trace.samples.rows();
  if (n >= 2) {
    for (Eigen::Index c = 0; c < trace.samples.cols(); ++c) {
      Eigen::VectorXd col = trace.samples.col(c);
      double mean = col.mean();
      double sd = std::sqrt((col.array() - mean).square().sum() /
                            static_cast<double>(n - 1));
      nlohmann::json p;
      p["mean"] = mean;
      p["sd"] = sd;
      if (n >= 10) {
        EssResult e = ess(col);
        p["ess"] = e.ess;
        p["degenerate"] = e.degenerate;
      }
      params.push_back(std::move(p));
    }
  }
  j["parameters"] = std::move(params);
  return j;
}

}  // namespace aemc
