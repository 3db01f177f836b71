#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <json.hpp>

#include "aemc/hmc.hpp"
#include "aemc/rng.hpp"

namespace aemc {

struct IterationRecord {
  bool accepted = false;
  bool divergent = false;
  double log_rho = 0.0;
  double h_start = 0.0;
  double h_end = 0.0;
  double log_volume_factor = 0.0;
  double u = 0.0;
};

struct ChainTrace {
  Eigen::MatrixXd samples;  // n_kept x D, post-warmup, thinned
  std::vector<IterationRecord> iterations;
  Eigen::VectorXd last_state;
  int n_iter = 0;
  int n_warmup = 0;
  int thin = 1;
  double wall_time_s = 0.0;
  std::uint64_t n_grad_evals = 0;
  bool completed = true;
  std::string error;

  double acceptance_rate() const {
    if (iterations.empty()) return 0.0;
    std::size_t acc = 0, count = 0;
    for (std::size_t i = static_cast<std::size_t>(n_warmup);
         i < iterations.size(); ++i, ++count)
      acc += iterations[i].accepted ? 1 : 0;
    if (count == 0) {  // fall back to the whole run
      for (const auto& r : iterations) acc += r.accepted ? 1 : 0;
      count = iterations.size();
    }
    return static_cast<double>(acc) / static_cast<double>(count);
  }
};

using StepKernel =
    std::function<StepOutcome(const Eigen::VectorXd&, RngStream&)>;

// Iterate a step kernel, keeping every `thin`-th post-warmup state
// (n_kept = floor((n_iter - n_warmup) / thin)). Per-iteration metadata is
// recorded for the whole run. A kernel error stops the chain and leaves the
// partial trace in place (completed = false).
inline ChainTrace run_chain(const StepKernel& kernel, Eigen::VectorXd q0,
                            int n_iter, int n_warmup, int thin, RngStream& rng,
                            const std::function<std::uint64_t()>& grad_counter = {}) {
  if (n_warmup < 0 || n_iter < n_warmup)
    throw std::invalid_argument("need n_iter >= n_warmup >= 0");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");

  ChainTrace trace;
  trace.n_iter = n_iter;
  trace.n_warmup = n_warmup;
  trace.thin = thin;
  const int n_kept = (n_iter - n_warmup) / thin;
  trace.samples.resize(n_kept, q0.size());
  trace.iterations.reserve(static_cast<std::size_t>(n_iter));

  std::uint64_t grad0 = grad_counter ? grad_counter() : 0;
  auto t0 = std::chrono::steady_clock::now();

  Eigen::VectorXd q = std::move(q0);
  int kept = 0;
  for (int i = 0; i < n_iter; ++i) {
    StepOutcome out;
    try {
      out = kernel(q, rng);
    } catch (const std::exception& e) {
      trace.completed = false;
      trace.error = e.what();
      break;
    }
    q = out.next;
    trace.iterations.push_back({out.accepted, out.divergent, out.log_rho,
                                out.h_start, out.h_end, out.log_volume_factor,
                                out.u});
    if (i >= n_warmup && (i - n_warmup + 1) % thin == 0 && kept < n_kept)
      trace.samples.row(kept++) = q.transpose();
  }
  trace.samples.conservativeResize(kept, Eigen::NoChange);
  trace.last_state = q;

  auto t1 = std::chrono::steady_clock::now();
  trace.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  if (grad_counter) trace.n_grad_evals = grad_counter() - grad0;
  return trace;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// One row per iteration; parameter columns (first n_param_cols coordinates)
// are filled on kept post-warmup rows and left empty elsewhere.
inline void write_trace_csv(const std::string& path, const ChainTrace& trace,
                            int n_param_cols = -1) {
  const Eigen::Index d = trace.samples.cols();
  Eigen::Index k = n_param_cols < 0 ? d : std::min<Eigen::Index>(n_param_cols, d);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  out << "iter,accepted,log_rho,H_start,H_end,log_volume_factor";
  for (Eigen::Index j = 0; j < k; ++j) out << ",q_" << j;
  out << "\n";

  int kept = 0;
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& r = trace.iterations[i];
    out << i << ',' << (r.accepted ? 1 : 0) << ','
        << detail::format_double(r.log_rho) << ','
        << detail::format_double(r.h_start) << ','
        << detail::format_double(r.h_end) << ','
        << detail::format_double(r.log_volume_factor);
    bool is_kept = static_cast<int>(i) >= trace.n_warmup &&
                   (static_cast<int>(i) - trace.n_warmup + 1) % trace.thin == 0 &&
                   kept < trace.samples.rows();
    if (is_kept) {
      for (Eigen::Index j = 0; j < k; ++j)
        out << ',' << detail::format_double(trace.samples(kept, j));
      ++kept;
    } else {
      for (Eigen::Index j = 0; j < k; ++j) out << ',';
    }
    out << "\n";
  }
}

inline nlohmann::json trace_metadata(const ChainTrace& trace,
                                     const nlohmann::json& config_echo,
                                     std::uint64_t seed) {
  nlohmann::json j;
  j["config"] = config_echo;
  j["seed"] = seed;
  j["n_iter"] = trace.n_iter;
  j["n_warmup"] = trace.n_warmup;
  j["thin"] = trace.thin;
  j["n_kept"] = trace.samples.rows();
  j["acceptance_rate"] = trace.acceptance_rate();
  j["wall_time_s"] = trace.wall_time_s;
  j["n_grad_evals"] = trace.n_grad_evals;
  j["completed"] = trace.completed;
  if (!trace.error.empty()) j["error"] = trace.error;
  return j;
}

}  // namespace aemc
