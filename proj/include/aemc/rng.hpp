#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace aemc {

// Seeded random stream owned by a single chain. Never shared across chains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

  // Independent stream derived from a master seed by a fixed offset
  // (splitmix64 finalizer, so nearby ids give unrelated streams).
  static RngStream derive(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return RngStream(z ^ (z >> 31));
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace aemc
