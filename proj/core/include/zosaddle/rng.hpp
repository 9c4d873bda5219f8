#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace zosaddle {

/// Seeded stream of standard-normal draws.
///
/// Draws come from a fixed, documented pipeline so that a (seed, call
/// sequence) pair reproduces the same trace on any build of this library:
/// mt19937_64 -> 53-bit uniform in (0,1) -> Box-Muller pair. The second
/// Box-Muller value is cached, so normals are consumed strictly in order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// One N(0,1) draw.
  double normal();

  /// Vector of d i.i.d. N(0,1) components.
  Eigen::VectorXd standard_normal(int d);

  /// Unit-normalized Gaussian direction.
  Eigen::VectorXd unit_vector(int d);

  /// Uniform in (0,1), 53-bit resolution; never returns an endpoint.
  double uniform01();

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace zosaddle
