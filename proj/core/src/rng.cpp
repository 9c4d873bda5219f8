#include "zosaddle/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zosaddle {

double RngStream::uniform01() {
  // (x >> 11) is uniform on [0, 2^53); the +0.5 keeps the result strictly
  // inside (0,1) so log() below is always finite.
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd RngStream::standard_normal(int d) {
  if (d < 1) throw std::invalid_argument("standard_normal: d must be >= 1");
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = normal();
  return v;
}

Eigen::VectorXd RngStream::unit_vector(int d) {
  Eigen::VectorXd v = standard_normal(d);
  double n = v.norm();
  while (n < 1e-12) {  // astronomically unlikely, but keep the contract
    v = standard_normal(d);
    n = v.norm();
  }
  return v / n;
}

}  // namespace zosaddle
