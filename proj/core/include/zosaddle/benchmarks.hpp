#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "zosaddle/objective.hpp"

namespace zosaddle {

/// Four-term Gaussian-mixture surface; defaults are the standard
/// parameterization used throughout the transition-state literature.
struct MullerBrownParams {
  std::array<double, 4> A{-200.0, -100.0, -170.0, 15.0};
  std::array<double, 4> a{-1.0, -1.0, -6.5, 0.7};
  std::array<double, 4> b{0.0, 0.0, 11.0, 0.6};
  std::array<double, 4> c{-10.0, -10.0, -6.5, 0.7};
  std::array<double, 4> xbar{1.0, 0.0, -0.5, -1.0};
  std::array<double, 4> ybar{0.0, 0.5, 1.5, 1.0};
};

/// Rosenbrock chain with per-coordinate squared-arctangent terms whose
/// signs s_i tune the index of the critical point at (1,...,1).
struct ModRosenbrockParams {
  int d = 2;
  Eigen::VectorXd s;  // size d
};

/// Fully-connected linear network ||W_H ... W_1 X - Y||_F^2 flattened to a
/// single parameter vector (layer-major, column-major within each W_h).
struct LinearNetSpec {
  int depth = 2;                // H
  std::vector<int> layer_dims;  // d_0 .. d_H
  Eigen::MatrixXd X;            // d_0 x N
  Eigen::MatrixXd Y;            // d_H x N
  std::vector<int> subset;      // S, 1-based indices into {1..r_max}

  int param_dim() const;
};

/// f(x) = x^T A x / 2 with exact reference derivatives. Rejects
/// non-symmetric A. Known saddle at 0 when A is indefinite and nonsingular.
Objective make_quadratic(const Eigen::MatrixXd& A);

/// Two-dimensional Muller-Brown surface. The reference saddle is located
/// once per process by a grid-seeded Newton solve on the analytic gradient
/// (residual < 1e-12) and cached; among the surface's index-1 critical
/// points the highest-energy one is stored.
Objective make_muller_brown(const MullerBrownParams& params = {});

/// Critical points of the Muller-Brown gradient found by the grid-seeded
/// Newton scan, deduplicated; exposed for tests and diagnostics.
std::vector<Eigen::Vector2d> muller_brown_critical_points(
    const MullerBrownParams& params = {});

Objective make_mod_rosenbrock(const ModRosenbrockParams& params);
Objective make_mod_rosenbrock(int d, const Eigen::VectorXd& s);

/// f(x,y) = min_z (x-z1)^2 + (y-z2)^2 + sin(z1 z2), each eval solved by
/// damped Newton (gradient tolerance inner_tol, iteration cap 100) warm-
/// started from the previous solution; the first eval in a fresh or reset
/// state starts from the query point. Reference derivatives come from the
/// implicit-function theorem at the converged inner solution.
Objective make_implicit_2d(double inner_tol = 1e-12);

Objective make_linear_net(const LinearNetSpec& spec);

/// Closed-form critical point of the linear network built from the
/// eigendecomposition of Sigma_YX Sigma_XX^{-1} Sigma_YX^T, restricted to
/// the index subset spec.subset. Requires the inner layer dims to equal
/// d_0 and Sigma_XX to be invertible.
Eigen::VectorXd construct_net_saddle(const LinearNetSpec& spec);

/// f(x) = sum_i sin(x_i). Gaussian smoothing is known exactly
/// (grad f_l = e^{-l^2/2} cos(x)), which makes the estimator bias bounds
/// testable with M = 1.
Objective make_sum_of_sines(int d);

}  // namespace zosaddle
