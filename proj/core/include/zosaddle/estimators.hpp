#pragma once

#include <variant>

#include <Eigen/Core>

#include "zosaddle/objective.hpp"
#include "zosaddle/rng.hpp"

namespace zosaddle {

/// One stochastic-difference sample together with the direction and
/// difference length that produced it and the evaluations it consumed
/// (2 gradient, 3 Hessian, 4 Hessian-vector).
struct EstimatorSample {
  Eigen::VectorXd direction;
  double length = 0.0;
  std::variant<Eigen::VectorXd, Eigen::MatrixXd> value;
  int evals_used = 0;
};

/// Two-point gradient estimate (f(x+lr) - f(x-lr)) / (2l) * r.
/// Unbiased for the gradient of the Gaussian smoothing of f at scale l.
Eigen::VectorXd grad_estimate(Objective& obj, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& r, double l);

/// Second-difference Hessian estimate
/// (f(x+lr) + f(x-lr) - 2 f(x)) / (2 l^2) * (r r^T - I).
/// Materializes the dense d x d matrix; its sampling variance scales like
/// d^4, so the searches never use it -- it exists for the variance study
/// and for small-d diagnostics.
Eigen::MatrixXd hessian_estimate(Objective& obj, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r, double l);

/// Hessian-vector estimate (F(x+lv,r,l) - F(x-lv,r,l)) / (2l), both
/// gradient estimates sharing the same direction r. v must be unit within
/// 1e-8. Sampling variance scales like d rather than d^4.
Eigen::VectorXd hess_vec_estimate(Objective& obj, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v,
                                  const Eigen::VectorXd& r, double l);

/// (I - v v^T) applied to the mean of m independent Hessian-vector
/// estimates; the batched residual behind the opt-in stopping rule.
/// Consumes 4m evaluations.
Eigen::VectorXd batch_residual(Objective& obj, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v, double l, int m,
                               RngStream& rng);

// Sample-wrapped variants used where the consumer wants the (r, l, evals)
// provenance alongside the value.
EstimatorSample grad_sample(Objective& obj, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& r, double l);
EstimatorSample hessian_sample(Objective& obj, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& r, double l);
EstimatorSample hess_vec_sample(Objective& obj, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& v,
                                const Eigen::VectorXd& r, double l);

}  // namespace zosaddle
