#include "zosaddle/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace zosaddle {

namespace {

double checked_eval(Objective& obj, const Eigen::VectorXd& x) {
  const double v = obj.eval(x);
  if (!std::isfinite(v))
    throw std::runtime_error("estimator: objective returned a non-finite value");
  return v;
}

void check_length(double l) {
  if (!(l > 0.0))
    throw std::invalid_argument("estimator: difference length l must be > 0");
}

}  // namespace

Eigen::VectorXd grad_estimate(Objective& obj, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& r, double l) {
  check_length(l);
  if (!x.allFinite())
    throw std::invalid_argument("grad_estimate: non-finite evaluation point");
  const double fp = checked_eval(obj, x + l * r);
  const double fm = checked_eval(obj, x - l * r);
  return ((fp - fm) / (2.0 * l)) * r;
}

Eigen::MatrixXd hessian_estimate(Objective& obj, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r, double l) {
  check_length(l);
  const double fp = checked_eval(obj, x + l * r);
  const double fm = checked_eval(obj, x - l * r);
  const double f0 = checked_eval(obj, x);
  const double coeff = (fp + fm - 2.0 * f0) / (2.0 * l * l);
  Eigen::MatrixXd out = coeff * (r * r.transpose());
  out.diagonal().array() -= coeff;
  return out;
}

Eigen::VectorXd hess_vec_estimate(Objective& obj, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v,
                                  const Eigen::VectorXd& r, double l) {
  check_length(l);
  if (std::abs(v.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("hess_vec_estimate: v must be a unit vector");
  const Eigen::VectorXd fwd = grad_estimate(obj, x + l * v, r, l);
  const Eigen::VectorXd bwd = grad_estimate(obj, x - l * v, r, l);
  return (fwd - bwd) / (2.0 * l);
}

Eigen::VectorXd batch_residual(Objective& obj, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v, double l, int m,
                               RngStream& rng) {
  if (m < 1) throw std::invalid_argument("batch_residual: m must be >= 1");
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < m; ++i)
    mean += hess_vec_estimate(obj, x, v, rng.standard_normal(d), l);
  mean /= static_cast<double>(m);
  return mean - v * v.dot(mean);
}

EstimatorSample grad_sample(Objective& obj, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& r, double l) {
  const long long before = obj.eval_count();
  EstimatorSample s;
  s.value = grad_estimate(obj, x, r, l);
  s.direction = r;
  s.length = l;
  s.evals_used = static_cast<int>(obj.eval_count() - before);
  return s;
}

EstimatorSample hessian_sample(Objective& obj, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& r, double l) {
  const long long before = obj.eval_count();
  EstimatorSample s;
  s.value = hessian_estimate(obj, x, r, l);
  s.direction = r;
  s.length = l;
  s.evals_used = static_cast<int>(obj.eval_count() - before);
  return s;
}

EstimatorSample hess_vec_sample(Objective& obj, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& v,
                                const Eigen::VectorXd& r, double l) {
  const long long before = obj.eval_count();
  EstimatorSample s;
  s.value = hess_vec_estimate(obj, x, v, r, l);
  s.direction = r;
  s.length = l;
  s.evals_used = static_cast<int>(obj.eval_count() - before);
  return s;
}

}  // namespace zosaddle
