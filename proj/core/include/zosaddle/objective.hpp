#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace zosaddle {

/// Reference data attached to a benchmark objective. Used only for
/// measurement (error traces) and for the deterministic baseline; the
/// zeroth-order search itself never touches it.
struct Reference {
  std::optional<Eigen::VectorXd> saddle;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

/// Black-box objective: a scalar function of R^d plus an evaluation
/// counter. Every call to eval() costs exactly one count; nothing else
/// does. Instances are immutable after construction except the counter,
/// the observed-scale tracker, and any inner-solver cache owned by the
/// eval closure; concurrent replicas must each own their own instance.
class Objective {
 public:
  Objective(int dim, std::function<double(const Eigen::VectorXd&)> eval_fn,
            Reference reference = {}, std::string name = {},
            std::function<void()> reset_fn = {})
      : dim_(dim),
        eval_fn_(std::move(eval_fn)),
        reference_(std::move(reference)),
        name_(std::move(name)),
        reset_fn_(std::move(reset_fn)) {}

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }

  double eval(const Eigen::VectorXd& x);

  long long eval_count() const { return evals_; }

  /// Largest |f| seen so far; free to read, used for round-off warnings.
  double observed_scale() const { return scale_; }

  bool has_saddle() const { return reference_.saddle.has_value(); }
  const Eigen::VectorXd& known_saddle() const { return *reference_.saddle; }
  bool has_gradient() const { return static_cast<bool>(reference_.gradient); }
  Eigen::VectorXd analytic_gradient(const Eigen::VectorXd& x) const {
    return reference_.gradient(x);
  }
  bool has_hessian() const { return static_cast<bool>(reference_.hessian); }
  Eigen::MatrixXd analytic_hessian(const Eigen::VectorXd& x) const {
    return reference_.hessian(x);
  }

  /// Clears any inner-solver state (warm starts). After a reset, eval at a
  /// previously visited point returns a bit-identical value. No-op for
  /// closed-form objectives.
  void reset_inner_state() {
    if (reset_fn_) reset_fn_();
  }

 private:
  int dim_;
  std::function<double(const Eigen::VectorXd&)> eval_fn_;
  Reference reference_;
  std::string name_;
  std::function<void()> reset_fn_;
  long long evals_ = 0;
  double scale_ = 0.0;
};

}  // namespace zosaddle
