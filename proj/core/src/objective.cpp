#include "zosaddle/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace zosaddle {

double Objective::eval(const Eigen::VectorXd& x) {
  if (x.size() != dim_)
    throw std::invalid_argument("Objective::eval: point has dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(dim_));
  ++evals_;
  const double value = eval_fn_(x);
  if (std::isfinite(value) && std::abs(value) > scale_)
    scale_ = std::abs(value);
  return value;
}

}  // namespace zosaddle
