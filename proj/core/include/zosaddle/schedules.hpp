#pragma once

#include <string>
#include <vector>

namespace zosaddle {

/// Step-size rule alpha(n): either a constant or the power law
/// gamma / (n + m)^p. For almost-sure convergence the power law wants
/// p in (1/2, 1]; validate() warns (does not reject) outside that range.
struct StepSchedule {
  enum class Kind { Constant, PowerLaw };
  Kind kind = Kind::Constant;
  double alpha = 0.0;  // Constant
  double gamma = 0.0;  // PowerLaw
  double m = 1.0;
  double p = 1.0;

  static StepSchedule constant(double alpha);
  static StepSchedule power_law(double gamma, double m, double p);

  double eval(int n) const;
  std::vector<std::string> validate() const;
};

/// Difference-length rule l(n): constant, or coupled to the step size as
/// l(n) = L sqrt(alpha(n)) so the estimator bias decays with the step.
struct LengthSchedule {
  enum class Kind { Constant, CoupledSqrt };
  Kind kind = Kind::Constant;
  double l = 0.0;  // Constant
  double L = 0.0;  // CoupledSqrt

  static LengthSchedule constant(double l);
  static LengthSchedule coupled_sqrt(double L);

  double eval(int n, const StepSchedule& alpha) const;
  std::vector<std::string> validate() const;
};

double schedule_eval(const StepSchedule& s, int n);
double schedule_eval(const LengthSchedule& s, int n, const StepSchedule& alpha);

}  // namespace zosaddle
