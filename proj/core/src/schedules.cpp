#include "zosaddle/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace zosaddle {

StepSchedule StepSchedule::constant(double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("StepSchedule: constant alpha must be > 0");
  StepSchedule s;
  s.kind = Kind::Constant;
  s.alpha = alpha;
  return s;
}

StepSchedule StepSchedule::power_law(double gamma, double m, double p) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("StepSchedule: gamma must be > 0");
  if (!(m >= 1.0))
    throw std::invalid_argument("StepSchedule: m must be >= 1");
  StepSchedule s;
  s.kind = Kind::PowerLaw;
  s.gamma = gamma;
  s.m = m;
  s.p = p;
  return s;
}

double StepSchedule::eval(int n) const {
  if (n < 0) throw std::invalid_argument("StepSchedule: n must be >= 0");
  switch (kind) {
    case Kind::Constant:
      return alpha;
    case Kind::PowerLaw:
      return gamma / std::pow(static_cast<double>(n) + m, p);
  }
  return 0.0;
}

std::vector<std::string> StepSchedule::validate() const {
  std::vector<std::string> warnings;
  if (kind == Kind::PowerLaw && (p <= 0.5 || p > 1.0))
    warnings.push_back(
        "step schedule exponent p=" + std::to_string(p) +
        " is outside (1/2, 1]; sum alpha(n)^2 may diverge or decay too fast");
  return warnings;
}

LengthSchedule LengthSchedule::constant(double l) {
  if (!(l > 0.0))
    throw std::invalid_argument("LengthSchedule: constant l must be > 0");
  LengthSchedule s;
  s.kind = Kind::Constant;
  s.l = l;
  return s;
}

LengthSchedule LengthSchedule::coupled_sqrt(double L) {
  if (!(L > 0.0))
    throw std::invalid_argument("LengthSchedule: L must be > 0");
  LengthSchedule s;
  s.kind = Kind::CoupledSqrt;
  s.L = L;
  return s;
}

double LengthSchedule::eval(int n, const StepSchedule& alpha) const {
  if (n < 0) throw std::invalid_argument("LengthSchedule: n must be >= 0");
  switch (kind) {
    case Kind::Constant:
      return l;
    case Kind::CoupledSqrt:
      return L * std::sqrt(alpha.eval(n));
  }
  return 0.0;
}

std::vector<std::string> LengthSchedule::validate() const { return {}; }

double schedule_eval(const StepSchedule& s, int n) { return s.eval(n); }

double schedule_eval(const LengthSchedule& s, int n,
                     const StepSchedule& alpha) {
  return s.eval(n, alpha);
}

}  // namespace zosaddle
