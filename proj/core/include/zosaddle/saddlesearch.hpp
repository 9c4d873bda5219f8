#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zosaddle/eigensearch.hpp"
#include "zosaddle/objective.hpp"
#include "zosaddle/rng.hpp"
#include "zosaddle/schedules.hpp"

namespace zosaddle {

struct SaddleConfig {
  int k = 1;
  int n_x_max = 0;
  StepSchedule alpha_x;
  LengthSchedule length;
  EigenSearchConfig inner;
  bool warm_start = true;  // reuse the previous basis as the inner start
  std::uint64_t seed = 0;

  void validate(int dim) const;
};

/// One trace row per outer iteration (row 0 is the initial state).
/// dist_sq and grad_norm_sq come from reference data only and are never
/// consumed by the algorithm.
struct RunRow {
  int n = 0;
  Eigen::VectorXd x;
  std::optional<double> dist_sq;
  std::optional<double> grad_norm_sq;
  long long cumulative_evals = 0;
};

struct RunRecord {
  std::vector<RunRow> rows;
  SaddleConfig config;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<std::string> warnings;

  double min_dist_sq() const;
  double min_grad_norm_sq() const;
};

/// Reflected-gradient update x - alpha (I - 2 V V^T) g.
Eigen::VectorXd saddle_step(const Eigen::VectorXd& x, const Basis& V,
                            const Eigen::VectorXd& g, double alpha);

/// Derivative-free saddle search: at each outer step n, take one reflected
/// step along a two-point gradient estimate with step alpha_x(n) and
/// length l(n), then refresh the unstable directions at the new iterate
/// with the inner eigenvector search (same l(n) feeding the inner
/// Hessian-vector samples). V0 empty starts from random unit vectors.
RunRecord saddle_search(Objective& obj, const Eigen::VectorXd& x0,
                        const Basis& V0, const SaddleConfig& cfg,
                        RngStream& rng);

/// Deterministic discretization of the saddle dynamics using analytic
/// derivatives: the reflection basis is the k lowest eigenvectors of the
/// analytic Hessian, recomputed from scratch every step. Correctness
/// reference, not a performance contender.
RunRecord deterministic_saddle_search(Objective& obj,
                                      const Eigen::VectorXd& x0, int k,
                                      const StepSchedule& alpha, int n_max);

}  // namespace zosaddle
