#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "zosaddle/estimators.hpp"
#include "zosaddle/objective.hpp"
#include "zosaddle/rng.hpp"
#include "zosaddle/schedules.hpp"

namespace zosaddle {

/// Orthonormal set of unstable-direction estimates, stored column-wise.
/// Construction and orthonormalize() leave columns unit (within 1e-10)
/// and mutually orthogonal (within 1e-8).
class Basis {
 public:
  Basis() = default;

  /// Orthonormalizes the given columns by modified Gram-Schmidt.
  static Basis orthonormalized(Eigen::MatrixXd columns);

  /// Adopts columns that are already orthonormal (cheap debug check only).
  static Basis from_orthonormal(Eigen::MatrixXd columns);

  bool empty() const { return cols_.size() == 0; }
  int dim() const { return static_cast<int>(cols_.rows()); }
  int k() const { return static_cast<int>(cols_.cols()); }
  const Eigen::MatrixXd& matrix() const { return cols_; }
  Eigen::VectorXd col(int j) const { return cols_.col(j); }

  /// V V^T (dense; for tests and small-d diagnostics).
  Eigen::MatrixXd projector() const { return cols_ * cols_.transpose(); }

  void orthonormalize();

 private:
  Eigen::MatrixXd cols_;
};

/// Spectral norm of V V^T - W W^T; the subspace error metric used by the
/// tests. Requires matching dimension and column count.
double subspace_distance(const Basis& V, const Basis& W);

/// Opt-in stopping rule: stop the inner iteration for a direction as soon
/// as || P * Hbar_v || < eps, where Hbar_v averages m Hessian-vector
/// samples and P removes the current direction and any deflated ones.
/// When growth_c > 0, the batch size becomes ceil(growth_c * n_outer^
/// growth_p) (at least 1), following the sample-size rule for the outer
/// iteration index n_outer.
struct ResidualBatchStop {
  double eps = 0.0;
  int m = 1;
  double growth_c = 0.0;
  double growth_p = 0.0;

  int batch_size(int n_outer) const;
};

struct EigenSearchConfig {
  int k = 1;
  int n_v_max = 100;
  StepSchedule alpha_v;
  LengthSchedule length;
  std::optional<ResidualBatchStop> stopping;  // nullopt = fixed iterations

  void validate(int dim) const;
};

struct EigenStepResult {
  Eigen::VectorXd v;
  bool degenerate = false;
};

struct EigenSearchDiagnostics {
  std::vector<int> iterations;        // per direction
  std::vector<double> final_residuals;  // per direction, ResidualBatch only
  int degenerate_steps = 0;
  long long evals_used = 0;
};

/// One projected update v <- normalize(v - alpha (I - v v^T - D D^T) h).
/// If the pre-normalization vector nearly vanishes (< 1e-12) the input is
/// returned unchanged with the degenerate flag set so the caller may
/// resample.
EigenStepResult eigen_step(const Eigen::VectorXd& v, const Basis& deflate,
                           const Eigen::VectorXd& h, double alpha);

/// Derivative-free search for the k most unstable directions of the
/// Hessian at x. Directions are found sequentially with deflation; each
/// direction runs up to cfg.n_v_max Hessian-vector updates (the residual
/// stopping rule, when configured, is checked before every update). The
/// returned Basis is re-orthonormalized by modified Gram-Schmidt.
Basis eigen_search(Objective& obj, const Eigen::VectorXd& x, const Basis& V0,
                   const EigenSearchConfig& cfg, RngStream& rng,
                   EigenSearchDiagnostics* diag = nullptr);

}  // namespace zosaddle
