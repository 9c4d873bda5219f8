#include "zosaddle/saddlesearch.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "zosaddle/estimators.hpp"

namespace zosaddle {

void SaddleConfig::validate(int dim) const {
  if (k < 1 || k > dim - 1)
    throw std::invalid_argument("saddle_search: k must lie in [1, d-1]");
  if (n_x_max < 0)
    throw std::invalid_argument("saddle_search: n_x_max must be >= 0");
  EigenSearchConfig inner_check = inner;
  inner_check.k = k;
  inner_check.validate(dim);
}

double RunRecord::min_dist_sq() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : rows)
    if (row.dist_sq && *row.dist_sq < best) best = *row.dist_sq;
  return best;
}

double RunRecord::min_grad_norm_sq() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : rows)
    if (row.grad_norm_sq && *row.grad_norm_sq < best) best = *row.grad_norm_sq;
  return best;
}

Eigen::VectorXd saddle_step(const Eigen::VectorXd& x, const Basis& V,
                            const Eigen::VectorXd& g, double alpha) {
  if (V.empty()) return x - alpha * g;
  return x - alpha * (g - 2.0 * (V.matrix() * (V.matrix().transpose() * g)));
}

namespace {

RunRow make_row(Objective& obj, int n, const Eigen::VectorXd& x,
                long long evals_base) {
  RunRow row;
  row.n = n;
  row.x = x;
  if (obj.has_saddle())
    row.dist_sq = (x - obj.known_saddle()).squaredNorm();
  if (obj.has_gradient()) row.grad_norm_sq = obj.analytic_gradient(x).squaredNorm();
  row.cumulative_evals = obj.eval_count() - evals_base;
  return row;
}

}  // namespace

RunRecord saddle_search(Objective& obj, const Eigen::VectorXd& x0,
                        const Basis& V0, const SaddleConfig& cfg,
                        RngStream& rng) {
  const int d = obj.dim();
  cfg.validate(d);
  if (x0.size() != d)
    throw std::invalid_argument("saddle_search: x0 dimension mismatch");
  if (!V0.empty() && (V0.dim() != d || V0.k() != cfg.k))
    throw std::invalid_argument("saddle_search: V0 shape mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  RunRecord record;
  record.config = cfg;
  record.seed = cfg.seed;
  for (const auto& w : cfg.alpha_x.validate()) record.warnings.push_back(w);
  for (const auto& w : cfg.inner.alpha_v.validate())
    record.warnings.push_back(w);

  const long long evals_base = obj.eval_count();
  const double divergence_radius = 1e6 * (1.0 + x0.norm());
  bool roundoff_warned = false;

  Eigen::VectorXd x = x0;
  Basis V = V0;
  if (V.empty()) {
    Eigen::MatrixXd init(d, cfg.k);
    for (int j = 0; j < cfg.k; ++j) init.col(j) = rng.unit_vector(d);
    V = Basis::orthonormalized(std::move(init));
  }

  record.rows.reserve(cfg.n_x_max + 1);
  record.rows.push_back(make_row(obj, 0, x, evals_base));

  for (int n = 0; n < cfg.n_x_max; ++n) {
    const double alpha = cfg.alpha_x.eval(n);
    const double l = cfg.length.eval(n, cfg.alpha_x);

    if (!roundoff_warned && obj.observed_scale() > 0.0 &&
        l * l < 1e3 * std::numeric_limits<double>::epsilon() *
                    obj.observed_scale()) {
      record.warnings.push_back(
          "difference length l(n)=" + std::to_string(l) +
          " is small enough that quotients may be dominated by round-off");
      roundoff_warned = true;
    }

    try {
      const Eigen::VectorXd r = rng.standard_normal(d);
      const Eigen::VectorXd g = grad_estimate(obj, x, r, l);
      x = saddle_step(x, V, g, alpha);

      if (!x.allFinite()) {
        record.rows.push_back(make_row(obj, n + 1, x, evals_base));
        record.aborted = true;
        record.abort_reason = "non-finite iterate at outer iteration " +
                              std::to_string(n + 1);
        break;
      }
      if (x.norm() > divergence_radius) {
        record.rows.push_back(make_row(obj, n + 1, x, evals_base));
        record.aborted = true;
        record.abort_reason =
            "iterate diverged beyond 1e6*(1+|x0|) at outer iteration " +
            std::to_string(n + 1);
        break;
      }

      // Inner search at the new iterate, fed with the same l(n). The
      // sample-size growth rule (when configured) resolves against the
      // outer index here.
      EigenSearchConfig inner = cfg.inner;
      inner.k = cfg.k;
      inner.length = LengthSchedule::constant(l);
      if (inner.stopping && inner.stopping->growth_c > 0.0) {
        inner.stopping->m = inner.stopping->batch_size(n + 1);
        inner.stopping->growth_c = 0.0;
      }
      const Basis start = cfg.warm_start ? V : Basis();
      V = eigen_search(obj, x, start, inner, rng);
    } catch (const std::exception& e) {
      record.aborted = true;
      record.abort_reason = e.what();
      break;
    }

    record.rows.push_back(make_row(obj, n + 1, x, evals_base));
  }

  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return record;
}

RunRecord deterministic_saddle_search(Objective& obj,
                                      const Eigen::VectorXd& x0, int k,
                                      const StepSchedule& alpha, int n_max) {
  const int d = obj.dim();
  if (!obj.has_gradient() || !obj.has_hessian())
    throw std::invalid_argument(
        "deterministic_saddle_search: analytic derivatives required");
  if (k < 1 || k > d - 1)
    throw std::invalid_argument(
        "deterministic_saddle_search: k must lie in [1, d-1]");

  const auto t0 = std::chrono::steady_clock::now();
  RunRecord record;
  record.config.k = k;
  record.config.n_x_max = n_max;
  record.config.alpha_x = alpha;

  const long long evals_base = obj.eval_count();
  Eigen::VectorXd x = x0;
  Eigen::MatrixXd prev_V;
  bool gap_warned = false;

  record.rows.push_back(make_row(obj, 0, x, evals_base));
  for (int n = 0; n < n_max; ++n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(obj.analytic_hessian(x));
    Eigen::MatrixXd V = es.eigenvectors().leftCols(k);
    if (!gap_warned && k < d &&
        es.eigenvalues()[k] - es.eigenvalues()[k - 1] < 1e-12) {
      record.warnings.push_back(
          "eigenvalues k and k+1 are nearly degenerate at outer iteration " +
          std::to_string(n) + "; the reflected subspace is ill-determined");
      gap_warned = true;
    }
    // Align eigenvector signs with the previous step for trace continuity.
    if (prev_V.size() > 0)
      for (int j = 0; j < k; ++j)
        if (prev_V.col(j).dot(V.col(j)) < 0.0) V.col(j) = -V.col(j);
    prev_V = V;

    const Eigen::VectorXd g = obj.analytic_gradient(x);
    x = x - alpha.eval(n) *
                (g - 2.0 * (V * (V.transpose() * g)));
    if (!x.allFinite()) {
      record.rows.push_back(make_row(obj, n + 1, x, evals_base));
      record.aborted = true;
      record.abort_reason = "non-finite iterate at outer iteration " +
                            std::to_string(n + 1);
      break;
    }
    record.rows.push_back(make_row(obj, n + 1, x, evals_base));
  }

  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return record;
}

}  // namespace zosaddle
