#include "zosaddle/eigensearch.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace zosaddle {

Basis Basis::orthonormalized(Eigen::MatrixXd columns) {
  Basis b;
  b.cols_ = std::move(columns);
  b.orthonormalize();
  return b;
}

Basis Basis::from_orthonormal(Eigen::MatrixXd columns) {
  Basis b;
  b.cols_ = std::move(columns);
  return b;
}

void Basis::orthonormalize() {
  const int k = static_cast<int>(cols_.cols());
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < j; ++i)
      cols_.col(j) -= cols_.col(i).dot(cols_.col(j)) * cols_.col(i);
    const double n = cols_.col(j).norm();
    if (n < 1e-14)
      throw std::invalid_argument(
          "Basis::orthonormalize: columns are numerically dependent");
    cols_.col(j) /= n;
  }
}

double subspace_distance(const Basis& V, const Basis& W) {
  if (V.dim() != W.dim() || V.k() != W.k())
    throw std::invalid_argument("subspace_distance: shape mismatch");
  const Eigen::MatrixXd diff = V.projector() - W.projector();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

int ResidualBatchStop::batch_size(int n_outer) const {
  if (growth_c <= 0.0) return m;
  const double raw = growth_c * std::pow(std::max(n_outer, 1), growth_p);
  return std::max(1, static_cast<int>(std::ceil(raw)));
}

void EigenSearchConfig::validate(int dim) const {
  if (k < 1 || k > dim - 1)
    throw std::invalid_argument("eigen_search: k must lie in [1, d-1]");
  if (n_v_max < 0)
    throw std::invalid_argument("eigen_search: n_v_max must be >= 0");
  if (stopping) {
    if (!(stopping->eps > 0.0))
      throw std::invalid_argument("eigen_search: residual eps must be > 0");
    if (stopping->m < 1 && stopping->growth_c <= 0.0)
      throw std::invalid_argument("eigen_search: residual batch must be >= 1");
  }
}

EigenStepResult eigen_step(const Eigen::VectorXd& v, const Basis& deflate,
                           const Eigen::VectorXd& h, double alpha) {
  Eigen::VectorXd projected = h - v * v.dot(h);
  if (!deflate.empty())
    projected -= deflate.matrix() * (deflate.matrix().transpose() * h);
  Eigen::VectorXd updated = v - alpha * projected;
  const double n = updated.norm();
  if (n < 1e-12) return {v, true};
  return {updated / n, false};
}

namespace {

// Residual of the deflated iteration: || (I - v v^T - D D^T) Hbar_v ||.
// For the first direction this is exactly the batched residual statistic.
double deflated_batch_residual(Objective& obj, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v, const Basis& deflate,
                               double l, int m, RngStream& rng) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < m; ++i)
    mean += hess_vec_estimate(obj, x, v, rng.standard_normal(d), l);
  mean /= static_cast<double>(m);
  Eigen::VectorXd res = mean - v * v.dot(mean);
  if (!deflate.empty())
    res -= deflate.matrix() * (deflate.matrix().transpose() * mean);
  return res.norm();
}

}  // namespace

Basis eigen_search(Objective& obj, const Eigen::VectorXd& x, const Basis& V0,
                   const EigenSearchConfig& cfg, RngStream& rng,
                   EigenSearchDiagnostics* diag) {
  const int d = static_cast<int>(x.size());
  cfg.validate(d);
  if (!V0.empty() && (V0.dim() != d || V0.k() != cfg.k))
    throw std::invalid_argument("eigen_search: V0 shape mismatch");

  const long long evals_before = obj.eval_count();
  Eigen::MatrixXd V(d, cfg.k);
  for (int j = 0; j < cfg.k; ++j) {
    if (!V0.empty())
      V.col(j) = V0.col(j);
    else
      V.col(j) = rng.unit_vector(d);
  }

  if (diag) {
    diag->iterations.assign(cfg.k, 0);
    diag->final_residuals.clear();
    diag->degenerate_steps = 0;
  }

  for (int j = 0; j < cfg.k; ++j) {
    // Project onto the orthogonal complement of the directions found so
    // far, resampling if the start is degenerate against them.
    Eigen::VectorXd v = V.col(j);
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXd w = v;
      for (int i = 0; i < j; ++i) w -= V.col(i).dot(w) * V.col(i);
      const double n = w.norm();
      if (n >= 1e-12) {
        v = w / n;
        break;
      }
      if (attempt >= 32)
        throw std::runtime_error(
            "eigen_search: could not initialize a direction orthogonal to "
            "the deflation set");
      v = rng.unit_vector(d);
    }

    const Basis deflate =
        j > 0 ? Basis::from_orthonormal(V.leftCols(j)) : Basis();

    // The sample-size growth rule is indexed by the outer saddle iteration;
    // the outer search resolves it into a literal m before calling here.
    const int batch_m = cfg.stopping ? std::max(1, cfg.stopping->m) : 0;

    int consecutive_degenerate = 0;
    double last_residual = std::numeric_limits<double>::quiet_NaN();
    int n_done = 0;
    for (int n = 0; n < cfg.n_v_max; ++n) {
      if (cfg.stopping) {
        last_residual = deflated_batch_residual(
            obj, x, v, deflate, cfg.length.eval(n, cfg.alpha_v), batch_m, rng);
        if (last_residual < cfg.stopping->eps) break;
      }
      const double l = cfg.length.eval(n, cfg.alpha_v);
      const Eigen::VectorXd r = rng.standard_normal(d);
      const Eigen::VectorXd h = hess_vec_estimate(obj, x, v, r, l);
      const EigenStepResult step = eigen_step(v, deflate, h, cfg.alpha_v.eval(n));
      if (step.degenerate) {
        if (diag) ++diag->degenerate_steps;
        if (++consecutive_degenerate > 10)
          throw std::runtime_error(
              "eigen_search: more than 10 consecutive degenerate updates");
      } else {
        consecutive_degenerate = 0;
        v = step.v;
      }
      ++n_done;
    }
    V.col(j) = v;
    if (diag) {
      diag->iterations[j] = n_done;
      if (cfg.stopping) diag->final_residuals.push_back(last_residual);
    }
  }

  Basis out = Basis::orthonormalized(std::move(V));
  if (diag) diag->evals_used = obj.eval_count() - evals_before;
  return out;
}

}  // namespace zosaddle
