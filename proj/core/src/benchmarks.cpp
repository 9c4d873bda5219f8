#include "zosaddle/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>

namespace zosaddle {

namespace {

bool is_symmetric(const Eigen::MatrixXd& A) {
  const double scale = 1.0 + A.cwiseAbs().maxCoeff();
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace

Objective make_quadratic(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("make_quadratic: A must be square");
  if (!is_symmetric(A))
    throw std::invalid_argument("make_quadratic: A must be symmetric");
  const int d = static_cast<int>(A.rows());

  Reference ref;
  ref.gradient = [A](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return A * x;
  };
  ref.hessian = [A](const Eigen::VectorXd&) -> Eigen::MatrixXd { return A; };

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const auto& ev = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  const bool nonsingular = ev.cwiseAbs().minCoeff() > tol;
  const bool indefinite = ev.minCoeff() < -tol && ev.maxCoeff() > tol;
  if (nonsingular && indefinite) ref.saddle = Eigen::VectorXd::Zero(d);

  return Objective(
      d,
      [A](const Eigen::VectorXd& x) { return 0.5 * x.dot(A * x); },
      std::move(ref), "quadratic");
}

// ---------------------------------------------------------------------------
// Muller-Brown

namespace {

double mb_eval(const MullerBrownParams& p, double x, double y) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double dx = x - p.xbar[i];
    const double dy = y - p.ybar[i];
    sum += p.A[i] * std::exp(p.a[i] * dx * dx + p.b[i] * dx * dy +
                             p.c[i] * dy * dy);
  }
  return sum;
}

Eigen::Vector2d mb_grad(const MullerBrownParams& p, double x, double y) {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (int i = 0; i < 4; ++i) {
    const double dx = x - p.xbar[i];
    const double dy = y - p.ybar[i];
    const double e = p.A[i] * std::exp(p.a[i] * dx * dx + p.b[i] * dx * dy +
                                       p.c[i] * dy * dy);
    g[0] += e * (2.0 * p.a[i] * dx + p.b[i] * dy);
    g[1] += e * (p.b[i] * dx + 2.0 * p.c[i] * dy);
  }
  return g;
}

Eigen::Matrix2d mb_hess(const MullerBrownParams& p, double x, double y) {
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 4; ++i) {
    const double dx = x - p.xbar[i];
    const double dy = y - p.ybar[i];
    const double e = p.A[i] * std::exp(p.a[i] * dx * dx + p.b[i] * dx * dy +
                                       p.c[i] * dy * dy);
    const double gx = 2.0 * p.a[i] * dx + p.b[i] * dy;
    const double gy = p.b[i] * dx + 2.0 * p.c[i] * dy;
    h(0, 0) += e * (gx * gx + 2.0 * p.a[i]);
    h(0, 1) += e * (gx * gy + p.b[i]);
    h(1, 1) += e * (gy * gy + 2.0 * p.c[i]);
  }
  h(1, 0) = h(0, 1);
  return h;
}

// Newton refinement of a critical point of the analytic gradient.
bool mb_newton(const MullerBrownParams& p, Eigen::Vector2d& z) {
  for (int it = 0; it < 100; ++it) {
    const Eigen::Vector2d g = mb_grad(p, z[0], z[1]);
    if (!g.allFinite()) return false;
    if (g.norm() < 1e-13) return true;
    const Eigen::Matrix2d h = mb_hess(p, z[0], z[1]);
    Eigen::Vector2d step = h.fullPivLu().solve(g);
    if (!step.allFinite()) return false;
    if (step.norm() > 0.5) step *= 0.5 / step.norm();
    z -= step;
  }
  return mb_grad(p, z[0], z[1]).norm() < 1e-12;
}

}  // namespace

std::vector<Eigen::Vector2d> muller_brown_critical_points(
    const MullerBrownParams& p) {
  std::vector<Eigen::Vector2d> found;
  const int nx = 36, ny = 36;
  for (int ix = 0; ix <= nx; ++ix) {
    for (int iy = 0; iy <= ny; ++iy) {
      Eigen::Vector2d z(-1.7 + 3.0 * ix / nx, -0.5 + 2.7 * iy / ny);
      if (!mb_newton(p, z)) continue;
      if (z[0] < -2.5 || z[0] > 2.0 || z[1] < -1.0 || z[1] > 3.0) continue;
      bool duplicate = false;
      for (const auto& w : found)
        if ((w - z).norm() < 1e-6) duplicate = true;
      if (!duplicate) found.push_back(z);
    }
  }
  return found;
}

namespace {

// Highest-energy index-1 critical point; the default surface has two, and
// the run from the standard initial condition converges to this one.
// Custom parameter sets may have none, in which case no reference saddle
// is recorded.
std::optional<Eigen::Vector2d> mb_reference_saddle(
    const MullerBrownParams& p) {
  const auto points = muller_brown_critical_points(p);
  std::optional<Eigen::Vector2d> best;
  double best_energy = 0.0;
  for (const auto& z : points) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(mb_hess(p, z[0], z[1]));
    if (es.eigenvalues()[0] < 0.0 && es.eigenvalues()[1] > 0.0) {
      const double e = mb_eval(p, z[0], z[1]);
      if (!best || e > best_energy) {
        best = z;
        best_energy = e;
      }
    }
  }
  return best;
}

}  // namespace

Objective make_muller_brown(const MullerBrownParams& params) {
  Reference ref;
  ref.gradient = [params](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return mb_grad(params, x[0], x[1]);
  };
  ref.hessian = [params](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return mb_hess(params, x[0], x[1]);
  };

  // Cache the saddle scan once per process for the default parameter set;
  // custom parameter sets pay the scan on each construction.
  static const MullerBrownParams defaults;
  auto same = [](const MullerBrownParams& a, const MullerBrownParams& b) {
    return a.A == b.A && a.a == b.a && a.b == b.b && a.c == b.c &&
           a.xbar == b.xbar && a.ybar == b.ybar;
  };
  bool all_zero_amplitude = true;
  for (double amp : params.A)
    if (amp != 0.0) all_zero_amplitude = false;
  if (all_zero_amplitude) {
    ref.saddle.reset();  // flat surface, no critical-point structure
  } else if (same(params, defaults)) {
    static const std::optional<Eigen::Vector2d> cached =
        mb_reference_saddle(defaults);
    if (cached) ref.saddle = *cached;
  } else {
    const auto found = mb_reference_saddle(params);
    if (found) ref.saddle = *found;
  }

  return Objective(
      2,
      [params](const Eigen::VectorXd& x) {
        return mb_eval(params, x[0], x[1]);
      },
      std::move(ref), "muller_brown");
}

// ---------------------------------------------------------------------------
// Modified Rosenbrock

Objective make_mod_rosenbrock(const ModRosenbrockParams& params) {
  return make_mod_rosenbrock(params.d, params.s);
}

Objective make_mod_rosenbrock(int d, const Eigen::VectorXd& s) {
  if (d < 2) throw std::invalid_argument("make_mod_rosenbrock: d must be >= 2");
  if (s.size() != d)
    throw std::invalid_argument("make_mod_rosenbrock: s must have size d");

  Reference ref;
  ref.saddle = Eigen::VectorXd::Ones(d);
  ref.gradient = [d, s](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (int i = 0; i + 1 < d; ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
      g[i + 1] += 200.0 * t;
    }
    for (int i = 0; i < d; ++i) {
      const double u = x[i] - 1.0;
      g[i] += 2.0 * s[i] * std::atan(u) / (1.0 + u * u);
    }
    return g;
  };
  ref.hessian = [d, s](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i + 1 < d; ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      h(i, i) += -400.0 * t + 800.0 * x[i] * x[i] + 2.0;
      h(i, i + 1) += -400.0 * x[i];
      h(i + 1, i) += -400.0 * x[i];
      h(i + 1, i + 1) += 200.0;
    }
    for (int i = 0; i < d; ++i) {
      const double u = x[i] - 1.0;
      const double w = 1.0 + u * u;
      h(i, i) += 2.0 * s[i] * (1.0 - 2.0 * u * std::atan(u)) / (w * w);
    }
    return h;
  };

  return Objective(
      d,
      [d, s](const Eigen::VectorXd& x) {
        double f = 0.0;
        for (int i = 0; i + 1 < d; ++i) {
          const double t = x[i + 1] - x[i] * x[i];
          const double u = 1.0 - x[i];
          f += 100.0 * t * t + u * u;
        }
        for (int i = 0; i < d; ++i) {
          const double a = std::atan(x[i] - 1.0);
          f += s[i] * a * a;
        }
        return f;
      },
      std::move(ref), "mod_rosenbrock");
}

// ---------------------------------------------------------------------------
// Implicitly defined 2-D objective

namespace {

struct ImplicitSolver {
  double tol;
  bool has_warm = false;
  Eigen::Vector2d warm = Eigen::Vector2d::Zero();

  static Eigen::Vector2d inner_grad(const Eigen::Vector2d& xy,
                                    const Eigen::Vector2d& z) {
    const double cosz = std::cos(z[0] * z[1]);
    return {-2.0 * (xy[0] - z[0]) + z[1] * cosz,
            -2.0 * (xy[1] - z[1]) + z[0] * cosz};
  }

  static Eigen::Matrix2d inner_hess(const Eigen::Vector2d& z) {
    const double p = z[0] * z[1];
    const double sinp = std::sin(p);
    const double cosp = std::cos(p);
    Eigen::Matrix2d h;
    h(0, 0) = 2.0 - z[1] * z[1] * sinp;
    h(1, 1) = 2.0 - z[0] * z[0] * sinp;
    h(0, 1) = h(1, 0) = cosp - p * sinp;
    return h;
  }

  static double inner_value(const Eigen::Vector2d& xy,
                            const Eigen::Vector2d& z) {
    const double dx = xy[0] - z[0];
    const double dy = xy[1] - z[1];
    return dx * dx + dy * dy + std::sin(z[0] * z[1]);
  }

  // Damped Newton with a Levenberg shift: an indefinite or rejected step
  // raises the shift (bending the direction toward steepest descent), an
  // accepted step lowers it back toward pure Newton.
  bool newton_from(const Eigen::Vector2d& xy, Eigen::Vector2d& z) const {
    double shift = 0.0;
    for (int it = 0; it < 100; ++it) {
      const Eigen::Vector2d g = inner_grad(xy, z);
      if (g.norm() <= tol) return true;
      const double base = inner_value(xy, z);
      bool accepted = false;
      for (int tries = 0; tries < 60 && !accepted; ++tries) {
        Eigen::Matrix2d h = inner_hess(z);
        h.diagonal().array() += shift;
        const Eigen::Vector2d dir = h.fullPivLu().solve(-g);
        if (dir.allFinite() && dir.dot(g) < 0.0) {
          const Eigen::Vector2d cand = z + dir;
          const bool armijo =
              inner_value(xy, cand) <= base + 1e-4 * dir.dot(g);
          // Once |g| is tiny the value decrease drops below double
          // resolution; Newton still contracts the gradient, so accept on
          // that instead.
          const bool polish = inner_grad(xy, cand).norm() <= 0.9 * g.norm();
          if (armijo || polish) {
            z = cand;
            shift = shift < 1e-11 ? 0.0 : shift * 0.25;
            accepted = true;
          }
        }
        if (!accepted) shift = shift == 0.0 ? 1e-4 : shift * 10.0;
      }
      if (!accepted) return false;
    }
    return inner_grad(xy, z).norm() <= tol;
  }

  Eigen::Vector2d solve(const Eigen::Vector2d& xy) {
    Eigen::Vector2d z = has_warm ? warm : xy;
    if (!newton_from(xy, z)) {
      z = xy;  // cold restart from the query point
      if (!newton_from(xy, z)) {
        const Eigen::Vector2d g = inner_grad(xy, z);
        throw std::runtime_error(
            "implicit_2d: inner solver did not reach tolerance at (" +
            std::to_string(xy[0]) + ", " + std::to_string(xy[1]) +
            "), gradient norm " + std::to_string(g.norm()) + " at z=(" +
            std::to_string(z[0]) + ", " + std::to_string(z[1]) + ")");
      }
    }
    has_warm = true;
    warm = z;
    return z;
  }
};

}  // namespace

Objective make_implicit_2d(double inner_tol) {
  if (inner_tol <= 0.0)
    throw std::invalid_argument("make_implicit_2d: inner_tol must be > 0");

  auto solver = std::make_shared<ImplicitSolver>();
  solver->tol = inner_tol;

  Reference ref;
  ref.saddle = Eigen::Vector2d::Zero();

  // Envelope theorem: the x-gradient of min_z g(x,z) is the partial
  // x-gradient of g at the inner solution. Reference-only; uses a private
  // solver instance so measurements never disturb the eval warm start.
  auto ref_solver = std::make_shared<ImplicitSolver>();
  ref_solver->tol = inner_tol;
  ref.gradient = [ref_solver](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    ref_solver->has_warm = false;
    const Eigen::Vector2d z = ref_solver->solve({x[0], x[1]});
    return Eigen::Vector2d(2.0 * (x[0] - z[0]), 2.0 * (x[1] - z[1]));
  };
  // Implicit-function-theorem Hessian:
  //   d2f = g_xx - g_xz g_zz^{-1} g_zx  evaluated at (x, z*(x)).
  ref.hessian = [ref_solver](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    ref_solver->has_warm = false;
    const Eigen::Vector2d z = ref_solver->solve({x[0], x[1]});
    const Eigen::Matrix2d gxx = 2.0 * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d gxz = -2.0 * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d gzz = ImplicitSolver::inner_hess(z);
    return gxx - gxz * gzz.fullPivLu().solve(gxz.transpose());
  };

  return Objective(
      2,
      [solver](const Eigen::VectorXd& x) {
        const Eigen::Vector2d z = solver->solve({x[0], x[1]});
        return ImplicitSolver::inner_value({x[0], x[1]}, z);
      },
      std::move(ref), "implicit_2d",
      [solver]() { solver->has_warm = false; });
}

// ---------------------------------------------------------------------------
// Linear neural network

int LinearNetSpec::param_dim() const {
  int total = 0;
  for (int h = 1; h <= depth; ++h)
    total += layer_dims[h] * layer_dims[h - 1];
  return total;
}

namespace {

void check_net_spec(const LinearNetSpec& spec) {
  if (spec.depth < 1)
    throw std::invalid_argument("linear_net: depth must be >= 1");
  if (static_cast<int>(spec.layer_dims.size()) != spec.depth + 1)
    throw std::invalid_argument("linear_net: need depth+1 layer dims");
  if (spec.X.rows() != spec.layer_dims.front() ||
      spec.Y.rows() != spec.layer_dims.back() ||
      spec.X.cols() != spec.Y.cols())
    throw std::invalid_argument("linear_net: data shapes inconsistent");
}

std::vector<Eigen::MatrixXd> unflatten(const LinearNetSpec& spec,
                                       const Eigen::VectorXd& w) {
  std::vector<Eigen::MatrixXd> layers;
  layers.reserve(spec.depth);
  int offset = 0;
  for (int h = 1; h <= spec.depth; ++h) {
    const int rows = spec.layer_dims[h];
    const int cols = spec.layer_dims[h - 1];
    layers.emplace_back(
        Eigen::Map<const Eigen::MatrixXd>(w.data() + offset, rows, cols));
    offset += rows * cols;
  }
  return layers;
}

}  // namespace

Objective make_linear_net(const LinearNetSpec& spec) {
  check_net_spec(spec);
  const int dim = spec.param_dim();

  // ||P X - Y||_F^2 = tr(P Sxx P^T) - 2 tr(Syx P^T) + ||Y||_F^2 with
  // P = W_H ... W_1, so the per-eval cost involves only the small layer
  // matrices, never the data.
  const Eigen::MatrixXd sxx = spec.X * spec.X.transpose();
  const Eigen::MatrixXd syx = spec.Y * spec.X.transpose();
  const double y_sq = spec.Y.squaredNorm();

  auto layer_product = [spec](const std::vector<Eigen::MatrixXd>& layers) {
    Eigen::MatrixXd p = layers.back();
    for (int h = spec.depth - 2; h >= 0; --h) p = p * layers[h];
    return p;
  };

  Reference ref;
  ref.gradient = [spec, sxx, syx,
                  layer_product](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    const auto layers = unflatten(spec, w);
    const int H = spec.depth;
    // prefix[h] = W_h ... W_1 (prefix[0] = I), suffix[h] = W_H ... W_{h+1};
    // df/dP = 2 (P Sxx - Syx).
    std::vector<Eigen::MatrixXd> prefix(H + 1);
    prefix[0] = Eigen::MatrixXd::Identity(spec.layer_dims[0],
                                          spec.layer_dims[0]);
    for (int h = 1; h <= H; ++h) prefix[h] = layers[h - 1] * prefix[h - 1];
    std::vector<Eigen::MatrixXd> suffix(H + 1);
    suffix[H] =
        Eigen::MatrixXd::Identity(spec.layer_dims[H], spec.layer_dims[H]);
    for (int h = H - 1; h >= 0; --h) suffix[h] = suffix[h + 1] * layers[h];
    const Eigen::MatrixXd dP = 2.0 * (prefix[H] * sxx - syx);

    Eigen::VectorXd g(w.size());
    int offset = 0;
    for (int h = 1; h <= H; ++h) {
      const Eigen::MatrixXd grad_h =
          suffix[h].transpose() * dP * prefix[h - 1].transpose();
      Eigen::Map<Eigen::MatrixXd>(g.data() + offset, grad_h.rows(),
                                  grad_h.cols()) = grad_h;
      offset += static_cast<int>(grad_h.size());
    }
    return g;
  };

  bool inner_dims_ok = true;
  for (int h = 1; h < spec.depth; ++h)
    if (spec.layer_dims[h] != spec.layer_dims[0]) inner_dims_ok = false;
  if (inner_dims_ok) ref.saddle = construct_net_saddle(spec);

  return Objective(
      dim,
      [spec, sxx, syx, y_sq, layer_product](const Eigen::VectorXd& w) {
        const auto layers = unflatten(spec, w);
        const Eigen::MatrixXd p = layer_product(layers);
        return (p * sxx).cwiseProduct(p).sum() -
               2.0 * syx.cwiseProduct(p).sum() + y_sq;
      },
      std::move(ref), "linear_net");
}

Eigen::VectorXd construct_net_saddle(const LinearNetSpec& spec) {
  check_net_spec(spec);
  const int H = spec.depth;
  const int d0 = spec.layer_dims[0];
  for (int h = 1; h < H; ++h)
    if (spec.layer_dims[h] != d0)
      throw std::invalid_argument(
          "construct_net_saddle: inner layer dims must equal d_0");
  const int dH = spec.layer_dims[H];
  const int r_max = std::min(d0, dH);

  const Eigen::MatrixXd sigma_xx = spec.X * spec.X.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma_xx);
  if (!lu.isInvertible())
    throw std::invalid_argument("construct_net_saddle: Sigma_XX is singular");
  const Eigen::MatrixXd sigma_yx = spec.Y * spec.X.transpose();
  const Eigen::MatrixXd sigma_yx_inv = sigma_yx * lu.inverse();
  const Eigen::MatrixXd sigma = sigma_yx_inv * sigma_yx.transpose();

  // Eigenpairs of Sigma sorted by decreasing eigenvalue; subset indices are
  // 1-based positions in that order.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (sigma + sigma.transpose()));
  const int s_count = static_cast<int>(spec.subset.size());
  Eigen::MatrixXd u_s(dH, s_count);
  for (int j = 0; j < s_count; ++j) {
    const int rank = spec.subset[j];
    if (rank < 1 || rank > r_max)
      throw std::invalid_argument(
          "construct_net_saddle: subset index out of range");
    u_s.col(j) = es.eigenvectors().col(dH - rank);  // ascending -> descending
  }

  std::vector<Eigen::MatrixXd> layers(H);
  layers[0] = Eigen::MatrixXd::Zero(d0, d0);
  if (s_count > 0)
    layers[0].topRows(s_count) = u_s.transpose() * sigma_yx_inv;
  for (int h = 1; h < H - 1; ++h)
    layers[h] = Eigen::MatrixXd::Identity(d0, d0);
  if (H >= 2) {
    layers[H - 1] = Eigen::MatrixXd::Zero(dH, d0);
    if (s_count > 0) layers[H - 1].leftCols(s_count) = u_s;
  } else {
    layers[0] = Eigen::MatrixXd::Zero(dH, d0);
    if (s_count > 0)
      layers[0] = u_s * u_s.transpose() * sigma_yx_inv;
  }

  Eigen::VectorXd w(spec.param_dim());
  int offset = 0;
  for (const auto& layer : layers) {
    Eigen::Map<Eigen::MatrixXd>(w.data() + offset, layer.rows(),
                                layer.cols()) = layer;
    offset += static_cast<int>(layer.size());
  }
  return w;
}

// ---------------------------------------------------------------------------
// Sum of sines

Objective make_sum_of_sines(int d) {
  if (d < 1) throw std::invalid_argument("make_sum_of_sines: d must be >= 1");
  Reference ref;
  ref.gradient = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return x.array().cos();
  };
  ref.hessian = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return Eigen::MatrixXd((-x.array().sin()).matrix().asDiagonal());
  };
  return Objective(
      d, [](const Eigen::VectorXd& x) { return x.array().sin().sum(); },
      std::move(ref), "sum_of_sines");
}

}  // namespace zosaddle
