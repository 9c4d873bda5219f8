#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "zosaddle/benchmarks.hpp"
#include "zosaddle/eigensearch.hpp"
#include "zosaddle/rng.hpp"

using namespace zosaddle;

namespace {

EigenSearchConfig quadratic_search_config(int k, int n_v_max) {
  EigenSearchConfig cfg;
  cfg.k = k;
  cfg.n_v_max = n_v_max;
  cfg.alpha_v = StepSchedule::power_law(1.0, 100.0, 1.0);  // 1/(n+100)
  cfg.length = LengthSchedule::constant(1e-4);
  return cfg;
}

}  // namespace

TEST_CASE("eigen_step: fixed points and the hand-derived update") {
  const Eigen::Vector2d v(1, 0);

  // alpha = 0 leaves v unchanged.
  auto r0 = eigen_step(v, Basis(), Eigen::Vector2d(3, -4), 0.0);
  CHECK_FALSE(r0.degenerate);
  CHECK((r0.v - v).norm() == 0.0);

  // h parallel to v is annihilated by the projector.
  auto r1 = eigen_step(v, Basis(), Eigen::Vector2d(2.5, 0), 0.7);
  CHECK((r1.v - v).norm() == 0.0);

  // v=e1, h=e2, alpha=0.5 -> (1, -0.5)/sqrt(1.25).
  auto r2 = eigen_step(v, Basis(), Eigen::Vector2d(0, 1), 0.5);
  const double inv = 1.0 / std::sqrt(1.25);
  CHECK(r2.v[0] == doctest::Approx(inv).epsilon(1e-14));
  CHECK(r2.v[1] == doctest::Approx(-0.5 * inv).epsilon(1e-14));
}

TEST_CASE("eigen_step: deflation removes previously found directions") {
  // With deflate = {e2}, a step along e2 is projected out entirely.
  Eigen::MatrixXd D(3, 1);
  D << 0, 1, 0;
  const Eigen::Vector3d v(1, 0, 0);
  auto r = eigen_step(v, Basis::from_orthonormal(D), Eigen::Vector3d(0, 5, 0),
                      0.3);
  CHECK((r.v - v).norm() == 0.0);
}

TEST_CASE("eigen_step: update cannot degenerate for unit v") {
  // The projected step is orthogonal to v, so the pre-normalization norm
  // is at least 1; even extreme samples stay well-posed.
  const Eigen::Vector2d v(1, 0);
  RngStream rng(8);
  for (int i = 0; i < 50; ++i) {
    auto r = eigen_step(v, Basis(), 1e6 * rng.standard_normal(2),
                        std::abs(rng.normal()) * 10.0);
    CHECK_FALSE(r.degenerate);
    CHECK(std::abs(r.v.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("eigen_step: vanishing pre-normalization vector flags degenerate") {
  // Out-of-contract input (non-unit v) exercises the 1e-12 guard: the
  // update cancels v exactly and the input comes back flagged.
  const Eigen::Vector2d v(1e-13, 0);
  auto r = eigen_step(v, Basis(), Eigen::Vector2d(1.0, 0), 1e-13);
  CHECK(r.degenerate);
  CHECK((r.v - v).norm() == 0.0);
}

TEST_CASE("subspace_distance: examples") {
  Eigen::MatrixXd e1(2, 1), e2(2, 1);
  e1 << 1, 0;
  e2 << 0, 1;
  const Basis V = Basis::from_orthonormal(e1);
  const Basis W = Basis::from_orthonormal(e2);
  CHECK(subspace_distance(V, V) == 0.0);
  CHECK(subspace_distance(V, W) == doctest::Approx(1.0).epsilon(1e-12));
  const Basis negV = Basis::from_orthonormal(-e1);
  CHECK(subspace_distance(V, negV) == doctest::Approx(0.0));

  Eigen::MatrixXd e13(3, 1);
  e13 << 1, 0, 0;
  CHECK_THROWS_AS(subspace_distance(V, Basis::from_orthonormal(e13)),
                  std::invalid_argument);
}

TEST_CASE("basis: orthonormalization holds for ill-conditioned input") {
  Eigen::MatrixXd cols(4, 3);
  cols.col(0) = Eigen::Vector4d(1, 1, 1, 1);
  cols.col(1) = Eigen::Vector4d(1, 1, 1, 1 + 1e-8);  // nearly parallel
  cols.col(2) = Eigen::Vector4d(2, -1, 0.5, 0.25);
  Basis b = Basis::orthonormalized(cols);
  const Eigen::MatrixXd gram =
      b.matrix().transpose() * b.matrix() - Eigen::MatrixXd::Identity(3, 3);
  CHECK(gram.cwiseAbs().maxCoeff() <= 1e-8);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(b.col(j).norm() - 1.0) <= 1e-10);

  Eigen::MatrixXd dependent(3, 2);
  dependent.col(0) = Eigen::Vector3d(1, 0, 0);
  dependent.col(1) = Eigen::Vector3d(2, 0, 0);
  CHECK_THROWS_AS(Basis::orthonormalized(dependent), std::invalid_argument);
}

TEST_CASE("eigen_search: n_v_max = 0 returns V0 re-orthonormalized") {
  Objective q = make_quadratic(Eigen::Vector3d(-2, 1, 3).asDiagonal());
  RngStream rng(1);
  Eigen::MatrixXd cols(3, 2);
  cols.col(0) = Eigen::Vector3d(1, 0.01, 0);
  cols.col(1) = Eigen::Vector3d(0.01, 1, 0);
  const Basis V0 = Basis::orthonormalized(cols);
  EigenSearchConfig cfg = quadratic_search_config(2, 0);
  const long long evals_before = q.eval_count();
  const Basis out = eigen_search(q, Eigen::Vector3d::Zero(), V0, cfg, rng);
  CHECK(q.eval_count() == evals_before);
  CHECK(subspace_distance(out, V0) <= 1e-10);
}

TEST_CASE("eigen_search: finds the most unstable direction of diag(-2,1,3)") {
  Objective q = make_quadratic(Eigen::Vector3d(-2, 1, 3).asDiagonal());
  RngStream rng(12345);
  EigenSearchConfig cfg = quadratic_search_config(1, 3000);
  EigenSearchDiagnostics diag;
  const Basis v =
      eigen_search(q, Eigen::Vector3d::Zero(), Basis(), cfg, rng, &diag);
  CHECK(std::abs(v.col(0)[0]) >= 0.99);
  CHECK(diag.iterations[0] == 3000);
  CHECK(diag.evals_used == 4 * 3000);
}

TEST_CASE("eigen_search: k=2 subspace of diag(-2,1,3)") {
  Objective q = make_quadratic(Eigen::Vector3d(-2, 1, 3).asDiagonal());
  RngStream rng(777);
  EigenSearchConfig cfg = quadratic_search_config(2, 5000);
  const Basis V = eigen_search(q, Eigen::Vector3d::Zero(), Basis(), cfg, rng);

  Eigen::MatrixXd target(3, 2);
  target << 1, 0, 0, 1, 0, 0;
  CHECK(subspace_distance(V, Basis::from_orthonormal(target)) <= 0.1);

  // Output is orthonormal regardless of the stochastic path.
  const Eigen::MatrixXd gram =
      V.matrix().transpose() * V.matrix() - Eigen::MatrixXd::Identity(2, 2);
  CHECK(gram.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("eigen_search: sign invariance under V0 -> -V0 with equal seeds") {
  Objective q1 = make_quadratic(Eigen::Vector3d(-2, 1, 3).asDiagonal());
  Objective q2 = make_quadratic(Eigen::Vector3d(-2, 1, 3).asDiagonal());
  Eigen::MatrixXd cols(3, 1);
  cols << 0.6, 0.64, 0.48;
  const Basis V0 = Basis::orthonormalized(cols);
  const Basis negV0 = Basis::orthonormalized(-cols);
  EigenSearchConfig cfg = quadratic_search_config(1, 400);
  RngStream r1(555), r2(555);
  const Basis a = eigen_search(q1, Eigen::Vector3d::Zero(), V0, cfg, r1);
  const Basis b = eigen_search(q2, Eigen::Vector3d::Zero(), negV0, cfg, r2);
  CHECK((a.projector() - b.projector()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("eigen_search: Rayleigh quotient decreases on average") {
  const Eigen::Matrix3d A = Eigen::Vector3d(-2, 1, 3).asDiagonal();
  double before = 0.0, after = 0.0;
  const int runs = 100;
  for (int s = 0; s < runs; ++s) {
    Objective q = make_quadratic(A);
    RngStream rng(9000 + s);
    const Eigen::VectorXd v0 = rng.unit_vector(3);
    Eigen::MatrixXd cols(3, 1);
    cols.col(0) = v0;
    EigenSearchConfig cfg = quadratic_search_config(1, 2000);
    const Basis out =
        eigen_search(q, Eigen::Vector3d::Zero(), Basis::from_orthonormal(cols),
                     cfg, rng);
    before += v0.dot(A * v0);
    after += out.col(0).dot(A * out.col(0));
  }
  CHECK(after / runs < before / runs);
}

TEST_CASE("eigen_search: residual-batch stopping fires in finite time") {
  Objective q = make_quadratic(Eigen::Vector3d(-2, 1, 3).asDiagonal());
  for (int s = 0; s < 3; ++s) {
    RngStream rng(40 + s);
    EigenSearchConfig cfg = quadratic_search_config(1, 20000);
    cfg.stopping = ResidualBatchStop{0.1, 100, 0.0, 0.0};
    EigenSearchDiagnostics diag;
    eigen_search(q, Eigen::Vector3d::Zero(), Basis(), cfg, rng, &diag);
    CHECK(diag.iterations[0] < 20000);
    CHECK(diag.final_residuals[0] < 0.1);
  }
}

TEST_CASE("eigen_search: warm start with the true basis fires immediately") {
  // With V0 the exact eigenvector and a large batch, the residual check
  // passes within 10 iterations in >= 90% of seeds.
  const Eigen::Matrix3d A = Eigen::Vector3d(-2, 1, 3).asDiagonal();
  Eigen::MatrixXd e1(3, 1);
  e1 << 1, 0, 0;
  int hits = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Objective q = make_quadratic(A);
    RngStream rng(7000 + s);
    EigenSearchConfig cfg = quadratic_search_config(1, 10);
    cfg.stopping = ResidualBatchStop{0.05, 10000, 0.0, 0.0};
    EigenSearchDiagnostics diag;
    eigen_search(q, Eigen::Vector3d::Zero(), Basis::from_orthonormal(e1), cfg,
                 rng, &diag);
    if (diag.iterations[0] < 10) ++hits;
  }
  CHECK(hits >= 18);
}

TEST_CASE("eigen_search: residual-batch evaluation accounting") {
  // Each inner iteration spends 4m evaluations on the criterion check and
  // 4 on the update; a check that fires skips the update.
  const Eigen::Matrix3d A = Eigen::Vector3d(-2, 1, 3).asDiagonal();
  const int m = 13;

  {  // fires at the very first check
    Objective q = make_quadratic(A);
    RngStream rng(61);
    EigenSearchConfig cfg = quadratic_search_config(1, 50);
    cfg.stopping = ResidualBatchStop{1e9, m, 0.0, 0.0};
    EigenSearchDiagnostics diag;
    eigen_search(q, Eigen::Vector3d::Zero(), Basis(), cfg, rng, &diag);
    CHECK(diag.iterations[0] == 0);
    CHECK(diag.evals_used == 4 * m);
  }
  {  // never fires: n_v_max checks and n_v_max updates
    Objective q = make_quadratic(A);
    RngStream rng(62);
    EigenSearchConfig cfg = quadratic_search_config(1, 25);
    cfg.stopping = ResidualBatchStop{1e-300, m, 0.0, 0.0};
    EigenSearchDiagnostics diag;
    eigen_search(q, Eigen::Vector3d::Zero(), Basis(), cfg, rng, &diag);
    CHECK(diag.iterations[0] == 25);
    CHECK(diag.evals_used == 25LL * (4 * m + 4));
  }
}

TEST_CASE("eigen_search: growth-rule batch size resolution") {
  ResidualBatchStop stop;
  stop.eps = 0.1;
  stop.m = 0;
  stop.growth_c = 2.0;
  stop.growth_p = 1.5;
  CHECK(stop.batch_size(1) == 2);
  CHECK(stop.batch_size(4) == 16);          // 2 * 4^1.5 = 16
  CHECK(stop.batch_size(0) == 2);           // clamped to n >= 1
  stop.growth_c = 0.0;
  stop.m = 7;
  CHECK(stop.batch_size(99) == 7);
}

TEST_CASE("eigen_search: config validation") {
  Objective q = make_quadratic(Eigen::Vector3d(-2, 1, 3).asDiagonal());
  RngStream rng(3);
  EigenSearchConfig cfg = quadratic_search_config(3, 10);  // k = d rejected
  CHECK_THROWS_AS(eigen_search(q, Eigen::Vector3d::Zero(), Basis(), cfg, rng),
                  std::invalid_argument);
  cfg = quadratic_search_config(1, 10);
  cfg.stopping = ResidualBatchStop{-1.0, 10, 0.0, 0.0};
  CHECK_THROWS_AS(eigen_search(q, Eigen::Vector3d::Zero(), Basis(), cfg, rng),
                  std::invalid_argument);
}
