#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "zosaddle/benchmarks.hpp"
#include "zosaddle/eigensearch.hpp"
#include "zosaddle/estimators.hpp"
#include "zosaddle/rng.hpp"
#include "zosaddle/saddlesearch.hpp"

using namespace zosaddle;

static void BM_MullerBrownEval(benchmark::State& state) {
  Objective mb = make_muller_brown();
  const Eigen::Vector2d x(0.1, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(mb.eval(x));
}
BENCHMARK(BM_MullerBrownEval);

static void BM_ImplicitEval(benchmark::State& state) {
  Objective f = make_implicit_2d();
  RngStream rng(1);
  for (auto _ : state) {
    const Eigen::Vector2d x = 0.3 * rng.standard_normal(2);
    benchmark::DoNotOptimize(f.eval(x));
  }
}
BENCHMARK(BM_ImplicitEval);

static void BM_LinearNetEval(benchmark::State& state) {
  LinearNetSpec spec;
  spec.depth = 5;
  spec.layer_dims = {10, 10, 10, 10, 10, 4};
  RngStream data_rng(1);
  spec.X.resize(10, 100);
  for (int j = 0; j < 100; ++j) spec.X.col(j) = data_rng.standard_normal(10);
  spec.Y.resize(4, 100);
  for (int j = 0; j < 100; ++j) spec.Y.col(j) = data_rng.standard_normal(4);
  spec.subset = {1, 2};
  Objective f = make_linear_net(spec);
  const Eigen::VectorXd w = construct_net_saddle(spec);
  for (auto _ : state) benchmark::DoNotOptimize(f.eval(w));
}
BENCHMARK(BM_LinearNetEval);

static void BM_GradEstimate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Eigen::VectorXd s = Eigen::VectorXd::Ones(d);
  s[0] = -50;
  Objective f = make_mod_rosenbrock(d, s);
  RngStream rng(2);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(d);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        grad_estimate(f, x, rng.standard_normal(d), 1e-4));
  state.SetComplexityN(d);
}
BENCHMARK(BM_GradEstimate)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

static void BM_HessVecEstimate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Eigen::VectorXd s = Eigen::VectorXd::Ones(d);
  s[0] = -50;
  Objective f = make_mod_rosenbrock(d, s);
  RngStream rng(3);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(d);
  const Eigen::VectorXd v = rng.unit_vector(d);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        hess_vec_estimate(f, x, v, rng.standard_normal(d), 1e-4));
  state.SetComplexityN(d);
}
BENCHMARK(BM_HessVecEstimate)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

static void BM_EigenSearchStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Objective q = make_quadratic(Eigen::MatrixXd::Identity(d, d));
  RngStream rng(4);
  Eigen::VectorXd v = rng.unit_vector(d);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  for (auto _ : state) {
    const Eigen::VectorXd h =
        hess_vec_estimate(q, x, v, rng.standard_normal(d), 1e-4);
    v = eigen_step(v, Basis(), h, 1e-4).v;
    benchmark::DoNotOptimize(v);
  }
  state.SetComplexityN(d);
}
BENCHMARK(BM_EigenSearchStep)->RangeMultiplier(4)->Range(4, 256)->Complexity();

static void BM_SaddleSearchMullerBrown(benchmark::State& state) {
  for (auto _ : state) {
    Objective mb = make_muller_brown();
    SaddleConfig cfg;
    cfg.k = 1;
    cfg.n_x_max = 100;
    cfg.alpha_x = StepSchedule::constant(1e-4);
    cfg.length = LengthSchedule::constant(1e-3);
    cfg.inner.n_v_max = 100;
    cfg.inner.alpha_v = StepSchedule::constant(2e-4);
    cfg.seed = 9;
    RngStream rng(cfg.seed);
    benchmark::DoNotOptimize(
        saddle_search(mb, Eigen::Vector2d(0, 1), Basis(), cfg, rng));
  }
}
BENCHMARK(BM_SaddleSearchMullerBrown)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
