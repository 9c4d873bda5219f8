// Command-line driver: replicated saddle searches, the plateau table,
// the estimator variance study, the deterministic baseline, and estimator
// moment diagnostics. Exit codes: 0 success, 1 replica/check failure,
// 2 configuration error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "zosaddle/benchmarks.hpp"
#include "zosaddle/estimators.hpp"
#include "zosaddle/harness.hpp"
#include "zosaddle/registry.hpp"

using namespace zosaddle;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config \"" + path + "\"");
  json j;
  in >> j;
  return j;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  long long seed_base = -1;
  bool quiet = false;
};

ExperimentConfig load_experiment(const CommonOpts& opts) {
  ExperimentConfig cfg = parse_experiment_config(load_json(opts.config_path));
  if (opts.seed_base >= 0)
    cfg.seed_base = static_cast<std::uint64_t>(opts.seed_base);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  return cfg;
}

int effective_jobs(const CommonOpts& opts) {
  if (opts.jobs > 0) return opts.jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void print_warnings(const std::vector<RunRecord>& records, bool quiet) {
  if (quiet) return;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& w : records[i].warnings)
      std::fprintf(stderr, "[replica %zu] warning: %s\n", i, w.c_str());
    if (records[i].aborted)
      std::fprintf(stderr, "[replica %zu] aborted: %s\n", i,
                   records[i].abort_reason.c_str());
  }
}

int cmd_run(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_experiment(opts);
  const auto records = run_replicas(cfg, effective_jobs(opts));
  const auto written = emit(records, cfg, cfg.out_dir);
  print_warnings(records, opts.quiet);
  bool any_failed = false;
  for (const auto& rec : records) any_failed |= rec.aborted;
  if (!opts.quiet) {
    std::printf("wrote %zu files under %s\n", written.size(),
                cfg.out_dir.c_str());
    bool all_dist = true;
    for (const auto& rec : records)
      all_dist &= std::isfinite(rec.min_dist_sq());
    if (!any_failed && all_dist)
      std::printf("plateau (mean of per-replica min dist_sq): %s\n",
                  format_double(plateau_stat(records)).c_str());
  }
  return any_failed ? kExitRunFailure : kExitOk;
}

int cmd_table(const CommonOpts& opts) {
  const json j = load_json(opts.config_path);
  if (!j.contains("ladder"))
    throw std::invalid_argument("table: config needs a \"ladder\" object");
  std::vector<double> l_values =
      j.at("ladder").at("l_values").get<std::vector<double>>();
  std::vector<double> alpha_values =
      j.at("ladder").at("alpha_values").get<std::vector<double>>();
  ExperimentConfig base = parse_experiment_config(j);
  if (opts.seed_base >= 0)
    base.seed_base = static_cast<std::uint64_t>(opts.seed_base);
  if (!opts.out_dir.empty()) base.out_dir = opts.out_dir;

  std::vector<std::tuple<double, double, double>> cells;
  bool any_failed = false;
  for (double alpha : alpha_values) {
    for (double l : l_values) {
      ExperimentConfig cfg = base;
      cfg.saddle.alpha_x = StepSchedule::constant(alpha);
      cfg.saddle.length = LengthSchedule::constant(l);
      const auto records = run_replicas(cfg, effective_jobs(opts));
      for (const auto& rec : records) any_failed |= rec.aborted;
      const double plateau = plateau_stat(records);
      cells.emplace_back(l, alpha, plateau);
      if (!opts.quiet)
        std::printf("l=%s alpha=%s plateau=%s\n", format_double(l).c_str(),
                    format_double(alpha).c_str(),
                    format_double(plateau).c_str());
    }
  }

  const SummaryTable table = SummaryTable::build(cells);
  namespace fs = std::filesystem;
  fs::create_directories(base.out_dir);
  {
    std::ofstream csv(fs::path(base.out_dir) / "table.csv");
    csv << table.to_csv();
  }
  json doc = {{"config", experiment_config_to_json(base)},
              {"table", table.to_json()}};
  json orders = json::object();
  for (double alpha : alpha_values) {
    std::vector<std::pair<double, double>> ladder;
    for (const auto& [l, a, p] : cells)
      if (a == alpha) ladder.emplace_back(l, p);
    if (ladder.size() >= 3) {
      const double order = fit_decay_order(ladder);
      orders[format_double(alpha)] = order;
      if (!opts.quiet)
        std::printf("alpha=%s fitted decay order: %.4f\n",
                    format_double(alpha).c_str(), order);
    }
  }
  doc["fitted_orders"] = orders;
  {
    std::ofstream out(fs::path(base.out_dir) / "table.json");
    out << doc.dump(2) << "\n";
  }
  if (!opts.quiet)
    std::printf("wrote table.csv and table.json under %s\n",
                base.out_dir.c_str());
  return any_failed ? kExitRunFailure : kExitOk;
}

int cmd_variance(const std::string& benchmark, std::vector<int> dims,
                 int samples, double l, std::uint64_t seed,
                 const std::string& out_dir, bool quiet) {
  RngStream rng(seed);
  std::function<Objective(int)> family;
  std::function<Eigen::VectorXd(Objective&, RngStream&)> pick;
  if (benchmark == "quadratic") {
    family = [](int d) {
      return make_quadratic(Eigen::MatrixXd::Identity(d, d));
    };
    pick = [](Objective& obj, RngStream&) {
      return Eigen::VectorXd(Eigen::VectorXd::Zero(obj.dim()));
    };
  } else if (benchmark == "mod_rosenbrock") {
    family = [](int d) {
      Eigen::VectorXd s = Eigen::VectorXd::Ones(d);
      s[0] = -50;
      return make_mod_rosenbrock(d, s);
    };
    // Near-saddle point x* + 0.5 r.
    pick = [](Objective& obj, RngStream& r) {
      return Eigen::VectorXd(Eigen::VectorXd::Ones(obj.dim()) +
                             0.5 * r.standard_normal(obj.dim()));
    };
  } else {
    throw std::invalid_argument("variance: unknown benchmark \"" + benchmark +
                                "\" (quadratic | mod_rosenbrock)");
  }

  const auto rows = variance_study(family, pick, dims, samples, l, rng);
  std::string csv =
      "d,hessian_entry_std,hess_vec_entry_std,"
      "hessian_norm_sq_mean,hess_vec_norm_sq_mean\n";
  for (const auto& row : rows) {
    csv += std::to_string(row.d) + "," +
           format_double(row.hessian_entry_std) + "," +
           format_double(row.hess_vec_entry_std) + "," +
           format_double(row.hessian_norm_sq_mean) + "," +
           format_double(row.hess_vec_norm_sq_mean) + "\n";
    if (!quiet)
      std::printf(
          "d=%3d  std(H v)=%-12.5g std(H_v)=%-12.5g  "
          "E|H|^2=%-12.5g E|H_v|^2=%-12.5g\n",
          row.d, row.hessian_entry_std, row.hess_vec_entry_std,
          row.hessian_norm_sq_mean, row.hess_vec_norm_sq_mean);
  }
  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "variance.csv");
    out << csv;
    if (!quiet) std::printf("wrote variance.csv under %s\n", out_dir.c_str());
  }
  return kExitOk;
}

int cmd_baseline(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_experiment(opts);
  Objective obj = cfg.make_objective_instance();
  const Eigen::VectorXd x0 = cfg.resolve_x0(obj);
  const RunRecord rec = deterministic_saddle_search(
      obj, x0, cfg.saddle.k, cfg.saddle.alpha_x, cfg.saddle.n_x_max);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string path = (fs::path(cfg.out_dir) / "baseline.csv").string();
  write_run_record_csv(rec, path);
  if (!opts.quiet) {
    for (const auto& w : rec.warnings)
      std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("wrote %s (%zu rows)\n", path.c_str(), rec.rows.size());
    if (std::isfinite(rec.min_dist_sq()))
      std::printf("min dist_sq: %s\n",
                  format_double(rec.min_dist_sq()).c_str());
  }
  return rec.aborted ? kExitRunFailure : kExitOk;
}

int cmd_estimator_check(int samples, std::uint64_t seed, bool quiet) {
  RngStream rng(seed);
  bool all_ok = true;
  auto report = [&](const char* name, double value, double target,
                    double tolerance) {
    const bool ok = std::abs(value - target) <= tolerance;
    all_ok &= ok;
    if (!quiet)
      std::printf("%-38s %12.6g target %12.6g (tol %.3g) %s\n", name, value,
                  target, tolerance, ok ? "ok" : "FAIL");
  };

  // Quadratic diag(2,-2): estimator means vs A x, A, A v.
  const Eigen::Matrix2d A = Eigen::Vector2d(2, -2).asDiagonal();
  Objective q = make_quadratic(A);
  const Eigen::Vector2d x(1, 1), v(1, 0);
  const double l = 1e-3;
  Eigen::Vector2d f_mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d h_mean = Eigen::Matrix2d::Zero();
  Eigen::Vector2d hv_mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd r = rng.standard_normal(2);
    f_mean += grad_estimate(q, x, r, l);
    h_mean += hessian_estimate(q, x, r, l);
    hv_mean += hess_vec_estimate(q, x, v, r, l);
  }
  f_mean /= samples;
  h_mean /= samples;
  hv_mean /= samples;
  const double root_n = std::sqrt(static_cast<double>(samples));
  report("grad mean [0]", f_mean[0], 2.0, 3.0 * 4.0 / root_n);
  report("grad mean [1]", f_mean[1], -2.0, 3.0 * 4.0 / root_n);
  report("hessian mean [0][0]", h_mean(0, 0), 2.0, 3.0 * 8.0 / root_n);
  report("hessian mean [1][1]", h_mean(1, 1), -2.0, 3.0 * 8.0 / root_n);
  report("hess-vec mean [0]", hv_mean[0], 2.0, 3.0 * 5.0 / root_n);
  report("hess-vec mean [1]", hv_mean[1], 0.0, 3.0 * 5.0 / root_n);

  // Sum of sines: the smoothed gradient has the closed form
  // e^{-l^2/2} cos(x).
  const int d = 5;
  const double ls = 0.1;
  Objective s = make_sum_of_sines(d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < samples; ++i)
    mean +=
        grad_estimate(s, Eigen::VectorXd::Zero(d), rng.standard_normal(d), ls);
  mean /= samples;
  const double smoothed = std::exp(-ls * ls / 2.0);
  for (int i = 0; i < d; ++i)
    report("smoothed grad component", mean[i], smoothed, 3.0 * 3.0 / root_n);

  if (!quiet)
    std::printf("%s\n", all_ok ? "estimator-check: all ok"
                               : "estimator-check: FAILURES");
  return all_ok ? kExitOk : kExitRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Derivative-free saddle search: experiment runner"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config_file", opts.config_path,
                    "experiment config JSON");
    cmd->add_option("--config", opts.config_path,
                    "experiment config JSON (alternative to the positional)");
    cmd->add_option("--jobs", opts.jobs, "max concurrent replicas");
    cmd->add_option("--seed-base", opts.seed_base,
                    "override the config seed base");
    cmd->add_option("--out", opts.out_dir, "output directory override");
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
  };

  CLI::App* run = app.add_subcommand("run", "replicated saddle search");
  add_common(run);
  CLI::App* table =
      app.add_subcommand("table", "plateau table over an (l, alpha) ladder");
  add_common(table);
  CLI::App* baseline = app.add_subcommand(
      "baseline", "deterministic saddle search with analytic derivatives");
  add_common(baseline);

  std::string variance_benchmark = "quadratic";
  std::vector<int> variance_dims = {2, 10, 50, 100};
  int variance_samples = 10000;
  double variance_l = 1e-4;
  std::uint64_t variance_seed = 0;
  std::string variance_out;
  bool variance_quiet = false;
  CLI::App* variance = app.add_subcommand(
      "variance", "Hessian vs Hessian-vector estimator variance study");
  variance->add_option("--benchmark", variance_benchmark,
                       "quadratic | mod_rosenbrock");
  variance->add_option("--dims", variance_dims, "dimensions to sweep");
  variance->add_option("--samples", variance_samples, "samples per dimension");
  variance->add_option("--l", variance_l, "difference length");
  variance->add_option("--seed", variance_seed, "rng seed");
  variance->add_option("--out", variance_out, "output directory");
  variance->add_flag("--quiet", variance_quiet, "suppress progress output");

  int check_samples = 200000;
  std::uint64_t check_seed = 12345;
  bool check_quiet = false;
  CLI::App* check = app.add_subcommand(
      "estimator-check", "estimator means vs closed forms (diagnostic)");
  check->add_option("--samples", check_samples, "Monte-Carlo sample count");
  check->add_option("--seed", check_seed, "rng seed");
  check->add_flag("--quiet", check_quiet, "suppress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (opts.config_path.empty())
        throw std::invalid_argument("run: missing config path");
      return cmd_run(opts);
    }
    if (table->parsed()) {
      if (opts.config_path.empty())
        throw std::invalid_argument("table: missing config path");
      return cmd_table(opts);
    }
    if (baseline->parsed()) {
      if (opts.config_path.empty())
        throw std::invalid_argument("baseline: missing config path");
      return cmd_baseline(opts);
    }
    if (variance->parsed())
      return cmd_variance(variance_benchmark, variance_dims, variance_samples,
                          variance_l, variance_seed, variance_out,
                          variance_quiet);
    if (check->parsed())
      return cmd_estimator_check(check_samples, check_seed, check_quiet);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRunFailure;
  }
  return kExitConfigError;
}
