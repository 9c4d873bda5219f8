#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "zosaddle/objective.hpp"
#include "zosaddle/saddlesearch.hpp"

namespace zosaddle {

/// Optional standalone eigenvector search run before the saddle search to
/// produce the initial basis (useful in high dimension, where a random
/// start would need many inner iterations to lock onto the unstable
/// subspace).
struct BasisWarmup {
  int iterations = 0;
  StepSchedule alpha_v;
  double l = 1e-4;
};

/// One experiment = one benchmark, one saddle configuration, a replica
/// count, and a seed base. Replica i runs with seed seed_base + i.
/// Random offset drawn once per experiment: norm * unit Gaussian direction
/// seeded independently of the replica seeds.
struct RandomOffset {
  double norm = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string benchmark;
  nlohmann::json benchmark_params = nlohmann::json::object();
  std::optional<Eigen::VectorXd> x0;
  std::optional<Eigen::VectorXd> x0_offset_from_saddle;
  std::optional<RandomOffset> x0_random_offset_from_saddle;
  SaddleConfig saddle;
  std::optional<BasisWarmup> warmup;
  int replicas = 1;
  std::uint64_t seed_base = 0;
  std::string out_dir = "out";

  Objective make_objective_instance() const;
  Eigen::VectorXd resolve_x0(const Objective& obj) const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

nlohmann::json step_schedule_to_json(const StepSchedule& s);
StepSchedule step_schedule_from_json(const nlohmann::json& j);
nlohmann::json length_schedule_to_json(const LengthSchedule& s);
LengthSchedule length_schedule_from_json(const nlohmann::json& j);
nlohmann::json saddle_config_to_json(const SaddleConfig& cfg);
SaddleConfig saddle_config_from_json(const nlohmann::json& j);

/// Runs cfg.replicas independent searches (replica i seeded with
/// seed_base + i), up to `jobs` of them concurrently. A replica that
/// throws is recorded as an aborted RunRecord; the others continue.
std::vector<RunRecord> run_replicas(const ExperimentConfig& cfg, int jobs = 1);

/// Executes one replica in isolation (used by run_replicas and by tests).
RunRecord run_single_replica(const ExperimentConfig& cfg, int replica_index);

/// Mean over replicas of the per-replica minimum squared distance to the
/// reference saddle. Summation happens in sorted order, so the statistic
/// is bit-identical under any permutation of the records. Throws when a
/// record has no distance data.
double plateau_stat(const std::vector<RunRecord>& records);

/// Least-squares slope of log(plateau) against log(l) over a ladder of
/// three or more points. Positive slope ~ 4 means quartic vanishing.
double fit_decay_order(const std::vector<std::pair<double, double>>& ladder);

/// Plateau table keyed by (l, alpha); the order column is
/// log2(plateau(l_{r-1}) / plateau(l_r)) down each alpha's halving-l
/// ladder.
struct SummaryRow {
  double l = 0.0;
  double alpha = 0.0;
  double plateau = 0.0;
  std::optional<double> order;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;

  /// Cells are (l, alpha, plateau) triples in any order.
  static SummaryTable build(
      const std::vector<std::tuple<double, double, double>>& cells);
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

struct RateFit {
  double slope = 0.0;    // natural-log slope of dist_sq per iteration
  double plateau = 0.0;  // mean dist_sq over the detected plateau tail
  int window_begin = 0;  // rows used for the slope fit
  int window_end = 0;
};

struct FitWindow {
  int begin = 0;
  int end = 0;
};

/// Fits the pre-plateau decay rate of a run. The plateau is detected as
/// the maximal trailing segment whose dist_sq stays within 3x of the trace
/// minimum; the fit window (when not given explicitly) is everything
/// before it and must hold at least 20 points.
RateFit fit_linear_rate(const RunRecord& record,
                        std::optional<FitWindow> window = std::nullopt);

struct VarianceStudyRow {
  int d = 0;
  double hessian_entry_std = 0.0;    // pooled entry std of H*v samples
  double hess_vec_entry_std = 0.0;   // pooled entry std of H_v samples
  double hessian_norm_sq_mean = 0.0;   // mean squared spectral norm of H
  double hess_vec_norm_sq_mean = 0.0;  // mean squared norm of H_v
};

/// For each dimension: draw one point and one unit vector, then measure
/// the sampling spread of the full-Hessian estimate (applied to v, and in
/// spectral norm) against the Hessian-vector estimate over `samples`
/// draws.
std::vector<VarianceStudyRow> variance_study(
    const std::function<Objective(int)>& make_objective,
    const std::function<Eigen::VectorXd(Objective&, RngStream&)>& pick_point,
    const std::vector<int>& dims, int samples, double l, RngStream& rng);

/// CSV trace with header n,x_0..x_{d-1},dist_sq,grad_norm_sq,
/// cumulative_evals. Numbers use the shortest representation that parses
/// back to the identical double.
std::string run_record_csv(const RunRecord& record);
void write_run_record_csv(const RunRecord& record, const std::string& path);
std::vector<RunRow> parse_run_csv_text(const std::string& text);

/// Summary document: config snapshot, per-replica seeds and minima, and
/// aggregate statistics.
nlohmann::json summary_json(const ExperimentConfig& cfg,
                            const std::vector<RunRecord>& records);

/// Writes run_<i>.csv per record plus summary.json under out_dir; returns
/// the paths written. I/O failures carry the offending path.
std::vector<std::string> emit(const std::vector<RunRecord>& records,
                              const ExperimentConfig& cfg,
                              const std::string& out_dir);

/// Shortest round-trip decimal formatting used by the CSV writer.
std::string format_double(double value);

}  // namespace zosaddle
