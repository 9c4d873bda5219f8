#include "zosaddle/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "zosaddle/estimators.hpp"
#include "zosaddle/registry.hpp"

namespace zosaddle {

namespace {

using nlohmann::json;

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config serialization

json step_schedule_to_json(const StepSchedule& s) {
  if (s.kind == StepSchedule::Kind::Constant)
    return {{"kind", "constant"}, {"alpha", s.alpha}};
  return {{"kind", "power_law"}, {"gamma", s.gamma}, {"m", s.m}, {"p", s.p}};
}

StepSchedule step_schedule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant")
    return StepSchedule::constant(j.at("alpha").get<double>());
  if (kind == "power_law")
    return StepSchedule::power_law(j.at("gamma").get<double>(),
                                   j.at("m").get<double>(),
                                   j.at("p").get<double>());
  throw std::invalid_argument("step schedule: unknown kind \"" + kind + "\"");
}

json length_schedule_to_json(const LengthSchedule& s) {
  if (s.kind == LengthSchedule::Kind::Constant)
    return {{"kind", "constant"}, {"l", s.l}};
  return {{"kind", "coupled_sqrt"}, {"L", s.L}};
}

LengthSchedule length_schedule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant")
    return LengthSchedule::constant(j.at("l").get<double>());
  if (kind == "coupled_sqrt")
    return LengthSchedule::coupled_sqrt(j.at("L").get<double>());
  throw std::invalid_argument("length schedule: unknown kind \"" + kind +
                              "\"");
}

json saddle_config_to_json(const SaddleConfig& cfg) {
  json inner = {{"n_v_max", cfg.inner.n_v_max},
                {"alpha_v", step_schedule_to_json(cfg.inner.alpha_v)},
                {"length", length_schedule_to_json(cfg.inner.length)}};
  if (cfg.inner.stopping) {
    json stop = {{"eps", cfg.inner.stopping->eps}, {"m", cfg.inner.stopping->m}};
    if (cfg.inner.stopping->growth_c > 0.0) {
      stop["growth_c"] = cfg.inner.stopping->growth_c;
      stop["growth_p"] = cfg.inner.stopping->growth_p;
    }
    inner["stopping"] = stop;
  }
  return {{"k", cfg.k},
          {"n_x_max", cfg.n_x_max},
          {"alpha_x", step_schedule_to_json(cfg.alpha_x)},
          {"length", length_schedule_to_json(cfg.length)},
          {"inner", inner},
          {"warm_start", cfg.warm_start},
          {"seed", cfg.seed}};
}

SaddleConfig saddle_config_from_json(const json& j) {
  SaddleConfig cfg;
  cfg.k = j.at("k").get<int>();
  cfg.n_x_max = j.at("n_x_max").get<int>();
  cfg.alpha_x = step_schedule_from_json(j.at("alpha_x"));
  cfg.length = length_schedule_from_json(j.at("length"));
  cfg.warm_start = j.value("warm_start", true);
  cfg.seed = j.value("seed", static_cast<std::uint64_t>(0));
  const json& inner = j.at("inner");
  cfg.inner.k = cfg.k;
  cfg.inner.n_v_max = inner.at("n_v_max").get<int>();
  cfg.inner.alpha_v = step_schedule_from_json(inner.at("alpha_v"));
  if (inner.contains("length"))
    cfg.inner.length = length_schedule_from_json(inner.at("length"));
  else
    cfg.inner.length = cfg.length;
  if (inner.contains("stopping")) {
    ResidualBatchStop stop;
    stop.eps = inner.at("stopping").at("eps").get<double>();
    stop.m = inner.at("stopping").value("m", 1);
    stop.growth_c = inner.at("stopping").value("growth_c", 0.0);
    stop.growth_p = inner.at("stopping").value("growth_p", 0.0);
    cfg.inner.stopping = stop;
  }
  return cfg;
}

ExperimentConfig parse_experiment_config(const json& input) {
  // A summary document embeds the config under "config"; accept both.
  const json& j = input.contains("config") && input.contains("statistics")
                      ? input.at("config")
                      : input;
  ExperimentConfig cfg;
  try {
    cfg.benchmark = j.at("benchmark").get<std::string>();
    cfg.benchmark_params = j.value("benchmark_params", json::object());
    if (j.contains("x0")) cfg.x0 = vector_from_json(j.at("x0"));
    if (j.contains("x0_offset_from_saddle")) {
      const json& off = j.at("x0_offset_from_saddle");
      if (off.is_array()) {
        cfg.x0_offset_from_saddle = vector_from_json(off);
      } else {
        RandomOffset ro;
        ro.norm = off.at("norm").get<double>();
        ro.seed = off.value("seed", static_cast<std::uint64_t>(0));
        cfg.x0_random_offset_from_saddle = ro;
      }
    }
    const int x0_specs = (cfg.x0 ? 1 : 0) + (cfg.x0_offset_from_saddle ? 1 : 0) +
                         (cfg.x0_random_offset_from_saddle ? 1 : 0);
    if (x0_specs == 0)
      throw std::invalid_argument(
          "config: need \"x0\" or \"x0_offset_from_saddle\"");
    if (x0_specs > 1)
      throw std::invalid_argument(
          "config: \"x0\" and \"x0_offset_from_saddle\" are exclusive");
    cfg.saddle = saddle_config_from_json(j.at("saddle"));
    cfg.replicas = j.value("replicas", 1);
    if (cfg.replicas < 1)
      throw std::invalid_argument("config: replicas must be >= 1");
    cfg.seed_base = j.value("seed_base", static_cast<std::uint64_t>(0));
    cfg.out_dir = j.value("out_dir", std::string("out"));
    if (j.contains("basis_warmup")) {
      BasisWarmup w;
      w.iterations = j.at("basis_warmup").at("iterations").get<int>();
      w.alpha_v = step_schedule_from_json(j.at("basis_warmup").at("alpha_v"));
      w.l = j.at("basis_warmup").value("l", 1e-4);
      cfg.warmup = w;
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j = {{"benchmark", cfg.benchmark},
            {"benchmark_params", cfg.benchmark_params},
            {"saddle", saddle_config_to_json(cfg.saddle)},
            {"replicas", cfg.replicas},
            {"seed_base", cfg.seed_base},
            {"out_dir", cfg.out_dir}};
  if (cfg.x0) j["x0"] = vector_to_json(*cfg.x0);
  if (cfg.x0_offset_from_saddle)
    j["x0_offset_from_saddle"] = vector_to_json(*cfg.x0_offset_from_saddle);
  if (cfg.x0_random_offset_from_saddle)
    j["x0_offset_from_saddle"] = {
        {"norm", cfg.x0_random_offset_from_saddle->norm},
        {"seed", cfg.x0_random_offset_from_saddle->seed}};
  if (cfg.warmup)
    j["basis_warmup"] = {{"iterations", cfg.warmup->iterations},
                         {"alpha_v", step_schedule_to_json(cfg.warmup->alpha_v)},
                         {"l", cfg.warmup->l}};
  return j;
}

Objective ExperimentConfig::make_objective_instance() const {
  return make_objective(benchmark, benchmark_params);
}

Eigen::VectorXd ExperimentConfig::resolve_x0(const Objective& obj) const {
  if (x0) {
    if (x0->size() != obj.dim())
      throw std::invalid_argument("config: x0 dimension mismatch");
    return *x0;
  }
  if (!obj.has_saddle())
    throw std::invalid_argument(
        "config: x0_offset_from_saddle requires a benchmark with a known "
        "reference saddle");
  if (x0_random_offset_from_saddle) {
    RngStream offset_rng(x0_random_offset_from_saddle->seed);
    return obj.known_saddle() + x0_random_offset_from_saddle->norm *
                                    offset_rng.unit_vector(obj.dim());
  }
  if (x0_offset_from_saddle->size() != obj.dim())
    throw std::invalid_argument("config: x0 offset dimension mismatch");
  return obj.known_saddle() + *x0_offset_from_saddle;
}

// ---------------------------------------------------------------------------
// Replicated runs

RunRecord run_single_replica(const ExperimentConfig& cfg, int replica_index) {
  Objective obj = cfg.make_objective_instance();
  SaddleConfig saddle = cfg.saddle;
  saddle.seed = cfg.seed_base + static_cast<std::uint64_t>(replica_index);
  RngStream rng(saddle.seed);
  const Eigen::VectorXd x0 = cfg.resolve_x0(obj);

  Basis V0;
  if (cfg.warmup && cfg.warmup->iterations > 0) {
    EigenSearchConfig warm;
    warm.k = saddle.k;
    warm.n_v_max = cfg.warmup->iterations;
    warm.alpha_v = cfg.warmup->alpha_v;
    warm.length = LengthSchedule::constant(cfg.warmup->l);
    V0 = eigen_search(obj, x0, Basis(), warm, rng);
  }
  return saddle_search(obj, x0, V0, saddle, rng);
}

std::vector<RunRecord> run_replicas(const ExperimentConfig& cfg, int jobs) {
  const int n = cfg.replicas;
  std::vector<RunRecord> records(n);
  jobs = std::max(1, std::min(jobs, n));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        records[i] = run_single_replica(cfg, i);
      } catch (const std::exception& e) {
        records[i].aborted = true;
        records[i].abort_reason = e.what();
        records[i].seed = cfg.seed_base + static_cast<std::uint64_t>(i);
        records[i].config = cfg.saddle;
        records[i].config.seed = records[i].seed;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

// ---------------------------------------------------------------------------
// Statistics

double plateau_stat(const std::vector<RunRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("plateau_stat: no records");
  std::vector<double> minima;
  minima.reserve(records.size());
  for (const auto& rec : records) {
    const double m = rec.min_dist_sq();
    if (!std::isfinite(m))
      throw std::invalid_argument(
          "plateau_stat: record has no reference-distance data");
    minima.push_back(m);
  }
  // Sorted summation makes the mean independent of record order.
  std::sort(minima.begin(), minima.end());
  double sum = 0.0;
  for (double m : minima) sum += m;
  return sum / static_cast<double>(minima.size());
}

double fit_decay_order(const std::vector<std::pair<double, double>>& ladder) {
  if (ladder.size() < 3)
    throw std::invalid_argument("fit_decay_order: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [l, plateau] : ladder) {
    if (!(l > 0.0) || !(plateau > 0.0))
      throw std::invalid_argument(
          "fit_decay_order: lengths and plateaus must be positive");
    const double x = std::log(l);
    const double y = std::log(plateau);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(ladder.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SummaryTable SummaryTable::build(
    const std::vector<std::tuple<double, double, double>>& cells) {
  SummaryTable table;
  for (const auto& [l, alpha, plateau] : cells)
    table.rows.push_back({l, alpha, plateau, std::nullopt});
  std::sort(table.rows.begin(), table.rows.end(),
            [](const SummaryRow& a, const SummaryRow& b) {
              if (a.alpha != b.alpha) return a.alpha < b.alpha;
              return a.l > b.l;
            });
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& prev = table.rows[i - 1];
    auto& cur = table.rows[i];
    if (prev.alpha == cur.alpha && prev.plateau > 0.0 && cur.plateau > 0.0)
      cur.order = std::log2(prev.plateau / cur.plateau);
  }
  return table;
}

json SummaryTable::to_json() const {
  json rows_json = json::array();
  for (const auto& row : rows) {
    json r = {{"l", row.l}, {"alpha", row.alpha}, {"plateau", row.plateau}};
    if (row.order) r["order"] = *row.order;
    rows_json.push_back(r);
  }
  return rows_json;
}

std::string SummaryTable::to_csv() const {
  std::string out = "l,alpha,plateau,order\n";
  for (const auto& row : rows) {
    out += format_double(row.l) + "," + format_double(row.alpha) + "," +
           format_double(row.plateau) + ",";
    if (row.order) out += format_double(*row.order);
    out += "\n";
  }
  return out;
}

RateFit fit_linear_rate(const RunRecord& record,
                        std::optional<FitWindow> window) {
  std::vector<std::pair<int, double>> trace;
  for (const auto& row : record.rows)
    if (row.dist_sq && *row.dist_sq > 0.0)
      trace.emplace_back(row.n, *row.dist_sq);
  if (trace.size() < 21)
    throw std::invalid_argument("fit_linear_rate: trace too short");

  double trace_min = trace.front().second;
  for (const auto& [n, v] : trace) trace_min = std::min(trace_min, v);

  // Plateau = maximal trailing run within 3x of the trace minimum.
  std::size_t plateau_start = trace.size();
  while (plateau_start > 0 &&
         trace[plateau_start - 1].second <= 3.0 * trace_min)
    --plateau_start;

  double plateau = 0.0;
  if (plateau_start < trace.size()) {
    for (std::size_t i = plateau_start; i < trace.size(); ++i)
      plateau += trace[i].second;
    plateau /= static_cast<double>(trace.size() - plateau_start);
  } else {
    plateau = trace_min;
  }

  std::size_t begin = 0, end = plateau_start;
  if (window) {
    begin = 0;
    while (begin < trace.size() && trace[begin].first < window->begin) ++begin;
    end = begin;
    while (end < trace.size() && trace[end].first < window->end) ++end;
  }
  if (end - begin < 20)
    throw std::invalid_argument(
        "fit_linear_rate: pre-plateau window has fewer than 20 points");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const double x = static_cast<double>(trace[i].first);
    const double y = std::log(trace[i].second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(end - begin);
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.plateau = plateau;
  fit.window_begin = trace[begin].first;
  fit.window_end = trace[end - 1].first + 1;
  return fit;
}

std::vector<VarianceStudyRow> variance_study(
    const std::function<Objective(int)>& make_objective,
    const std::function<Eigen::VectorXd(Objective&, RngStream&)>& pick_point,
    const std::vector<int>& dims, int samples, double l, RngStream& rng) {
  if (samples < 100)
    throw std::invalid_argument("variance_study: need at least 100 samples");

  std::vector<VarianceStudyRow> table;
  for (int d : dims) {
    Objective obj = make_objective(d);
    const Eigen::VectorXd x = pick_point(obj, rng);
    const Eigen::VectorXd v = rng.unit_vector(d);

    Eigen::VectorXd hv_mean = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd hv_sq = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd hvec_mean = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd hvec_sq = Eigen::VectorXd::Zero(d);
    double h_norm_sq = 0.0;
    double hvec_norm_sq = 0.0;

    for (int s = 0; s < samples; ++s) {
      const Eigen::VectorXd r1 = rng.standard_normal(d);
      const Eigen::MatrixXd H = hessian_estimate(obj, x, r1, l);
      const Eigen::VectorXd Hv = H * v;
      hv_mean += Hv;
      hv_sq += Hv.cwiseProduct(Hv);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          H, Eigen::EigenvaluesOnly);
      const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
      h_norm_sq += spectral * spectral;

      const Eigen::VectorXd r2 = rng.standard_normal(d);
      const Eigen::VectorXd hv = hess_vec_estimate(obj, x, v, r2, l);
      hvec_mean += hv;
      hvec_sq += hv.cwiseProduct(hv);
      hvec_norm_sq += hv.squaredNorm();
    }

    const double ns = static_cast<double>(samples);
    VarianceStudyRow row;
    row.d = d;
    const Eigen::VectorXd var_h =
        (hv_sq / ns - (hv_mean / ns).cwiseProduct(hv_mean / ns))
            .cwiseMax(0.0);
    const Eigen::VectorXd var_hv =
        (hvec_sq / ns - (hvec_mean / ns).cwiseProduct(hvec_mean / ns))
            .cwiseMax(0.0);
    row.hessian_entry_std = std::sqrt(var_h.mean());
    row.hess_vec_entry_std = std::sqrt(var_hv.mean());
    row.hessian_norm_sq_mean = h_norm_sq / ns;
    row.hess_vec_norm_sq_mean = hvec_norm_sq / ns;
    table.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Emission

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string run_record_csv(const RunRecord& record) {
  std::string out;
  const int d =
      record.rows.empty() ? 0 : static_cast<int>(record.rows.front().x.size());
  out += "n";
  for (int i = 0; i < d; ++i) out += ",x_" + std::to_string(i);
  out += ",dist_sq,grad_norm_sq,cumulative_evals\n";
  for (const auto& row : record.rows) {
    out += std::to_string(row.n);
    for (int i = 0; i < d; ++i) out += "," + format_double(row.x[i]);
    out += ",";
    if (row.dist_sq) out += format_double(*row.dist_sq);
    out += ",";
    if (row.grad_norm_sq) out += format_double(*row.grad_norm_sq);
    out += "," + std::to_string(row.cumulative_evals);
    out += "\n";
  }
  return out;
}

void write_run_record_csv(const RunRecord& record, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw std::runtime_error("emit: cannot open \"" + path + "\" for writing");
  file << run_record_csv(record);
  if (!file)
    throw std::runtime_error("emit: write failed for \"" + path + "\"");
}

std::vector<RunRow> parse_run_csv_text(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line))
    throw std::invalid_argument("parse_run_csv: empty input");

  int d = 0;
  {
    std::istringstream header(line);
    std::string field;
    while (std::getline(header, field, ','))
      if (field.rfind("x_", 0) == 0) ++d;
  }

  std::vector<RunRow> rows;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    RunRow row;
    std::getline(ls, field, ',');
    row.n = std::stoi(field);
    row.x.resize(d);
    for (int i = 0; i < d; ++i) {
      std::getline(ls, field, ',');
      double v = 0.0;
      std::from_chars(field.data(), field.data() + field.size(), v);
      row.x[i] = v;
    }
    std::getline(ls, field, ',');
    if (!field.empty()) {
      double v = 0.0;
      std::from_chars(field.data(), field.data() + field.size(), v);
      row.dist_sq = v;
    }
    std::getline(ls, field, ',');
    if (!field.empty()) {
      double v = 0.0;
      std::from_chars(field.data(), field.data() + field.size(), v);
      row.grad_norm_sq = v;
    }
    std::getline(ls, field, ',');
    row.cumulative_evals = std::stoll(field);
    rows.push_back(std::move(row));
  }
  return rows;
}

json summary_json(const ExperimentConfig& cfg,
                  const std::vector<RunRecord>& records) {
  json runs = json::array();
  bool all_have_dist = !records.empty();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    json r = {{"replica", i},
              {"seed", rec.seed},
              {"csv", "run_" + std::to_string(i) + ".csv"},
              {"aborted", rec.aborted},
              {"rows", rec.rows.size()},
              {"wall_seconds", rec.wall_seconds}};
    if (!rec.abort_reason.empty()) r["abort_reason"] = rec.abort_reason;
    if (!rec.warnings.empty()) r["warnings"] = rec.warnings;
    const double min_dist = rec.min_dist_sq();
    if (std::isfinite(min_dist)) r["min_dist_sq"] = min_dist;
    else all_have_dist = false;
    const double min_grad = rec.min_grad_norm_sq();
    if (std::isfinite(min_grad)) r["min_grad_norm_sq"] = min_grad;
    if (!rec.rows.empty())
      r["final_evals"] = rec.rows.back().cumulative_evals;
    runs.push_back(r);
  }

  json stats = json::object();
  if (all_have_dist) stats["plateau"] = plateau_stat(records);

  return json{{"config", experiment_config_to_json(cfg)},
              {"statistics", stats},
              {"runs", runs}};
}

std::vector<std::string> emit(const std::vector<RunRecord>& records,
                              const ExperimentConfig& cfg,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("emit: cannot create directory \"" + out_dir +
                             "\": " + ec.message());

  std::vector<std::string> written;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string path =
        (fs::path(out_dir) / ("run_" + std::to_string(i) + ".csv")).string();
    write_run_record_csv(records[i], path);
    written.push_back(path);
  }
  const std::string summary_path =
      (fs::path(out_dir) / "summary.json").string();
  std::ofstream file(summary_path, std::ios::binary);
  if (!file)
    throw std::runtime_error("emit: cannot open \"" + summary_path + "\"");
  file << summary_json(cfg, records).dump(2) << "\n";
  if (!file)
    throw std::runtime_error("emit: write failed for \"" + summary_path +
                             "\"");
  written.push_back(summary_path);
  return written;
}

}  // namespace zosaddle
