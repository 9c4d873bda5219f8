#include "zosaddle/registry.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "zosaddle/benchmarks.hpp"
#include "zosaddle/rng.hpp"

namespace zosaddle {

namespace {

using nlohmann::json;

Eigen::VectorXd to_vector(const json& arr) {
  if (!arr.is_array()) throw std::invalid_argument("expected a JSON array");
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

std::array<double, 4> to_array4(const json& arr) {
  if (!arr.is_array() || arr.size() != 4)
    throw std::invalid_argument("expected a 4-element array");
  return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
          arr[3].get<double>()};
}

Objective make_quadratic_from(const json& p) {
  if (p.contains("diag")) {
    const Eigen::VectorXd d = to_vector(p.at("diag"));
    return make_quadratic(Eigen::MatrixXd(d.asDiagonal()));
  }
  if (p.contains("matrix")) {
    const auto& rows = p.at("matrix");
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n)
        throw std::invalid_argument("quadratic: matrix must be square");
      for (int j = 0; j < n; ++j) A(i, j) = rows[i][j].get<double>();
    }
    return make_quadratic(A);
  }
  throw std::invalid_argument("quadratic: need \"diag\" or \"matrix\"");
}

Objective make_muller_brown_from(const json& p) {
  MullerBrownParams params;
  if (p.contains("A")) params.A = to_array4(p.at("A"));
  if (p.contains("a")) params.a = to_array4(p.at("a"));
  if (p.contains("b")) params.b = to_array4(p.at("b"));
  if (p.contains("c")) params.c = to_array4(p.at("c"));
  if (p.contains("xbar")) params.xbar = to_array4(p.at("xbar"));
  if (p.contains("ybar")) params.ybar = to_array4(p.at("ybar"));
  return make_muller_brown(params);
}

Objective make_mod_rosenbrock_from(const json& p) {
  const int d = p.at("d").get<int>();
  Eigen::VectorXd s;
  if (p.contains("s")) {
    s = to_vector(p.at("s"));
  } else if (p.contains("s_head")) {
    const Eigen::VectorXd head = to_vector(p.at("s_head"));
    const double rest = p.value("s_rest", 1.0);
    s = Eigen::VectorXd::Constant(d, rest);
    if (head.size() > d)
      throw std::invalid_argument("mod_rosenbrock: s_head longer than d");
    s.head(head.size()) = head;
  } else {
    throw std::invalid_argument("mod_rosenbrock: need \"s\" or \"s_head\"");
  }
  return make_mod_rosenbrock(d, s);
}

Objective make_linear_net_from(const json& p) {
  LinearNetSpec spec;
  spec.depth = p.at("depth").get<int>();
  const int d_in = p.at("d_in").get<int>();
  const int d_out = p.at("d_out").get<int>();
  const int d_hidden = p.value("d_hidden", d_in);
  const int n_samples = p.at("n_samples").get<int>();
  spec.layer_dims.assign(spec.depth + 1, d_hidden);
  spec.layer_dims.front() = d_in;
  spec.layer_dims.back() = d_out;
  if (p.contains("subset"))
    spec.subset = p.at("subset").get<std::vector<int>>();

  RngStream data_rng(p.value("data_seed", 0ULL));
  spec.X.resize(d_in, n_samples);
  for (int j = 0; j < n_samples; ++j) spec.X.col(j) = data_rng.standard_normal(d_in);
  spec.Y.resize(d_out, n_samples);
  for (int j = 0; j < n_samples; ++j)
    spec.Y.col(j) = data_rng.standard_normal(d_out);
  // Optional rescaling, e.g. 1/sqrt(N) to keep the Hessian scale O(1)
  // independent of the sample count.
  const double scale = p.value("data_scale", 1.0);
  spec.X *= scale;
  spec.Y *= scale;
  return make_linear_net(spec);
}

}  // namespace

Objective make_objective(const std::string& name, const json& params) {
  if (name == "quadratic") return make_quadratic_from(params);
  if (name == "muller_brown") return make_muller_brown_from(params);
  if (name == "mod_rosenbrock") return make_mod_rosenbrock_from(params);
  if (name == "implicit_2d")
    return make_implicit_2d(params.value("inner_tol", 1e-12));
  if (name == "linear_net") return make_linear_net_from(params);
  if (name == "sum_of_sines")
    return make_sum_of_sines(params.at("d").get<int>());
  throw std::invalid_argument("unknown benchmark \"" + name + "\"");
}

std::vector<std::string> registered_benchmarks() {
  return {"quadratic",   "muller_brown", "mod_rosenbrock",
          "implicit_2d", "linear_net",   "sum_of_sines"};
}

}  // namespace zosaddle
