#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "zosaddle/objective.hpp"

namespace zosaddle {

/// Constructs a benchmark objective from its registry name and a JSON
/// parameter object (the harness config format). Known names:
///   "quadratic"       {"diag": [...]} or {"matrix": [[...], ...]}
///   "muller_brown"    {} or {"A": [...], "a": [...], "b": [...],
///                          "c": [...], "xbar": [...], "ybar": [...]}
///   "mod_rosenbrock"  {"d": n, "s": [...]} or
///                     {"d": n, "s_head": [...], "s_rest": value}
///   "implicit_2d"     {"inner_tol": tol}
///   "linear_net"      {"depth": H, "d_in": .., "d_out": .., "d_hidden": ..,
///                      "n_samples": N, "subset": [...], "data_seed": s}
///   "sum_of_sines"    {"d": n}
/// Unknown names or malformed parameters raise std::invalid_argument.
Objective make_objective(const std::string& name,
                         const nlohmann::json& params);

/// Names accepted by make_objective.
std::vector<std::string> registered_benchmarks();

}  // namespace zosaddle
