#pragma once

#include "npqn/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace npqn {

enum class Variant {
  NPQNA, ///< BFGS curvature, nonmonotone average-type line search
  PQNA,  ///< BFGS curvature plus pqna_reg * I, monotone Armijo
  NPGA,  ///< exact (floored) Hessians, monotone Armijo
};

const char *to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct SolverConfig {
  Variant variant = Variant::NPQNA;
  double rho = 0.5;
  double tau = 1e-4;
  double mu = 1.0;
  double eta = 0.85;
  double epsilon_theta = 1e-10;
  double d_tol = 1e-6;
  int max_iter = 300;
  int max_backtracks = 50;
  double spd_floor = 1e-8;
  double pqna_reg = 1e-3;
  double subproblem_tol = 1e-8;
  /// Include lb <= x + d <= ub in the direction subproblem.
  bool enforce_box = true;
  /// Use the literal s'y > 0 skip rule instead of the relative test.
  bool raw_curvature_rule = false;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig naming the first violated interval constraint.
  void validate() const;

  /// The multi-start benchmark preset (eta = 1e-4).
  static SolverConfig benchmark_preset();
};

/// Names accepted by set_config_value, in documentation order.
const std::vector<std::string> &config_keys();

/// Assigns one key=value pair. Throws InvalidConfig for unknown keys (naming
/// the nearest valid key) and for values that do not parse.
void set_config_value(SolverConfig &config, std::string_view key, std::string_view value);

/// Levenshtein distance; used for "did you mean" suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Closest candidate by edit distance (first one wins ties).
std::string nearest(std::string_view word, const std::vector<std::string> &candidates);

} // namespace npqn
