#pragma once

#include "npqn/config.hpp"
#include "npqn/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace npqn {

/// One row of the benchmark suite. Bounds are the same in every coordinate.
struct ProblemEntry {
  int id = 0;
  std::string name;
  int m = 0;
  int n = 0;
  double lb = 0.0;
  double ub = 0.0;
  /// Citation key of the row.
  std::string source;
  /// Where the transcribed formulas come from and how they were checked.
  std::string provenance;
  /// False when some objective is nonconvex on the box.
  bool convex = true;
};

/// The 23 rows in suite order.
const std::vector<ProblemEntry> &table1();

/// Row lookup by name (case-insensitive). With several rows of one name the
/// first is returned unless `n` selects another. Throws UnknownProblem.
const ProblemEntry &find_entry(std::string_view name, std::optional<int> n = std::nullopt);

/// Smooth part of a row with g == 0 terms; attach_nonsmooth adds the random ones.
ProblemSpecd make_problem(const ProblemEntry &entry);

/// make_problem(find_entry(name, n)). The scalable problems (JOS1, FDS, ZLT1)
/// also accept an `n` outside the table and reuse the first row's bounds.
ProblemSpecd get_problem(std::string_view name, std::optional<int> n_override = std::nullopt);

/// One random term per objective, anchored at the box midpoint, objective j
/// drawn from substream j of the nonsmooth stream of `master_seed`.
ProblemSpecd attach_nonsmooth(ProblemSpecd problem, std::uint64_t master_seed);

/// `count` points uniform in the box from the starts substream of `master_seed`,
/// coordinates drawn in order.
std::vector<VectorXd> uniform_starts(const Boxd &box, int count, std::uint64_t master_seed);

/// "id name m n [lb,ub] source", the format of `npqn list`.
std::string describe(const ProblemEntry &entry);

} // namespace npqn
