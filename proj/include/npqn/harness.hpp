#pragma once

#include "npqn/problems.hpp"
#include "npqn/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace npqn {

/// Mean iterations, evaluations and CPU time, plus the run count and the fraction of runs that
/// stopped on the tolerance rather than the iteration cap or a failure.
struct BenchmarkRow {
  int problem_id = 0;
  std::string problem;
  std::string algorithm;
  double mean_iterations = 0.0;
  double mean_function_evals = 0.0;
  double mean_cpu_seconds = 0.0;
  int runs = 0;
  double tol_reached_fraction = 0.0;
};

struct FrontPoint {
  VectorXd F;
  bool dominated = false;
};

struct Front {
  int problem_id = 0;
  std::string problem;
  Variant algorithm = Variant::NPQNA;
  std::vector<FrontPoint> points;
};

struct RunOutcome {
  int problem_id = 0;
  Variant algorithm = Variant::NPQNA;
  int start_index = 0;
  /// Set when run() threw; `report` is then empty.
  std::optional<std::string> error;
  /// `iterates` and `diagnostics` are cleared unless traces are kept.
  RunReportd report;
};

struct MultistartOptions {
  int starts = 100;
  std::uint64_t master_seed = 0;
  std::vector<Variant> algorithms = {Variant::NPQNA, Variant::PQNA, Variant::NPGA};
  /// Applied to every run with `variant` replaced per algorithm.
  SolverConfig config = SolverConfig::benchmark_preset();
  /// 0 picks the hardware concurrency.
  int threads = 0;
  bool keep_traces = false;
};

struct MultistartResult {
  /// The problem as solved, nonsmooth terms included.
  ProblemSpecd problem;
  std::vector<VectorXd> starts;
  /// Algorithm-major: runs[a * starts + s].
  std::vector<RunOutcome> runs;
  std::vector<BenchmarkRow> rows;
  std::vector<Front> fronts;
};

/// Every algorithm from the same starts with the same nonsmooth terms, both
/// derived from `master_seed`. Results do not depend on the thread count.
MultistartResult run_multistart(const ProblemEntry &entry, const MultistartOptions &options);

/// Means over the runs that did not throw. Failed runs count against the
/// tolerance fraction.
BenchmarkRow aggregate(const ProblemEntry &entry, Variant algorithm, const std::vector<RunOutcome> &runs);

/// dominated[i] is true iff some point is <= points[i] everywhere and < somewhere.
std::vector<bool> nondominated_filter(const std::vector<VectorXd> &points);

enum class FrontFormat { Csv, Svg };

/// CSV: "f1,...,fm,dominated" with 17 significant digits. SVG: 800x600
/// scatter; m = 3 gives the three pairwise projections. Throws IoFailure.
void export_front(const std::vector<FrontPoint> &front, int m, const std::string &path, FrontFormat format,
                  const std::string &title = "");

/// Columns problem,algorithm,it,f,cpu,tol_fraction; two decimals. Throws IoFailure.
void export_table(const std::vector<BenchmarkRow> &rows, const std::string &path);

std::string front_csv(const std::vector<FrontPoint> &front, int m);
std::string front_svg(const std::vector<FrontPoint> &front, int m, const std::string &title = "");
std::string table_csv(const std::vector<BenchmarkRow> &rows);

} // namespace npqn
