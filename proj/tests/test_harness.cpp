#include "fixtures.hpp"

#include "npqn/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace npqn;
using npqn::test::vec;

namespace {

int count_lines(const std::string &s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

int count_of(const std::string &s, const std::string &needle) {
  int n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1))
    ++n;
  return n;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("nondominated_filter") {
  CHECK(nondominated_filter({vec({1, 2}), vec({2, 1})}) == std::vector<bool>{false, false});
  CHECK(nondominated_filter({vec({1, 1}), vec({2, 2})}) == std::vector<bool>{false, true});
  CHECK(nondominated_filter({vec({1, 2}), vec({1, 2})}) == std::vector<bool>{false, false});
  CHECK(nondominated_filter({vec({1, 2}), vec({1, 3})}) == std::vector<bool>{false, true});
  CHECK(nondominated_filter({}).empty());
}

TEST_CASE("front export") {
  const std::vector<FrontPoint> two{{vec({1, 2}), false}, {vec({0.5, 3}), true}};
  SUBCASE("csv") {
    const std::string csv = front_csv(two, 2);
    CHECK(count_lines(csv) == 3);
    CHECK(csv.rfind("f1,f2,dominated\n", 0) == 0);
    CHECK(csv.find("0.5,3,1\n") != std::string::npos);
  }
  SUBCASE("empty front") {
    CHECK(front_csv({}, 2) == "f1,f2,dominated\n");
    const std::string svg = front_svg({}, 2);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_of(svg, "<circle") == 0);
  }
  SUBCASE("three objectives give three panels") {
    const std::vector<FrontPoint> pts{{vec({1, 2, 3}), false}, {vec({3, 2, 1}), false}};
    const std::string svg = front_svg(pts, 3, "t");
    CHECK(count_of(svg, "class=\"panel\"") == 3);
    CHECK(count_of(svg, "<circle") == 6);
  }
  SUBCASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "npqn_harness_test";
    std::filesystem::create_directories(dir);
    export_front(two, 2, (dir / "f.csv").string(), FrontFormat::Csv);
    std::ifstream in(dir / "f.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == front_csv(two, 2));
    CHECK_THROWS_AS(export_front(two, 2, (dir / "missing" / "f.csv").string(), FrontFormat::Csv), Error);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("table export") {
  BenchmarkRow r;
  r.problem_id = 13;
  r.problem = "MOP1";
  r.algorithm = "npqna";
  r.mean_iterations = 5.18;
  r.mean_function_evals = 6.18;
  r.mean_cpu_seconds = 0.0123;
  r.runs = 100;
  r.tol_reached_fraction = 1.0;
  CHECK(table_csv({r}) == "problem,algorithm,it,f,cpu,tol_fraction\n13,npqna,5.18,6.18,0.01,1.00\n");
}

TEST_CASE("aggregate") {
  const auto &entry = table1()[2];
  std::vector<RunOutcome> runs(3);
  runs[0].report.iterations = 4;
  runs[0].report.function_evaluations = 5;
  runs[0].report.termination = Termination::DirectionTol;
  runs[1].report.iterations = 300;
  runs[1].report.function_evaluations = 301;
  runs[1].report.termination = Termination::IterCap;
  runs[2].error = "boom";
  const auto row = aggregate(entry, Variant::NPQNA, runs);
  CHECK(row.runs == 2);
  CHECK(row.mean_iterations == 152.0);
  CHECK(row.mean_function_evals == 153.0);
  CHECK(row.tol_reached_fraction == doctest::Approx(1.0 / 3.0));
  CHECK(row.algorithm == "npqna");
}

TEST_CASE("run_multistart") {
  const auto &entry = find_entry("JOS1");
  MultistartOptions opt;
  opt.starts = 10;
  opt.master_seed = 5;
  opt.threads = 1;
  const auto a = run_multistart(entry, opt);
  CHECK(a.runs.size() == 30);
  CHECK(a.rows.size() == 3);
  CHECK(a.fronts.size() == 3);
  CHECK(a.starts.size() == 10);
  for (const auto &row : a.rows) {
    CHECK(row.mean_function_evals == doctest::Approx(row.mean_iterations + 1.0).epsilon(1e-14));
    CHECK(row.tol_reached_fraction == 1.0);
  }
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].algorithm == opt.algorithms[i / 10]);
    CHECK(a.runs[i].start_index == static_cast<int>(i % 10));
    CHECK(a.runs[i].report.iterates.empty());
  }

  opt.threads = 4;
  const auto b = run_multistart(entry, opt);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].report.x == b.runs[i].report.x);
    CHECK(a.runs[i].report.iterations == b.runs[i].report.iterations);
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].mean_iterations == b.rows[i].mean_iterations);
    CHECK(a.rows[i].mean_function_evals == b.rows[i].mean_function_evals);
  }

  opt.keep_traces = true;
  opt.algorithms = {Variant::PQNA};
  const auto c = run_multistart(entry, opt);
  CHECK(c.runs.size() == 10);
  CHECK_FALSE(c.runs[0].report.iterates.empty());
}

} // TEST_SUITE
