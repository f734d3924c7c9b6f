#include "npqn/cli.hpp"

#include "npqn/harness.hpp"
#include "npqn/problems.hpp"
#include "npqn/solver.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace npqn {

namespace {

const std::vector<std::string> kCliKeys = {"problem", "n", "algo", "suite", "starts", "seed", "threads", "out"};
const std::vector<std::string> kAlgorithms = {"npqna", "pqna", "npga", "all"};

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename Int> Int parse_integer(const std::string &key, const std::string &text) {
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(Errc::InvalidConfig, "value '" + text + "' for " + key + " is not an integer");
  return v;
}

void assign(CliConfig &c, const std::string &key, const std::string &value) {
  if (key == "problem")
    c.problem = value;
  else if (key == "n")
    c.n = parse_integer<int>(key, value);
  else if (key == "algo")
    c.algo = value;
  else if (key == "suite")
    c.suite = value;
  else if (key == "starts")
    c.starts = parse_integer<int>(key, value);
  else if (key == "seed")
    c.seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "threads")
    c.threads = parse_integer<int>(key, value);
  else if (key == "out")
    c.out_dir = value;
  else {
    SolverConfig probe;
    set_config_value(probe, key, value);
    c.overrides[key] = value;
  }
}

std::vector<std::string> all_keys() {
  std::vector<std::string> keys = kCliKeys;
  for (const auto &k : config_keys())
    if (k != "seed")
      keys.push_back(k);
  return keys;
}

bool known_key(const std::string &key) {
  const auto keys = all_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<Variant> algorithms_for(const std::string &algo) {
  if (algo == "all")
    return {Variant::NPQNA, Variant::PQNA, Variant::NPGA};
  if (auto v = parse_variant(algo))
    return {*v};
  throw UsageError("unknown value '" + algo + "' for --algo (did you mean '" + suggest_algorithm(algo) + "'?)");
}

SolverConfig solver_config(const CliConfig &c) {
  SolverConfig config = SolverConfig::benchmark_preset();
  config.seed = c.seed;
  for (const auto &[k, v] : c.overrides)
    set_config_value(config, k, v);
  config.validate();
  return config;
}

std::string vec(const VectorXd &v) {
  std::ostringstream os;
  os << std::setprecision(10) << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i)
    os << (i ? ", " : "") << v(i);
  os << ')';
  return os.str();
}

bool run_failed(Termination t) { return t == Termination::LineSearchFail || t == Termination::SubproblemFail; }

int do_list(std::ostream &out) {
  for (const auto &e : table1())
    out << describe(e) << '\n';
  return 0;
}

int do_solve(const CliConfig &c, bool trace, std::ostream &out) {
  const auto algos = algorithms_for(c.algo);
  const ProblemEntry &entry = find_entry(c.problem, c.n);
  const ProblemSpecd problem = attach_nonsmooth(make_problem(entry), c.seed);
  const VectorXd x0 = problem.box.midpoint();
  SolverConfig config = solver_config(c);
  int code = 0;
  for (Variant v : algos) {
    config.variant = v;
    const RunReportd r = run(problem, x0, config);
    if (trace) {
      out << "k,theta,|d|,alpha,h\n";
      for (const auto &it : r.iterates)
        out << it.k << ',' << it.theta << ',' << it.d_norm << ',' << it.alpha << ',' << it.h << '\n';
    }
    out << entry.name << " (row " << entry.id << ") " << to_string(v) << ": " << to_string(r.termination)
        << " after " << r.iterations << " iterations, " << r.function_evaluations << " evaluations, "
        << std::fixed << std::setprecision(4) << r.wall_time_seconds << " s\n"
        << std::defaultfloat;
    const auto &last = r.iterates.back();
    out << "  theta = " << last.theta << ", |d| = " << last.d_norm << '\n';
    out << "  x = " << vec(r.x) << '\n';
    out << "  F = " << vec(r.F) << '\n';
    if (!r.message.empty())
      out << "  " << r.message << '\n';
    if (run_failed(r.termination))
      code = 1;
  }
  return code;
}

std::string front_stem(const std::filesystem::path &out, const std::string &suffix) {
  std::filesystem::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

int write_fronts(const MultistartResult &res, const ProblemEntry &entry, const std::string &stem_prefix, bool suffix,
                 std::ostream &out) {
  for (const auto &front : res.fronts) {
    const std::string stem = stem_prefix + (suffix ? std::string("_") + to_string(front.algorithm) : "");
    const std::string title = "Problem " + std::to_string(entry.id) + " " + entry.name + ", " +
                              to_string(front.algorithm);
    export_front(front.points, entry.m, stem + ".csv", FrontFormat::Csv);
    export_front(front.points, entry.m, stem + ".svg", FrontFormat::Svg, title);
    out << "wrote " << stem << ".csv and " << stem << ".svg\n";
  }
  return 0;
}

bool batch_failed(const MultistartResult &res) {
  for (const auto &r : res.runs)
    if (r.error || run_failed(r.report.termination))
      return true;
  return false;
}

MultistartOptions batch_options(const CliConfig &c) {
  if (c.starts < 1)
    throw UsageError("--starts must be at least 1");
  MultistartOptions opt;
  opt.starts = c.starts;
  opt.master_seed = c.seed;
  opt.algorithms = algorithms_for(c.algo);
  opt.config = solver_config(c);
  opt.threads = c.threads;
  return opt;
}

int do_front(const CliConfig &c, std::ostream &out) {
  const ProblemEntry &entry = find_entry(c.problem, c.n);
  const MultistartOptions opt = batch_options(c);
  const MultistartResult res = run_multistart(entry, opt);
  const std::string out_path = c.out_dir.empty() ? "front.csv" : c.out_dir;
  write_fronts(res, entry, front_stem(out_path, ""), opt.algorithms.size() > 1, out);
  return batch_failed(res) ? 1 : 0;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string describe_config(const CliConfig &c, const SolverConfig &s) {
  std::ostringstream os;
  os << "# bench --suite " << c.suite << " --starts " << c.starts << " --seed " << c.seed << '\n';
  os << "suite=" << c.suite << "\nstarts=" << c.starts << "\nseed=" << c.seed << "\nalgo=" << c.algo << '\n';
  os << "rho=" << shortest(s.rho) << "\ntau=" << shortest(s.tau) << "\nmu=" << shortest(s.mu)
     << "\neta=" << shortest(s.eta) << "\nepsilon_theta=" << shortest(s.epsilon_theta)
     << "\nd_tol=" << shortest(s.d_tol) << "\nmax_iter=" << s.max_iter << "\nmax_backtracks=" << s.max_backtracks
     << "\nspd_floor=" << shortest(s.spd_floor) << "\npqna_reg=" << shortest(s.pqna_reg)
     << "\nsubproblem_tol=" << shortest(s.subproblem_tol) << "\nenforce_box=" << (s.enforce_box ? "true" : "false")
     << "\nraw_curvature_rule=" << (s.raw_curvature_rule ? "true" : "false") << '\n';
  os << "# nonsmooth anchor: box midpoint; one term set per problem shared by all starts and algorithms\n";
  return os.str();
}

int do_bench(const CliConfig &c, const std::vector<std::string> &only, std::ostream &out) {
  if (c.suite != "table1")
    throw UsageError("unknown value '" + c.suite + "' for --suite (the only suite is 'table1')");
  const MultistartOptions opt = batch_options(c);
  namespace fs = std::filesystem;
  const fs::path dir = c.out_dir.empty() ? fs::path("results") : fs::path(c.out_dir);
  std::vector<const ProblemEntry *> entries;
  for (const auto &e : table1()) {
    if (!only.empty()) {
      const bool wanted = std::any_of(only.begin(), only.end(), [&](const std::string &s) {
        return s == std::to_string(e.id);
      });
      if (!wanted)
        continue;
    }
    entries.push_back(&e);
  }
  for (const auto &s : only)
    if (std::none_of(entries.begin(), entries.end(), [&](const ProblemEntry *e) { return std::to_string(e->id) == s; }))
      throw UsageError("unknown value '" + s + "' for --only (expected a row id 1-23)");

  std::error_code ec;
  fs::create_directories(dir / "fronts", ec);
  if (ec)
    throw Error(Errc::IoFailure, "cannot create '" + (dir / "fronts").string() + "': " + ec.message());

  std::vector<BenchmarkRow> rows;
  bool failed = false;
  for (const ProblemEntry *e : entries) {
    const MultistartResult res = run_multistart(*e, opt);
    failed = failed || batch_failed(res);
    for (const auto &row : res.rows) {
      rows.push_back(row);
      out << std::setw(2) << row.problem_id << ' ' << std::left << std::setw(9) << row.problem << std::setw(6)
          << row.algorithm << std::right << " it " << std::fixed << std::setprecision(2) << std::setw(7)
          << row.mean_iterations << "  f " << std::setw(7) << row.mean_function_evals << "  cpu "
          << std::setprecision(4) << row.mean_cpu_seconds << "  tol " << std::setprecision(2)
          << row.tol_reached_fraction << std::defaultfloat << '\n';
    }
    const std::string stem = (dir / "fronts" / ("p" + std::to_string(e->id) + "_" + e->name)).string();
    std::ostringstream sink;
    write_fronts(res, *e, stem, true, sink);
  }
  export_table(rows, (dir / "table2.csv").string());
  std::ofstream cfg(dir / "config.txt", std::ios::binary);
  cfg << describe_config(c, opt.config);
  if (!cfg)
    throw Error(Errc::IoFailure, "cannot write '" + (dir / "config.txt").string() + "'");
  out << "wrote " << (dir / "table2.csv").string() << ", " << (dir / "config.txt").string() << " and "
      << (dir / "fronts").string() << "/\n";
  return failed ? 1 : 0;
}

} // namespace

CliConfig parse_config(const std::string &text, CliConfig base) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(number) + ": ";
    if (eq == std::string::npos)
      throw Error(Errc::ParseError, where + "expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(Errc::ParseError, where + "missing key");
    if (!known_key(key))
      throw Error(Errc::ParseError,
                  where + "unknown key '" + key + "' (did you mean '" + nearest(key, all_keys()) + "'?)");
    try {
      assign(base, key, value);
    } catch (const Error &e) {
      throw Error(Errc::ParseError, where + e.what());
    }
  }
  return base;
}

CliConfig load_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::IoFailure, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string suggest_algorithm(const std::string &word) {
  std::string lower = word;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  // Method families map to the variant that implements them.
  if (lower.find("newton") != std::string::npos && lower.find("quasi") == std::string::npos)
    return "npga";
  if (lower.find("bfgs") != std::string::npos || lower.find("quasi") != std::string::npos)
    return "npqna";
  return nearest(lower, kAlgorithms);
}

int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Nonmonotone proximal quasi-Newton solver for multiobjective composite problems.", "npqn"};
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 a run failed or output could not be written, 2 usage error.\n"
             "Config files hold key=value lines ('#' comments); flags given on the command line win.\n"
             "Solver keys for --set and config files: rho tau mu eta epsilon_theta d_tol max_iter\n"
             "max_backtracks spd_floor pqna_reg subproblem_tol enforce_box raw_curvature_rule.");

  CliConfig flags;
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> only;
  bool trace = false;
  int n_flag = 0;
  std::map<std::string, CLI::Option *> given;

  auto common = [&](CLI::App *sub, const std::string &algo_default, bool batch) {
    flags.algo = algo_default;
    given["algo"] = sub->add_option("--algo", flags.algo, "npqna, pqna, npga or all")->capture_default_str();
    given["seed"] = sub->add_option("--seed", flags.seed, "Master seed for terms and starts")->capture_default_str();
    if (batch) {
      given["starts"] = sub->add_option("--starts", flags.starts, "Uniform random starts per problem")
                            ->capture_default_str();
      given["threads"] = sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)")
                             ->capture_default_str();
    }
    sub->add_option("--config", config_path, "key=value file read before the flags; default: none");
    sub->add_option("--set", sets, "Solver override key=value (repeatable); default: none");
  };

  CLI::App *solve = app.add_subcommand("solve", "One solve from the box midpoint");
  given["problem"] = solve->add_option("--problem", flags.problem, "Problem name (see list); required");
  given["n"] = solve->add_option("--n", n_flag, "Dimension, for rows sharing a name; default: the first row");
  common(solve, "npqna", false);
  solve->add_flag("--trace", trace, "Print one line per iterate; default: off");

  CliConfig bench_flags;
  CLI::App *bench = app.add_subcommand("bench", "Multi-start runs of the whole suite");
  CLI::Option *suite_opt = bench->add_option("--suite", bench_flags.suite, "Problem suite")->capture_default_str();
  CLI::Option *bench_starts =
      bench->add_option("--starts", bench_flags.starts, "Uniform random starts per problem")->capture_default_str();
  CLI::Option *bench_seed =
      bench->add_option("--seed", bench_flags.seed, "Master seed for terms and starts")->capture_default_str();
  bench_flags.out_dir = "results";
  CLI::Option *bench_out = bench->add_option("--out", bench_flags.out_dir, "Output directory")->capture_default_str();
  bench_flags.algo = "all";
  CLI::Option *bench_algo =
      bench->add_option("--algo", bench_flags.algo, "npqna, pqna, npga or all")->capture_default_str();
  CLI::Option *bench_threads =
      bench->add_option("--threads", bench_flags.threads, "Worker threads (0 = all cores)")->capture_default_str();
  bench->add_option("--only", only, "Restrict to these row ids (repeatable); default: all 23");
  bench->add_option("--config", config_path, "key=value file read before the flags; default: none");
  bench->add_option("--set", sets, "Solver override key=value (repeatable); default: none");

  CliConfig front_flags;
  CLI::App *front = app.add_subcommand("front", "Multi-start Pareto front of one problem as CSV and SVG");
  CLI::Option *front_problem = front->add_option("--problem", front_flags.problem, "Problem name (see list); required");
  int front_n = 0;
  CLI::Option *front_n_opt = front->add_option("--n", front_n, "Dimension, for rows sharing a name; default: the first row");
  front_flags.algo = "all";
  CLI::Option *front_algo =
      front->add_option("--algo", front_flags.algo, "npqna, pqna, npga or all")->capture_default_str();
  CLI::Option *front_starts =
      front->add_option("--starts", front_flags.starts, "Uniform random starts")->capture_default_str();
  CLI::Option *front_seed =
      front->add_option("--seed", front_flags.seed, "Master seed for terms and starts")->capture_default_str();
  front_flags.out_dir = "front.csv";
  CLI::Option *front_out =
      front->add_option("--out", front_flags.out_dir, "Output path; .csv and .svg are written (with _<algo> for all)")
          ->capture_default_str();
  CLI::Option *front_threads =
      front->add_option("--threads", front_flags.threads, "Worker threads (0 = all cores)")->capture_default_str();
  front->add_option("--config", config_path, "key=value file read before the flags; default: none");
  front->add_option("--set", sets, "Solver override key=value (repeatable); default: none");

  app.add_subcommand("list", "Print the problem registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    CliConfig c;
    auto merge = [&](CliConfig &target, const std::map<std::string, CLI::Option *> &opts, const CliConfig &src) {
      for (const auto &[key, opt] : opts) {
        if (!opt || opt->count() == 0)
          continue;
        if (key == "problem")
          target.problem = src.problem;
        else if (key == "algo")
          target.algo = src.algo;
        else if (key == "seed")
          target.seed = src.seed;
        else if (key == "starts")
          target.starts = src.starts;
        else if (key == "threads")
          target.threads = src.threads;
        else if (key == "out")
          target.out_dir = src.out_dir;
        else if (key == "suite")
          target.suite = src.suite;
      }
    };
    auto base = [&](const std::string &algo_default, const std::string &out_default) {
      CliConfig b;
      b.algo = algo_default;
      b.out_dir = out_default;
      if (!config_path.empty())
        b = parse_config([&] {
          std::ifstream in(config_path, std::ios::binary);
          if (!in)
            throw UsageError("cannot read config file '" + config_path + "' given to --config");
          std::ostringstream ss;
          ss << in.rdbuf();
          return ss.str();
        }(), b);
      return b;
    };
    auto apply_sets = [&](CliConfig &target) {
      for (const auto &s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
          throw UsageError("expected key=value for --set, got '" + s + "'");
        const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end() || key == "seed")
          throw UsageError("unknown key '" + key + "' for --set (did you mean '" + nearest(key, config_keys()) + "'?)");
        assign(target, key, value);
      }
    };

    if (app.got_subcommand("list"))
      return do_list(out);
    if (app.got_subcommand("solve")) {
      c = base("npqna", "");
      merge(c, given, flags);
      if (given["n"]->count() > 0)
        c.n = n_flag;
      apply_sets(c);
      if (c.problem.empty())
        throw UsageError("solve needs --problem");
      return do_solve(c, trace, out);
    }
    if (app.got_subcommand("bench")) {
      c = base("all", "results");
      merge(c, {{"suite", suite_opt}, {"starts", bench_starts}, {"seed", bench_seed}, {"out", bench_out},
                {"algo", bench_algo}, {"threads", bench_threads}},
            bench_flags);
      apply_sets(c);
      return do_bench(c, only, out);
    }
    c = base("all", "front.csv");
    merge(c, {{"problem", front_problem}, {"algo", front_algo}, {"starts", front_starts}, {"seed", front_seed},
              {"out", front_out}, {"threads", front_threads}},
          front_flags);
    if (front_n_opt->count() > 0)
      c.n = front_n;
    apply_sets(c);
    if (c.problem.empty())
      throw UsageError("front needs --problem");
    return do_front(c, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
    case Errc::UnknownProblem:
    case Errc::InvalidConfig:
    case Errc::ParseError:
      return 2;
    default:
      return 1;
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace npqn
