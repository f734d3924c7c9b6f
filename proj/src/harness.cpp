#include "npqn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace npqn {

namespace {

void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(Errc::IoFailure, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out)
    throw Error(Errc::IoFailure, "write to '" + path + "' failed");
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

} // namespace

BenchmarkRow aggregate(const ProblemEntry &entry, Variant algorithm, const std::vector<RunOutcome> &runs) {
  BenchmarkRow row;
  row.problem_id = entry.id;
  row.problem = entry.name;
  row.algorithm = to_string(algorithm);
  long long it = 0, fe = 0;
  int total = 0, reached = 0;
  double cpu = 0.0;
  for (const auto &r : runs) {
    if (r.algorithm != algorithm)
      continue;
    ++total;
    if (r.error)
      continue;
    ++row.runs;
    it += r.report.iterations;
    fe += r.report.function_evaluations;
    cpu += r.report.wall_time_seconds;
    if (converged(r.report.termination))
      ++reached;
  }
  if (row.runs > 0) {
    row.mean_iterations = static_cast<double>(it) / row.runs;
    row.mean_function_evals = static_cast<double>(fe) / row.runs;
    row.mean_cpu_seconds = cpu / row.runs;
  }
  if (total > 0)
    row.tol_reached_fraction = static_cast<double>(reached) / total;
  return row;
}

MultistartResult run_multistart(const ProblemEntry &entry, const MultistartOptions &options) {
  if (options.starts < 1)
    throw Error(Errc::PreconditionViolation, "starts must be at least 1");
  options.config.validate();
  MultistartResult result;
  result.problem = attach_nonsmooth(make_problem(entry), options.master_seed);
  result.starts = uniform_starts(result.problem.box, options.starts, options.master_seed);

  const std::size_t S = result.starts.size();
  const std::size_t total = S * options.algorithms.size();
  result.runs.resize(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      RunOutcome &out = result.runs[i];
      out.problem_id = entry.id;
      out.algorithm = options.algorithms[i / S];
      out.start_index = static_cast<int>(i % S);
      SolverConfig config = options.config;
      config.variant = out.algorithm;
      try {
        out.report = run(result.problem, result.starts[i % S], config);
        if (!options.keep_traces) {
          out.report.iterates.clear();
          out.report.iterates.shrink_to_fit();
          out.report.diagnostics.clear();
          out.report.diagnostics.shrink_to_fit();
        }
      } catch (const std::exception &e) {
        out.error = e.what();
      }
    }
  };
  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(total, 1)));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t)
      pool.emplace_back(worker);
    worker();
  }

  for (Variant a : options.algorithms) {
    result.rows.push_back(aggregate(entry, a, result.runs));
    Front front;
    front.problem_id = entry.id;
    front.problem = entry.name;
    front.algorithm = a;
    std::vector<VectorXd> F;
    for (const auto &r : result.runs)
      if (r.algorithm == a && !r.error)
        F.push_back(r.report.F);
    const std::vector<bool> dominated = nondominated_filter(F);
    for (std::size_t i = 0; i < F.size(); ++i)
      front.points.push_back({F[i], dominated[i]});
    result.fronts.push_back(std::move(front));
  }
  return result;
}

std::vector<bool> nondominated_filter(const std::vector<VectorXd> &points) {
  std::vector<bool> dominated(points.size(), false);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < points.size() && !dominated[i]; ++k) {
      if (k == i)
        continue;
      const auto &a = points[k], &b = points[i];
      if ((a.array() <= b.array()).all() && (a.array() < b.array()).any())
        dominated[i] = true;
    }
  }
  return dominated;
}

std::string front_csv(const std::vector<FrontPoint> &front, int m) {
  std::ostringstream os;
  for (int j = 0; j < m; ++j)
    os << 'f' << j + 1 << ',';
  os << "dominated\n";
  os << std::setprecision(17);
  for (const auto &p : front) {
    if (p.F.size() != m)
      throw Error(Errc::DimensionMismatch, "front point has " + std::to_string(p.F.size()) + " objectives");
    for (int j = 0; j < m; ++j)
      os << p.F(j) << ',';
    os << (p.dominated ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string front_svg(const std::vector<FrontPoint> &front, int m, const std::string &title) {
  if (m != 2 && m != 3)
    throw Error(Errc::PreconditionViolation, "svg fronts need m = 2 or 3");
  constexpr double W = 800, H = 600, top = 50, bottom = 60;
  std::vector<std::pair<int, int>> pairs = {{0, 1}};
  if (m == 3)
    pairs = {{0, 1}, {0, 2}, {1, 2}};
  const double gap = 60, left = 70, right = 30;
  const double pw = (W - left - right - gap * (pairs.size() - 1)) / pairs.size();
  const double ph = H - top - bottom;

  std::vector<double> lo(m, std::numeric_limits<double>::infinity()), hi(m, -std::numeric_limits<double>::infinity());
  for (const auto &p : front)
    for (int j = 0; j < m; ++j) {
      lo[j] = std::min(lo[j], p.F(j));
      hi[j] = std::max(hi[j], p.F(j));
    }
  for (int j = 0; j < m; ++j) {
    if (!(lo[j] <= hi[j])) {
      lo[j] = 0.0;
      hi[j] = 1.0;
    } else if (hi[j] - lo[j] < 1e-12 * (1.0 + std::abs(lo[j]))) {
      lo[j] -= 0.5;
      hi[j] += 0.5;
    }
  }

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  auto px = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  os << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  if (!title.empty())
    os << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << xml_escape(title) << "</text>\n";
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    const double x0 = left + k * (pw + gap), y0 = top;
    os << "<g class=\"panel\">\n";
    os << "<rect x=\"" << px(x0) << "\" y=\"" << px(y0) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(x0 + pw / 2) << "\" y=\"" << px(y0 + ph + 40)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">f" << a + 1 << "</text>\n";
    os << "<text x=\"" << px(x0 - 45) << "\" y=\"" << px(y0 + ph / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">f" << b + 1 << "</text>\n";
    os << "<text x=\"" << px(x0) << "\" y=\"" << px(y0 + ph + 18)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << num(lo[a]) << "</text>\n";
    os << "<text x=\"" << px(x0 + pw) << "\" y=\"" << px(y0 + ph + 18)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(hi[a]) << "</text>\n";
    os << "<text x=\"" << px(x0 - 4) << "\" y=\"" << px(y0 + ph)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(lo[b]) << "</text>\n";
    os << "<text x=\"" << px(x0 - 4) << "\" y=\"" << px(y0 + 10)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(hi[b]) << "</text>\n";
    const double inset = 8;
    for (const auto &p : front) {
      const double cx = x0 + inset + (pw - 2 * inset) * (p.F(a) - lo[a]) / (hi[a] - lo[a]);
      const double cy = y0 + ph - inset - (ph - 2 * inset) * (p.F(b) - lo[b]) / (hi[b] - lo[b]);
      os << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(cy) << "\" r=\"3\" "
         << (p.dominated ? "fill=\"none\" stroke=\"#999999\"" : "fill=\"#1f77b4\"") << "/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void export_front(const std::vector<FrontPoint> &front, int m, const std::string &path, FrontFormat format,
                  const std::string &title) {
  write_file(path, format == FrontFormat::Csv ? front_csv(front, m) : front_svg(front, m, title));
}

std::string table_csv(const std::vector<BenchmarkRow> &rows) {
  std::ostringstream os;
  os << "problem,algorithm,it,f,cpu,tol_fraction\n";
  for (const auto &r : rows)
    os << r.problem_id << ',' << r.algorithm << ',' << fixed2(r.mean_iterations) << ','
       << fixed2(r.mean_function_evals) << ',' << fixed2(r.mean_cpu_seconds) << ',' << fixed2(r.tol_reached_fraction)
       << '\n';
  return os.str();
}

void export_table(const std::vector<BenchmarkRow> &rows, const std::string &path) {
  write_file(path, table_csv(rows));
}

} // namespace npqn
