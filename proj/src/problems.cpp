#include "npqn/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace npqn {

namespace {

using Objective = SmoothObjective<double>;

struct Square {
  double w;
  VectorXd a;
  double r;
};

// sum_k w_k (a_k'x - r_k)^2 + c0, stored as 1/2 x'Ax + b'x + c.
Objective sum_of_squares(const std::vector<Square> &terms, double c0) {
  const Eigen::Index n = terms.front().a.size();
  MatrixXd A = MatrixXd::Zero(n, n);
  VectorXd b = VectorXd::Zero(n);
  double c = c0;
  for (const auto &t : terms) {
    A += 2.0 * t.w * t.a * t.a.transpose();
    b -= 2.0 * t.w * t.r * t.a;
    c += t.w * t.r * t.r;
  }
  Objective f;
  f.value = [A, b, c](const VectorXd &x) { return 0.5 * x.dot(A * x) + b.dot(x) + c; };
  f.gradient = [A, b](const VectorXd &x) -> VectorXd { return A * x + b; };
  f.hessian = [A](const VectorXd &) -> MatrixXd { return A; };
  f.lipschitz_hint = A.selfadjointView<Eigen::Lower>().eigenvalues().cwiseAbs().maxCoeff();
  return f;
}

VectorXd unit(int n, int i) { return VectorXd::Unit(n, i); }

VectorXd vec2(int n, double a0, double a1) {
  VectorXd a = VectorXd::Zero(n);
  a(0) = a0;
  a(1) = a1;
  return a;
}

// sum_i w (x_i - c_i)^2 + c0.
Objective separable(int n, double w, const VectorXd &center, double c0) {
  std::vector<Square> t;
  for (int i = 0; i < n; ++i)
    t.push_back({w, unit(n, i), center(i)});
  return sum_of_squares(t, c0);
}

// Coordinates from index `from` on enter every objective as x_i^2.
void pad(std::vector<Square> &t, int n, int from) {
  for (int i = from; i < n; ++i)
    t.push_back({1.0, unit(n, i), 0.0});
}

std::vector<Objective> an1() {
  Objective f1, f2;
  f1.value = [](const VectorXd &x) {
    return 0.25 * (std::pow(x(0) - 1.0, 4) + 2.0 * std::pow(x(1) - 2.0, 4));
  };
  f1.gradient = [](const VectorXd &x) -> VectorXd {
    return (VectorXd(2) << std::pow(x(0) - 1.0, 3), 2.0 * std::pow(x(1) - 2.0, 3)).finished();
  };
  f1.hessian = [](const VectorXd &x) -> MatrixXd {
    MatrixXd H = MatrixXd::Zero(2, 2);
    H(0, 0) = 3.0 * std::pow(x(0) - 1.0, 2);
    H(1, 1) = 6.0 * std::pow(x(1) - 2.0, 2);
    return H;
  };
  f2.value = [](const VectorXd &x) { return std::exp(0.5 * (x(0) + x(1))) + x.squaredNorm(); };
  f2.gradient = [](const VectorXd &x) -> VectorXd {
    return VectorXd::Constant(2, 0.5 * std::exp(0.5 * (x(0) + x(1)))) + 2.0 * x;
  };
  f2.hessian = [](const VectorXd &x) -> MatrixXd {
    return MatrixXd::Constant(2, 2, 0.25 * std::exp(0.5 * (x(0) + x(1)))) + 2.0 * MatrixXd::Identity(2, 2);
  };
  return {f1, f2};
}

std::vector<Objective> fds(int n) {
  const double dn = n;
  Objective f1, f2, f3;
  f1.value = [n, dn](const VectorXd &x) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += (i + 1) * std::pow(x(i) - (i + 1), 4);
    return s / (dn * dn);
  };
  f1.gradient = [n, dn](const VectorXd &x) -> VectorXd {
    VectorXd g(n);
    for (int i = 0; i < n; ++i)
      g(i) = 4.0 * (i + 1) * std::pow(x(i) - (i + 1), 3) / (dn * dn);
    return g;
  };
  f1.hessian = [n, dn](const VectorXd &x) -> MatrixXd {
    MatrixXd H = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      H(i, i) = 12.0 * (i + 1) * std::pow(x(i) - (i + 1), 2) / (dn * dn);
    return H;
  };
  f2.value = [dn](const VectorXd &x) { return std::exp(x.sum() / dn) + x.squaredNorm(); };
  f2.gradient = [n, dn](const VectorXd &x) -> VectorXd {
    return VectorXd::Constant(n, std::exp(x.sum() / dn) / dn) + 2.0 * x;
  };
  f2.hessian = [n, dn](const VectorXd &x) -> MatrixXd {
    return MatrixXd::Constant(n, n, std::exp(x.sum() / dn) / (dn * dn)) + 2.0 * MatrixXd::Identity(n, n);
  };
  VectorXd c(n);
  for (int i = 0; i < n; ++i)
    c(i) = (i + 1) * (n - i) / (dn * (dn + 1.0));
  f3.value = [c](const VectorXd &x) { return c.dot((-x).array().exp().matrix()); };
  f3.gradient = [c](const VectorXd &x) -> VectorXd { return -c.cwiseProduct((-x).array().exp().matrix()); };
  f3.hessian = [c](const VectorXd &x) -> MatrixXd {
    return c.cwiseProduct((-x).array().exp().matrix()).asDiagonal();
  };
  return {f1, f2, f3};
}

std::vector<Objective> ms1() {
  Objective f1, f2;
  f1.value = [](const VectorXd &x) { return std::pow(x(0) - 1.0, 2) + std::pow(x(1), 4); };
  f1.gradient = [](const VectorXd &x) -> VectorXd {
    return (VectorXd(2) << 2.0 * (x(0) - 1.0), 4.0 * std::pow(x(1), 3)).finished();
  };
  f1.hessian = [](const VectorXd &x) -> MatrixXd {
    return VectorXd((VectorXd(2) << 2.0, 12.0 * x(1) * x(1)).finished()).asDiagonal();
  };
  f2.value = [](const VectorXd &x) { return std::pow(x(0), 4) + std::pow(x(1) - 1.0, 2); };
  f2.gradient = [](const VectorXd &x) -> VectorXd {
    return (VectorXd(2) << 4.0 * std::pow(x(0), 3), 2.0 * (x(1) - 1.0)).finished();
  };
  f2.hessian = [](const VectorXd &x) -> MatrixXd {
    return VectorXd((VectorXd(2) << 12.0 * x(0) * x(0), 2.0).finished()).asDiagonal();
  };
  return {f1, f2};
}

std::vector<Objective> ms2(int n) {
  const VectorXd e = VectorXd::Ones(n);
  Objective f1, f2;
  f1.value = [e](const VectorXd &x) { return (x - e).squaredNorm() + 0.25 * x.array().pow(4).sum(); };
  f1.gradient = [e](const VectorXd &x) -> VectorXd {
    return 2.0 * (x - e) + x.array().pow(3).matrix();
  };
  f1.hessian = [n](const VectorXd &x) -> MatrixXd {
    return (2.0 * VectorXd::Ones(n) + 3.0 * x.cwiseAbs2()).asDiagonal();
  };
  const double dn = n;
  f2.value = [e, dn](const VectorXd &x) { return (x + e).squaredNorm() + std::exp(x.sum() / dn); };
  f2.gradient = [e, n, dn](const VectorXd &x) -> VectorXd {
    return 2.0 * (x + e) + VectorXd::Constant(n, std::exp(x.sum() / dn) / dn);
  };
  f2.hessian = [n, dn](const VectorXd &x) -> MatrixXd {
    return 2.0 * MatrixXd::Identity(n, n) + MatrixXd::Constant(n, n, std::exp(x.sum() / dn) / (dn * dn));
  };
  return {f1, f2};
}

std::vector<Objective> sdd1(int n) {
  std::vector<Objective> out;
  for (int j = 0; j < 3; ++j) {
    const VectorXd c = unit(n, j);
    Objective f;
    f.value = [c](const VectorXd &x) { return (x - c).squaredNorm() + 0.1 * std::pow(x.squaredNorm(), 2); };
    f.gradient = [c](const VectorXd &x) -> VectorXd { return 2.0 * (x - c) + 0.4 * x.squaredNorm() * x; };
    f.hessian = [n](const VectorXd &x) -> MatrixXd {
      return (2.0 + 0.4 * x.squaredNorm()) * MatrixXd::Identity(n, n) + 0.8 * x * x.transpose();
    };
    out.push_back(f);
  }
  return out;
}

std::vector<Objective> vu1() {
  Objective f1;
  f1.value = [](const VectorXd &x) { return 1.0 / (x.squaredNorm() + 1.0); };
  f1.gradient = [](const VectorXd &x) -> VectorXd {
    const double r = x.squaredNorm() + 1.0;
    return -2.0 * x / (r * r);
  };
  f1.hessian = [](const VectorXd &x) -> MatrixXd {
    const double r = x.squaredNorm() + 1.0;
    return -2.0 * MatrixXd::Identity(2, 2) / (r * r) + 8.0 * x * x.transpose() / (r * r * r);
  };
  return {f1, sum_of_squares({{1.0, unit(2, 0), 0.0}, {3.0, unit(2, 1), 0.0}}, 1.0)};
}

std::vector<Objective> objectives_for(const std::string &name, int n) {
  const VectorXd zero = VectorXd::Zero(n);
  if (name == "AN1")
    return an1();
  if (name == "AP2")
    return {separable(n, 1.0, zero, -4.0), separable(n, 1.0, VectorXd::Ones(n), 0.0)};
  if (name == "BK1")
    return {separable(n, 1.0, zero, 0.0), separable(n, 1.0, VectorXd::Constant(n, 5.0), 0.0)};
  if (name == "FDS")
    return fds(n);
  if (name == "IKK1") {
    std::vector<Square> t3;
    pad(t3, n, 1);
    return {sum_of_squares({{1.0, unit(n, 0), 0.0}}, 0.0), sum_of_squares({{1.0, unit(n, 0), 20.0}}, 0.0),
            sum_of_squares(t3, 0.0)};
  }
  if (name == "JOS1")
    return {separable(n, 1.0 / n, zero, 0.0), separable(n, 1.0 / n, VectorXd::Constant(n, 2.0), 0.0)};
  if (name == "LOVISON1")
    return {sum_of_squares({{1.05, unit(n, 0), 0.0}, {0.98, unit(n, 1), 0.0}}, 0.0),
            sum_of_squares({{0.99, unit(n, 0), 3.0}, {1.03, unit(n, 1), 2.5}}, 0.0)};
  if (name == "LRS1")
    return {separable(n, 1.0, zero, 0.0), sum_of_squares({{1.0, unit(n, 0), -2.0}, {1.0, unit(n, 1), 0.0}}, 0.0)};
  if (name == "MHHM2") {
    const double cx[3] = {0.8, 0.85, 0.9}, cy[3] = {0.6, 0.7, 0.6};
    std::vector<Objective> out;
    for (int j = 0; j < 3; ++j) {
      std::vector<Square> t = {{1.0, unit(n, 0), cx[j]}, {1.0, unit(n, 1), cy[j]}};
      pad(t, n, 2);
      out.push_back(sum_of_squares(t, 0.0));
    }
    return out;
  }
  if (name == "MOP1")
    return {separable(n, 1.0, zero, 0.0), separable(n, 1.0, VectorXd::Constant(n, 2.0), 0.0)};
  if (name == "MOP7") {
    std::vector<Square> t1 = {{1.0 / 2.0, unit(n, 0), 2.0}, {1.0 / 13.0, unit(n, 1), -1.0}};
    std::vector<Square> t2 = {{1.0 / 36.0, vec2(n, 1.0, 1.0), 3.0}, {1.0 / 8.0, vec2(n, -1.0, 1.0), -2.0}};
    std::vector<Square> t3 = {{1.0 / 175.0, vec2(n, 1.0, 2.0), 1.0}, {1.0 / 17.0, vec2(n, -1.0, 2.0), 0.0}};
    pad(t1, n, 2);
    pad(t2, n, 2);
    pad(t3, n, 2);
    return {sum_of_squares(t1, 3.0), sum_of_squares(t2, -17.0), sum_of_squares(t3, -13.0)};
  }
  if (name == "MS1")
    return ms1();
  if (name == "MS2")
    return ms2(n);
  if (name == "SDD1")
    return sdd1(n);
  if (name == "SP1")
    return {sum_of_squares({{1.0, unit(n, 0), 1.0}, {1.0, vec2(n, 1.0, -1.0), 0.0}}, 0.0),
            sum_of_squares({{1.0, unit(n, 1), 3.0}, {1.0, vec2(n, 1.0, -1.0), 0.0}}, 0.0)};
  if (name == "VFM1") {
    std::vector<Square> t1 = {{1.0, unit(n, 0), 0.0}, {1.0, unit(n, 1), 1.0}};
    std::vector<Square> t2 = {{1.0, unit(n, 0), 0.0}, {1.0, unit(n, 1), -1.0}};
    std::vector<Square> t3 = {{1.0, unit(n, 0), 1.0}, {1.0, unit(n, 1), 0.0}};
    pad(t1, n, 2);
    pad(t2, n, 2);
    pad(t3, n, 2);
    return {sum_of_squares(t1, 0.0), sum_of_squares(t2, 1.0), sum_of_squares(t3, 2.0)};
  }
  if (name == "VU1")
    return vu1();
  if (name == "ZLT1") {
    std::vector<Objective> out;
    for (int j = 0; j < 3; ++j)
      out.push_back(separable(n, 1.0, unit(n, j), 0.0));
    return out;
  }
  throw Error(Errc::UnknownProblem, "no formulas for " + name);
}

const char *kExtend = " Coordinates beyond the source dimension enter every objective as x_i^2.";
const char *kNoSecond = " No second source was reachable offline; checked by finite differences only.";
const char *kStandIn =
    "Formula not located in the cited source; convex stand-in defined by this registry (see README).";

std::vector<ProblemEntry> build_table() {
  const std::string ap1 = "Ansary & Panda (2015), problem AP1, first two objectives "
                          "f1 = ((x1-1)^4 + 2(x2-2)^4)/4, f2 = exp((x1+x2)/2) + x1^2 + x2^2.";
  const std::string ap2 = "Ansary & Panda (2015), problem AP2 (n=1: x^2-4, (x-1)^2), summed over coordinates.";
  const std::string bk1 = "Binh & Korn (1997) as collected in Coello, Lamont & Van Veldhuizen (2007).";
  const std::string fds = "Fliege, Grana Drummond & Svaiter (2009), problem FDS.";
  const std::string ikk1 = "IKK1 as collected in Coello, Lamont & Van Veldhuizen (2007): x1^2, (x1-20)^2, x2^2.";
  const std::string jos1 = "Jin, Olhofer & Sendhoff (2001), JOS1 with 1/n scaling.";
  const std::string lov1 = "Lovison (2011), problem 1 in minimization form.";
  const std::string lrs1 = "Laumanns, Rudolph & Schwefel (1998), LRS1.";
  const std::string mhhm2 = "MHHM2 as collected in Coello, Lamont & Van Veldhuizen (2007).";
  const std::string mop1 = "Schaffer (1985), MOP1 in Van Veldhuizen's numbering. Cross-checked against jMetalPy 1.8.0 "
                           "class Schaffer.";
  const std::string mop7 = "Viennet, MOP7 in Van Veldhuizen's numbering. Cross-checked against jMetalPy 1.8.0 class "
                           "Viennet2 (same box).";
  const std::string sp1 = "Sefrioui & Periaux (2000), SP1.";
  const std::string vfm1 = "Viennet, Fonteix & Marc (1996), VFM1.";
  const std::string vu1 = "Valenzuela-Rendon & Uresti-Charre (1997), VU1.";
  const std::string zlt1 = "Zitzler, Laumanns & Thiele (2000), ZLT1.";

  auto row = [](int id, std::string name, int m, int n, double lb, double ub, std::string src, std::string prov,
                bool convex = true) {
    return ProblemEntry{id, std::move(name), m, n, lb, ub, std::move(src), std::move(prov), convex};
  };
  return {
      row(1, "AN1", 2, 2, -3, 7, "AP15", ap1 + kNoSecond),
      row(2, "AP2", 2, 2, -5, 5, "DAPM00", ap2 + kNoSecond),
      row(3, "BK1", 2, 2, -3, 5, "CLV07", bk1 + kNoSecond),
      row(4, "FDS", 3, 3, -2, 4, "CF98", fds + kNoSecond),
      row(5, "FDS", 3, 5, -2, 2, "CF98", fds + kNoSecond),
      row(6, "IKK1", 3, 2, -2, 3, "CLV07", ikk1 + kNoSecond),
      row(7, "IKK1", 3, 3, -2, 2, "CLV07", ikk1 + " The third objective is x2^2 + x3^2." + kNoSecond),
      row(8, "JOS1", 2, 2, -5, 5, "D17", jos1 + kNoSecond),
      row(9, "LOVISON1", 2, 2, -3, 5, "DJ13", lov1 + kNoSecond),
      row(10, "LRS1", 2, 2, -50, 50, "CLV07", lrs1 + kNoSecond),
      row(11, "MHHM2", 3, 3, -4, 4, "CLV07", mhhm2 + kExtend + kNoSecond),
      row(12, "MHHM2", 3, 2, -4, 4, "CLV07", mhhm2 + kNoSecond),
      row(13, "MOP1", 2, 1, -100, 100, "CLV07", mop1),
      row(14, "MOP7", 3, 3, -4, 4, "CLV07", mop7 + kExtend),
      row(15, "MOP7", 3, 2, -4, 4, "CLV07", mop7),
      row(16, "MS1", 2, 2, -2, 2, "CCMP95", std::string(kStandIn) + " f1 = (x1-1)^2 + x2^4, f2 = x1^4 + (x2-1)^2."),
      row(17, "MS2", 2, 4, -2, 2, "CCMP95",
          std::string(kStandIn) + " f1 = |x-e|^2 + sum x_i^4/4, f2 = |x+e|^2 + exp(sum x_i/n)."),
      row(18, "SDD1", 3, 3, -2, 2, "DGW92", std::string(kStandIn) + " f_j = |x-e_j|^2 + 0.1|x|^4."),
      row(19, "SP1", 2, 2, -1, 5, "CLV07", sp1 + kNoSecond),
      row(20, "VFM1", 3, 2, -2, 4, "CLV07", vfm1 + kNoSecond),
      row(21, "VFM1", 3, 3, -2, 4, "CLV07", vfm1 + kExtend + kNoSecond),
      row(22, "VU1", 2, 2, -3, 3, "CLV07", vu1 + " f1 = 1/(|x|^2+1) is nonconvex." + kNoSecond, false),
      row(23, "ZLT1", 3, 3, -3, 3, "CLV07", zlt1 + kNoSecond),
  };
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

bool scalable(const std::string &name) { return name == "JOS1" || name == "FDS" || name == "ZLT1"; }

std::vector<std::string> registry_names() {
  std::vector<std::string> names;
  for (const auto &e : table1())
    if (std::find(names.begin(), names.end(), e.name) == names.end())
      names.push_back(e.name);
  return names;
}

} // namespace

const std::vector<ProblemEntry> &table1() {
  static const std::vector<ProblemEntry> table = build_table();
  return table;
}

const ProblemEntry &find_entry(std::string_view name, std::optional<int> n) {
  const std::string key = upper(name);
  const ProblemEntry *first = nullptr;
  for (const auto &e : table1()) {
    if (e.name != key)
      continue;
    if (!first)
      first = &e;
    if (!n || e.n == *n)
      return e;
  }
  if (!first)
    throw Error(Errc::UnknownProblem,
                "unknown problem '" + std::string(name) + "' (did you mean '" + nearest(key, registry_names()) + "'?)");
  throw Error(Errc::UnknownProblem, key + " has no row with n = " + std::to_string(*n));
}

ProblemSpecd make_problem(const ProblemEntry &entry) {
  ProblemSpecd p;
  p.name = entry.name;
  p.m = entry.m;
  p.n = entry.n;
  p.box = Boxd(VectorXd::Constant(entry.n, entry.lb), VectorXd::Constant(entry.n, entry.ub));
  p.smooth = objectives_for(entry.name, entry.n);
  for (int j = 0; j < entry.m; ++j)
    p.nonsmooth.push_back(PolyhedralTermd::zero(entry.n));
  return p;
}

ProblemSpecd get_problem(std::string_view name, std::optional<int> n_override) {
  const std::string key = upper(name);
  try {
    return make_problem(find_entry(key, n_override));
  } catch (const Error &) {
    if (!n_override || !scalable(key))
      throw;
  }
  ProblemEntry e = find_entry(key);
  if (*n_override < e.m && key == "ZLT1")
    throw Error(Errc::UnknownProblem, "ZLT1 needs n >= m = " + std::to_string(e.m));
  if (*n_override < 1)
    throw Error(Errc::UnknownProblem, "n must be positive");
  e.n = *n_override;
  return make_problem(e);
}

ProblemSpecd attach_nonsmooth(ProblemSpecd problem, std::uint64_t master_seed) {
  const VectorXd anchor = problem.box.midpoint();
  const std::uint64_t stream = substream_seed(master_seed, stream_tag::nonsmooth);
  problem.nonsmooth.clear();
  for (int j = 0; j < problem.m; ++j) {
    SplitMix64 rng(substream_seed(stream, static_cast<std::uint64_t>(j)));
    problem.nonsmooth.push_back(generate_random_term<double>(problem.n, anchor, rng));
  }
  problem.nonsmooth_seed = master_seed;
  return problem;
}

std::vector<VectorXd> uniform_starts(const Boxd &box, int count, std::uint64_t master_seed) {
  if (count < 1)
    throw Error(Errc::PreconditionViolation, "count must be at least 1");
  SplitMix64 rng(substream_seed(master_seed, stream_tag::starts));
  std::vector<VectorXd> out(count, VectorXd(box.size()));
  for (auto &x : out)
    for (Eigen::Index i = 0; i < box.size(); ++i)
      x(i) = rng.uniform(box.lb(i), box.ub(i));
  return out;
}

std::string describe(const ProblemEntry &e) {
  std::ostringstream os;
  os << e.id << ' ' << e.name << " m=" << e.m << " n=" << e.n << " [" << e.lb << ',' << e.ub << "] " << e.source;
  return os.str();
}

} // namespace npqn
