#pragma once

#include "npqn/nonsmooth.hpp"
#include "npqn/rng.hpp"
#include "npqn/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace npqn {

/// Smooth part f_j of one objective. The Hessian oracle is optional; solvers
/// that need it (NPGA, Dennis-More diagnostics) check for it.
template <typename Scalar> struct SmoothObjective {
  std::function<Scalar(const Vector<Scalar> &)> value;
  std::function<Vector<Scalar>(const Vector<Scalar> &)> gradient;
  std::function<Matrix<Scalar>(const Vector<Scalar> &)> hessian;
  std::optional<Scalar> lipschitz_hint;

  bool has_hessian() const { return static_cast<bool>(hessian); }
};

/// F_j = f_j + g_j, j = 1..m, over an n-dimensional box.
template <typename Scalar> struct ProblemSpec {
  std::string name;
  int m = 0;
  int n = 0;
  Box<Scalar> box;
  std::vector<SmoothObjective<Scalar>> smooth;
  std::vector<PolyhedralTerm<Scalar>> nonsmooth;
  /// Master seed the nonsmooth terms were drawn from, if they were drawn.
  std::optional<std::uint64_t> nonsmooth_seed;

  bool has_hessians() const {
    for (const auto &f : smooth)
      if (!f.has_hessian())
        return false;
    return true;
  }
};

using ProblemSpecd = ProblemSpec<double>;

inline constexpr double kDomainTol = 1e-12;

template <typename Scalar>
void require_in_box(const ProblemSpec<Scalar> &problem, const Vector<Scalar> &x) {
  if (x.size() != problem.n)
    throw Error(Errc::DimensionMismatch, "point has dimension " + std::to_string(x.size()) +
                                             ", problem has " + std::to_string(problem.n));
  if (!problem.box.contains(x, Scalar(kDomainTol)))
    throw Error(Errc::OutOfDomain, "point outside the problem box");
}

/// F(x) = f(x) + g(x). Pure; evaluation counting is the caller's job.
template <typename Scalar>
Vector<Scalar> evaluate_objectives(const ProblemSpec<Scalar> &problem, const Vector<Scalar> &x) {
  require_in_box(problem, x);
  Vector<Scalar> F(problem.m);
  for (int j = 0; j < problem.m; ++j)
    F(j) = problem.smooth[j].value(x) + eval_support(problem.nonsmooth[j], x);
  return F;
}

template <typename Scalar>
std::vector<Vector<Scalar>> evaluate_gradients(const ProblemSpec<Scalar> &problem,
                                               const Vector<Scalar> &x) {
  std::vector<Vector<Scalar>> grads;
  grads.reserve(problem.m);
  for (const auto &f : problem.smooth)
    grads.push_back(f.gradient(x));
  return grads;
}

/// ||grad(x) - fd(x)||_inf / max(||fd(x)||_inf, 1), central differences.
template <typename Scalar>
Scalar gradient_error(const SmoothObjective<Scalar> &f, const Vector<Scalar> &x) {
  const Eigen::Index n = x.size();
  Vector<Scalar> fd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar h = std::cbrt(std::numeric_limits<Scalar>::epsilon()) * std::max(Scalar(1), std::abs(x(i)));
    Vector<Scalar> xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    fd(i) = (f.value(xp) - f.value(xm)) / (xp(i) - xm(i));
  }
  const Vector<Scalar> g = f.gradient(x);
  return (g - fd).template lpNorm<Eigen::Infinity>() /
         std::max(fd.template lpNorm<Eigen::Infinity>(), Scalar(1));
}

/// Same check for the Hessian against central differences of the gradient.
template <typename Scalar>
Scalar hessian_error(const SmoothObjective<Scalar> &f, const Vector<Scalar> &x) {
  const Eigen::Index n = x.size();
  Matrix<Scalar> fd(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar h = std::cbrt(std::numeric_limits<Scalar>::epsilon()) * std::max(Scalar(1), std::abs(x(i)));
    Vector<Scalar> xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    fd.col(i) = (f.gradient(xp) - f.gradient(xm)) / (xp(i) - xm(i));
  }
  const Matrix<Scalar> H = f.hessian(x);
  return (H - fd).template lpNorm<Eigen::Infinity>() /
         std::max(fd.template lpNorm<Eigen::Infinity>(), Scalar(1));
}

struct Violation {
  std::string what;
  double magnitude = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr double kDerivativeTol = 1e-5;
inline constexpr double kConditionLimit = 1e8;

/// Finite-difference consistency of every oracle at 10 seeded interior points,
/// dimension agreement, and nonsingularity of the nonsmooth matrices.
template <typename Scalar>
ValidationReport validate_problem(const ProblemSpec<Scalar> &problem, std::uint64_t seed = 0) {
  ValidationReport report;
  auto add = [&](std::string what, double mag) { report.violations.push_back({std::move(what), mag}); };

  if (problem.m < 1 || problem.n < 1) {
    add("m and n must be >= 1", 0.0);
    return report;
  }
  if (static_cast<int>(problem.smooth.size()) != problem.m)
    add("smooth objective count differs from m", static_cast<double>(problem.smooth.size()));
  if (static_cast<int>(problem.nonsmooth.size()) != problem.m)
    add("nonsmooth term count differs from m", static_cast<double>(problem.nonsmooth.size()));
  if (problem.box.size() != problem.n)
    add("box dimension differs from n", static_cast<double>(problem.box.size()));
  if (!report.ok())
    return report;

  for (int j = 0; j < problem.m; ++j) {
    const auto &term = problem.nonsmooth[j];
    if (term.dim() != problem.n) {
      add("nonsmooth term " + std::to_string(j) + " has wrong dimension", static_cast<double>(term.dim()));
      continue;
    }
    const double cond = static_cast<double>(condition_number(term.G()));
    if (!(cond < kConditionLimit))
      add("nonsmooth matrix " + std::to_string(j) + " is singular or ill-conditioned", cond);
  }

  SplitMix64 rng(seed);
  double worst_grad = 0.0, worst_hess = 0.0;
  int worst_grad_j = -1, worst_hess_j = -1;
  for (int sample = 0; sample < 10; ++sample) {
    Vector<Scalar> x(problem.n);
    for (int i = 0; i < problem.n; ++i) {
      const double lo = static_cast<double>(problem.box.lb(i)), hi = static_cast<double>(problem.box.ub(i));
      // Interior: keep away from the faces by 5% of the width.
      x(i) = static_cast<Scalar>(rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)));
    }
    for (int j = 0; j < problem.m; ++j) {
      const auto &f = problem.smooth[j];
      if (!f.value || !f.gradient) {
        add("objective " + std::to_string(j) + " lacks value or gradient oracle", 0.0);
        return report;
      }
      if (f.gradient(x).size() != problem.n) {
        add("gradient " + std::to_string(j) + " has wrong dimension", 0.0);
        return report;
      }
      const double ge = static_cast<double>(gradient_error(f, x));
      if (ge > worst_grad) {
        worst_grad = ge;
        worst_grad_j = j;
      }
      if (f.has_hessian()) {
        const Matrix<Scalar> H = f.hessian(x);
        if (H.rows() != problem.n || H.cols() != problem.n) {
          add("hessian " + std::to_string(j) + " has wrong dimension", 0.0);
          return report;
        }
        const double he = static_cast<double>(hessian_error(f, x));
        if (he > worst_hess) {
          worst_hess = he;
          worst_hess_j = j;
        }
      }
    }
  }
  if (worst_grad > kDerivativeTol)
    add("gradient of objective " + std::to_string(worst_grad_j) + " inconsistent with value", worst_grad);
  if (worst_hess > kDerivativeTol)
    add("hessian of objective " + std::to_string(worst_hess_j) + " inconsistent with gradient", worst_hess);
  return report;
}

} // namespace npqn
