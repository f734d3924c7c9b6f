#pragma once

#include "npqn/model.hpp"

#include <string>
#include <vector>

namespace npqn::test {

/// f_j(x) = 1/2 (x - c_j)' A_j (x - c_j), g == 0.
inline ProblemSpecd quadratic_problem(const std::vector<MatrixXd> &A, const std::vector<VectorXd> &c, Boxd box,
                                      std::string name = "quadratic") {
  ProblemSpecd p;
  p.name = std::move(name);
  p.m = static_cast<int>(A.size());
  p.n = static_cast<int>(c.front().size());
  p.box = std::move(box);
  for (std::size_t j = 0; j < A.size(); ++j) {
    const MatrixXd Aj = A[j];
    const VectorXd cj = c[j];
    SmoothObjective<double> f;
    f.value = [Aj, cj](const VectorXd &x) { return 0.5 * (x - cj).dot(Aj * (x - cj)); };
    f.gradient = [Aj, cj](const VectorXd &x) -> VectorXd { return Aj * (x - cj); };
    f.hessian = [Aj](const VectorXd &) -> MatrixXd { return Aj; };
    p.smooth.push_back(f);
    p.nonsmooth.push_back(PolyhedralTermd::zero(p.n));
  }
  return p;
}

inline Boxd cube(int n, double lo, double hi) {
  return Boxd(VectorXd::Constant(n, lo), VectorXd::Constant(n, hi));
}

/// f(x) = 1/2 ||x||^2 on [-10, 10]^n.
inline ProblemSpecd half_norm(int n) {
  return quadratic_problem({MatrixXd::Identity(n, n)}, {VectorXd::Zero(n)}, cube(n, -10, 10), "half_norm");
}

inline VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
}

} // namespace npqn::test
