#pragma once

#include "npqn/config.hpp"
#include "npqn/model.hpp"

#include <functional>

namespace npqn {

/// Average-type reference values: q_{k+1} = eta q_k + 1,
/// C_{k+1} = (eta q_k C_k + F_{k+1}) / q_{k+1}. With eta = 0 it reduces to C = F.
template <typename Scalar> struct NonmonotoneMemory {
  Scalar q{1};
  Vector<Scalar> C;
  Scalar eta{0};

  static NonmonotoneMemory initial(const Vector<Scalar> &F0, Scalar eta) {
    if (!(eta >= Scalar(0) && eta < Scalar(1)))
      throw Error(Errc::PreconditionViolation, "eta must lie in [0,1)");
    return {Scalar(1), F0, eta};
  }
};

template <typename Scalar>
NonmonotoneMemory<Scalar> memory_update(const NonmonotoneMemory<Scalar> &memory,
                                        const Vector<Scalar> &F_new) {
  NonmonotoneMemory<Scalar> next;
  next.eta = memory.eta;
  next.q = memory.eta * memory.q + Scalar(1);
  next.C = ((memory.eta * memory.q) * memory.C + F_new) / next.q;
  return next;
}

/// F_j(x + alpha d) <= C_j + tau alpha theta for every j.
template <typename Scalar>
bool accept_test(const Vector<Scalar> &F_trial, const NonmonotoneMemory<Scalar> &memory, Scalar tau,
                 Scalar alpha, Scalar theta) {
  const Scalar decrease = tau * alpha * theta;
  for (Eigen::Index j = 0; j < F_trial.size(); ++j)
    if (!(F_trial(j) <= memory.C(j) + decrease))
      return false;
  return true;
}

template <typename Scalar> struct StepResult {
  Scalar alpha{0};
  int h = 0;
  Vector<Scalar> F_new;
  Vector<Scalar> x_new;
  /// Trial objective evaluations, including the accepted one.
  int trial_evaluations = 0;
};

namespace detail {

template <typename Scalar, typename Accept>
StepResult<Scalar> backtrack_with(const ProblemSpec<Scalar> &problem, const Vector<Scalar> &x,
                                  const Vector<Scalar> &d, Scalar theta, const SolverConfig &config,
                                  Accept &&accept) {
  if (!(theta < Scalar(0)))
    throw Error(Errc::PreconditionViolation, "line search needs theta < 0 (noncritical point)");
  StepResult<Scalar> out;
  Scalar alpha = Scalar(config.mu);
  for (int h = 0; h <= config.max_backtracks; ++h) {
    Vector<Scalar> trial = x + alpha * d;
    ++out.trial_evaluations;
    if (problem.box.contains(trial, Scalar(kDomainTol))) {
      Vector<Scalar> F = evaluate_objectives(problem, trial);
      if (accept(F, alpha)) {
        out.alpha = alpha;
        out.h = h;
        out.F_new = std::move(F);
        out.x_new = std::move(trial);
        return out;
      }
    }
    alpha *= Scalar(config.rho);
  }
  throw Error(Errc::LineSearchFail,
              "no step accepted within " + std::to_string(config.max_backtracks) + " backtracks");
}

} // namespace detail

/// First alpha in {mu, mu rho, mu rho^2, ...} passing the nonmonotone test.
/// Trial points outside the box count as rejected.
template <typename Scalar>
StepResult<Scalar> backtrack(const ProblemSpec<Scalar> &problem, const Vector<Scalar> &x,
                             const Vector<Scalar> &d, Scalar theta,
                             const NonmonotoneMemory<Scalar> &memory, const SolverConfig &config) {
  const Scalar tau = Scalar(config.tau);
  return detail::backtrack_with(problem, x, d, theta, config, [&](const Vector<Scalar> &F, Scalar alpha) {
    return accept_test(F, memory, tau, alpha, theta);
  });
}

/// Monotone Armijo: F_j(x + alpha d) <= F_j(x) + tau alpha theta.
template <typename Scalar>
StepResult<Scalar> monotone_armijo(const ProblemSpec<Scalar> &problem, const Vector<Scalar> &x,
                                   const Vector<Scalar> &F_x, const Vector<Scalar> &d, Scalar theta,
                                   const SolverConfig &config) {
  const Scalar tau = Scalar(config.tau);
  const NonmonotoneMemory<Scalar> current{Scalar(1), F_x, Scalar(0)};
  return detail::backtrack_with(problem, x, d, theta, config, [&](const Vector<Scalar> &F, Scalar alpha) {
    return accept_test(F, current, tau, alpha, theta);
  });
}

} // namespace npqn
