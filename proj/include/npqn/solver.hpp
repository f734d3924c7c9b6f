#pragma once

#include "npqn/config.hpp"
#include "npqn/linesearch.hpp"
#include "npqn/model.hpp"
#include "npqn/quasi_newton.hpp"
#include "npqn/subproblem.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace npqn {

enum class Termination {
  DirectionTol,
  ThetaTol,
  IterCap,
  LineSearchFail,
  SubproblemFail,
};

inline const char *to_string(Termination t) {
  switch (t) {
  case Termination::DirectionTol: return "DirectionTol";
  case Termination::ThetaTol: return "ThetaTol";
  case Termination::IterCap: return "IterCap";
  case Termination::LineSearchFail: return "LineSearchFail";
  case Termination::SubproblemFail: return "SubproblemFail";
  }
  return "?";
}

inline bool converged(Termination t) { return t == Termination::DirectionTol || t == Termination::ThetaTol; }

/// State at iterate k, plus the step taken from it (alpha = 0, h = -1 when
/// the run stopped at this iterate).
template <typename Scalar> struct IterateRecord {
  int k = 0;
  Vector<Scalar> x;
  Vector<Scalar> F;
  Scalar theta{0};
  Vector<Scalar> d;
  Scalar d_norm{0};
  /// Line-search memory in force at iterate k.
  Vector<Scalar> C;
  Scalar q{1};
  Vector<Scalar> lambda;
  Scalar alpha{0};
  int h = -1;
  int trial_evaluations = 0;
  /// Curvature matrix j applied to d (for the Dennis-More ratio).
  std::vector<Vector<Scalar>> curvature_times_d;
  /// Smallest eigenvalue of each curvature matrix used at iterate k.
  std::vector<double> min_eig;
  /// BFGS outcome of the update that followed the step (empty otherwise).
  std::vector<UpdateEvent> updates;
};

struct DiagnosticRecord {
  int k = 0;
  /// ||(hess f_j(x_ref) - B_j) d|| / ||d||; absent without Hessians or when d = 0.
  std::vector<std::optional<double>> dennis_more;
  /// ||x^{k+1} - x^k|| / ||x^k - x_ref||; absent for the last iterate or x^k = x_ref.
  std::optional<double> tau;
};

template <typename Scalar> struct RunReport {
  Variant variant = Variant::NPQNA;
  std::vector<IterateRecord<Scalar>> iterates;
  /// Accepted steps.
  int iterations = 0;
  /// F evaluations at accepted points, the start included (iterations + 1).
  int function_evaluations = 0;
  /// Every F evaluation made by the line search, rejected trials included.
  int trial_evaluations = 0;
  int subproblem_solves = 0;
  double wall_time_seconds = 0.0;
  Termination termination = Termination::IterCap;
  std::string message;
  Vector<Scalar> x;
  Vector<Scalar> F;
  std::vector<DiagnosticRecord> diagnostics;
};

using RunReportd = RunReport<double>;

/// DirectionTol, then ThetaTol, then IterCap. theta <= 0 holds exactly, so a
/// computed theta above -epsilon_theta (rounding can make it positive) counts
/// as ThetaTol.
template <typename Scalar>
std::optional<Termination> check_stop(const SubproblemSolution<Scalar> &solution, int k, const SolverConfig &config) {
  if (solution.d.norm() <= Scalar(config.d_tol))
    return Termination::DirectionTol;
  if (solution.theta > -Scalar(config.epsilon_theta))
    return Termination::ThetaTol;
  if (k >= config.max_iter)
    return Termination::IterCap;
  return std::nullopt;
}

/// Dennis-More ratios and the step ratio tau_k for one record. `next_x` is
/// x^{k+1} when the record has a successor.
template <typename Scalar>
DiagnosticRecord diagnostics_step(const IterateRecord<Scalar> &record, const Vector<Scalar> *next_x,
                                  const ProblemSpec<Scalar> &problem, const Vector<Scalar> &x_ref) {
  DiagnosticRecord diag;
  diag.k = record.k;
  diag.dennis_more.assign(problem.m, std::nullopt);
  if (record.d_norm > Scalar(0) && problem.has_hessians() && !record.curvature_times_d.empty()) {
    for (int j = 0; j < problem.m; ++j) {
      const Vector<Scalar> r = problem.smooth[j].hessian(x_ref) * record.d - record.curvature_times_d[j];
      diag.dennis_more[j] = static_cast<double>(r.norm() / record.d_norm);
    }
  }
  if (next_x) {
    const Scalar denom = (record.x - x_ref).norm();
    if (denom > Scalar(0))
      diag.tau = static_cast<double>((*next_x - record.x).norm() / denom);
  }
  return diag;
}

/// Post-hoc diagnostics over a whole trace.
template <typename Scalar>
std::vector<DiagnosticRecord> compute_diagnostics(const RunReport<Scalar> &report, const ProblemSpec<Scalar> &problem,
                                                  const Vector<Scalar> &x_ref) {
  std::vector<DiagnosticRecord> out;
  for (std::size_t i = 0; i < report.iterates.size(); ++i) {
    const Vector<Scalar> *next = i + 1 < report.iterates.size() ? &report.iterates[i + 1].x : nullptr;
    out.push_back(diagnostics_step(report.iterates[i], next, problem, x_ref));
  }
  return out;
}

/// Per-iteration loop state.
template <typename Scalar> struct IterateState {
  int k = 0;
  Vector<Scalar> x;
  Vector<Scalar> F;
  std::vector<Vector<Scalar>> grads;
  HessianApprox<Scalar> hess_approx;
  NonmonotoneMemory<Scalar> memory;
  std::optional<SubproblemSolution<Scalar>> last_solution;
};

namespace detail {

template <typename Scalar>
std::vector<Matrix<Scalar>> curvatures_for(const IterateState<Scalar> &state, const ProblemSpec<Scalar> &problem,
                                           const SolverConfig &config) {
  if (config.variant != Variant::NPGA)
    return state.hess_approx.matrices;
  std::vector<Matrix<Scalar>> out;
  out.reserve(problem.m);
  for (const auto &f : problem.smooth) {
    Matrix<Scalar> H = f.hessian(state.x);
    H = (H + H.transpose()) / Scalar(2);
    out.push_back(spd_floor_project(H, Scalar(config.spd_floor)));
  }
  return out;
}

} // namespace detail

/// NPQNA, PQNA or NPGA from x0, as selected by config.variant. Failures inside
/// the loop end the run with LineSearchFail or SubproblemFail; the partial
/// trace is kept.
template <typename Scalar>
RunReport<Scalar> run(const ProblemSpec<Scalar> &problem, const Vector<Scalar> &x0, const SolverConfig &config) {
  config.validate();
  require_in_box(problem, x0);
  if (config.variant == Variant::NPGA && !problem.has_hessians())
    throw Error(Errc::PreconditionViolation, "NPGA needs Hessians for every objective of " + problem.name);

  const auto start = std::chrono::steady_clock::now();
  const SubproblemOptions sub_opt = SubproblemOptions::from(config);
  BfgsOptions bfgs_opt;
  bfgs_opt.spd_floor = config.spd_floor;
  bfgs_opt.rule = config.raw_curvature_rule ? CurvatureRule::Raw : CurvatureRule::Relative;
  const Scalar eta = config.variant == Variant::NPQNA ? Scalar(config.eta) : Scalar(0);

  RunReport<Scalar> report;
  report.variant = config.variant;
  IterateState<Scalar> state;
  state.x = x0;
  state.F = evaluate_objectives(problem, x0);
  state.grads = evaluate_gradients(problem, x0);
  state.hess_approx = init_identity<Scalar>(problem.m, problem.n);
  state.memory = NonmonotoneMemory<Scalar>::initial(state.F, eta);
  report.function_evaluations = 1;

  for (state.k = 0;; ++state.k) {
    const std::vector<Matrix<Scalar>> curv = detail::curvatures_for(state, problem, config);
    IterateRecord<Scalar> rec;
    rec.k = state.k;
    rec.x = state.x;
    rec.F = state.F;
    rec.C = state.memory.C;
    rec.q = state.memory.q;
    for (const auto &B : curv)
      rec.min_eig.push_back(static_cast<double>(min_eigenvalue(B)));

    try {
      state.last_solution = solve_subproblem(state.x, state.grads, curv, problem.nonsmooth, problem.box, sub_opt);
    } catch (const Error &e) {
      report.iterates.push_back(std::move(rec));
      report.termination = Termination::SubproblemFail;
      report.message = e.what();
      break;
    }
    ++report.subproblem_solves;
    const SubproblemSolution<Scalar> &sol = *state.last_solution;
    rec.theta = sol.theta;
    rec.d = sol.d;
    rec.d_norm = sol.d.norm();
    rec.lambda = sol.lambda;
    for (int j = 0; j < problem.m; ++j)
      rec.curvature_times_d.push_back(curv[j] * sol.d);

    if (const auto stop = check_stop(sol, state.k, config)) {
      report.iterates.push_back(std::move(rec));
      report.termination = *stop;
      break;
    }

    StepResult<Scalar> step;
    try {
      step = config.variant == Variant::NPQNA
                 ? backtrack(problem, state.x, sol.d, sol.theta, state.memory, config)
                 : monotone_armijo(problem, state.x, state.F, sol.d, sol.theta, config);
    } catch (const Error &e) {
      rec.trial_evaluations = config.max_backtracks + 1;
      report.trial_evaluations += rec.trial_evaluations;
      report.iterates.push_back(std::move(rec));
      report.termination = Termination::LineSearchFail;
      report.message = e.what();
      break;
    }
    rec.alpha = step.alpha;
    rec.h = step.h;
    rec.trial_evaluations = step.trial_evaluations;
    report.trial_evaluations += step.trial_evaluations;

    const Vector<Scalar> s = step.x_new - state.x;
    std::vector<Vector<Scalar>> grads_new = evaluate_gradients(problem, step.x_new);
    if (config.variant != Variant::NPGA && s.norm() > Scalar(0)) {
      std::vector<Vector<Scalar>> y(problem.m);
      for (int j = 0; j < problem.m; ++j)
        y[j] = grads_new[j] - state.grads[j];
      rec.updates = update_all(state.hess_approx, s, y, bfgs_opt);
    }
    state.memory = memory_update(state.memory, step.F_new);
    state.x = std::move(step.x_new);
    state.F = std::move(step.F_new);
    state.grads = std::move(grads_new);
    ++report.iterations;
    ++report.function_evaluations;
    report.iterates.push_back(std::move(rec));
  }

  report.x = state.x;
  report.F = state.F;
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.diagnostics = compute_diagnostics(report, problem, state.x);
  return report;
}

} // namespace npqn
