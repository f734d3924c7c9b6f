#pragma once

#include "npqn/config.hpp"
#include "npqn/nonsmooth.hpp"
#include "npqn/quasi_newton.hpp"
#include "npqn/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace npqn {

/// One quadratic row  grad'd + 1/2 d'H d + b'w - g(x) - t <= 0  of the
/// epigraph program, with its nonsmooth term dualized through A'w = x + d.
template <typename Scalar> struct QuadRow {
  Vector<Scalar> grad;
  Matrix<Scalar> H;
  Scalar g_x{0};
  const PolyhedralTerm<Scalar> *term = nullptr;

  bool has_dual_block() const { return term != nullptr && !term->is_zero(); }
};

/// minimize t over (t, d, w_1..w_m) subject to the quadratic rows,
/// A_j' w_j = x + d, w_j >= 0 and (optionally) lb <= x + d <= ub.
/// Rows whose term is zero carry no w block.
template <typename Scalar> struct EpigraphQCQP {
  Vector<Scalar> x;
  std::vector<QuadRow<Scalar>> rows;
  /// Box rows on d: lo = lb - x, hi = ub - x.
  Vector<Scalar> lo;
  Vector<Scalar> hi;
  bool enforce_box = true;

  Eigen::Index n() const { return x.size(); }
  int m() const { return static_cast<int>(rows.size()); }
};

struct SubproblemOptions {
  Variant variant = Variant::NPQNA;
  double pqna_reg = 1e-3;
  double spd_floor = 1e-8;
  double tol = 1e-8;
  bool enforce_box = true;
  // Barrier schedule: weight mu_start, mu_start * factor, ..., down to mu_end,
  // all times the model scale max_j 1/2 g_j'H_j^{-1}g_j (at least 1).
  double mu_start = 1.0;
  double mu_end = 1e-16;
  double mu_factor = 0.1;
  int max_newton_per_stage = 100;

  static SubproblemOptions from(const SolverConfig &c) {
    SubproblemOptions o;
    o.variant = c.variant;
    o.pqna_reg = c.pqna_reg;
    o.spd_floor = c.spd_floor;
    o.tol = c.subproblem_tol;
    o.enforce_box = c.enforce_box;
    return o;
  }
};

/// KKT residuals of the min-max program in the form
///   sum_j lambda_j (grad_j + H_j d + xi_j) + box multipliers = 0,
///   Q_j(x,d) <= theta,  lambda_j (Q_j(x,d) - theta) = 0,  lambda in the simplex.
struct KktResidual {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double simplex = 0.0;

  double max() const { return std::max({stationarity, feasibility, complementarity, simplex}); }
};

template <typename Scalar> struct SubproblemSolution {
  Vector<Scalar> d;
  Scalar theta{0};
  Vector<Scalar> lambda;
  /// Dual LP variables (w+, w-) per objective; empty for zero terms.
  std::vector<Vector<Scalar>> w;
  /// Multiplier estimate u_j in [-delta, delta]^n with xi_j = G^{-1} u_j.
  std::vector<Vector<Scalar>> dual_u;
  Vector<Scalar> box_lower_mult;
  Vector<Scalar> box_upper_mult;
  std::vector<int> active_set;
  KktResidual kkt;
  /// Epigraph value reached by the barrier iteration (>= theta).
  Scalar t{0};
  int newton_iterations = 0;
};

using SubproblemSolutiond = SubproblemSolution<double>;

/// Value of row j at d: Q_j(x, d) = grad'd + 1/2 d'H d + g(x + d) - g(x).
template <typename Scalar>
Scalar model_value(const QuadRow<Scalar> &row, const Vector<Scalar> &x, const Vector<Scalar> &d) {
  Scalar v = row.grad.dot(d) + Scalar(0.5) * d.dot(row.H * d);
  if (row.has_dual_block())
    v += eval_support(*row.term, Vector<Scalar>(x + d)) - row.g_x;
  return v;
}

/// Assembles the program. PQNA adds pqna_reg * I to every curvature matrix.
/// Throws NonConvexRow when a curvature matrix is not SPD at the floor.
template <typename Scalar>
EpigraphQCQP<Scalar> build_qcqp(const Vector<Scalar> &x, const std::vector<Vector<Scalar>> &grads,
                                const std::vector<Matrix<Scalar>> &curvatures,
                                const std::vector<PolyhedralTerm<Scalar>> &terms, const Box<Scalar> &box,
                                const SubproblemOptions &opt) {
  const Eigen::Index n = x.size();
  const std::size_t m = grads.size();
  if (curvatures.size() != m || terms.size() != m)
    throw Error(Errc::DimensionMismatch, "gradients, curvatures and terms differ in count");
  EpigraphQCQP<Scalar> q;
  q.x = x;
  q.enforce_box = opt.enforce_box;
  if (opt.enforce_box) {
    if (box.size() != n)
      throw Error(Errc::DimensionMismatch, "box dimension differs from x");
    q.lo = box.lb - x;
    q.hi = box.ub - x;
  }
  q.rows.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    auto &row = q.rows[j];
    if (grads[j].size() != n || curvatures[j].rows() != n || curvatures[j].cols() != n || terms[j].dim() != n)
      throw Error(Errc::DimensionMismatch, "row " + std::to_string(j) + " has inconsistent dimensions");
    row.grad = grads[j];
    row.H = curvatures[j];
    if (opt.variant == Variant::PQNA)
      row.H.diagonal().array() += Scalar(opt.pqna_reg);
    const Scalar lmin = min_eigenvalue(row.H);
    if (!(lmin >= Scalar(opt.spd_floor) * Scalar(1 - 1e-6)))
      throw Error(Errc::NonConvexRow, "curvature matrix " + std::to_string(j) + " has eigenvalue " +
                                          std::to_string(static_cast<double>(lmin)));
    row.term = &terms[j];
    row.g_x = eval_support(terms[j], x);
  }
  return q;
}

template <typename Scalar> struct BarrierPoint {
  Scalar t{0};
  Vector<Scalar> d;
  std::vector<Vector<Scalar>> w;
};

namespace detail {

/// Start with d = d0: w_j = (max(v,0)+1, max(-v,0)+1), v = G^{-T}(x + d0),
/// and t one above the largest row value.
template <typename Scalar>
BarrierPoint<Scalar> feasible_point(const EpigraphQCQP<Scalar> &q, const Vector<Scalar> &d0) {
  BarrierPoint<Scalar> p;
  p.d = d0;
  p.w.resize(q.rows.size());
  Scalar tmax = -std::numeric_limits<Scalar>::infinity();
  const Vector<Scalar> y = q.x + d0;
  for (std::size_t j = 0; j < q.rows.size(); ++j) {
    const auto &row = q.rows[j];
    Scalar val = row.grad.dot(d0) + Scalar(0.5) * d0.dot(row.H * d0) - row.g_x;
    if (row.has_dual_block()) {
      const Vector<Scalar> v = row.term->Ginv_T() * y;
      const Eigen::Index n = v.size();
      Vector<Scalar> w(2 * n);
      w.head(n) = v.cwiseMax(Scalar(0)).array() + Scalar(1);
      w.tail(n) = (-v).cwiseMax(Scalar(0)).array() + Scalar(1);
      val += row.term->dual_b().dot(w);
      p.w[j] = std::move(w);
    }
    tmax = std::max(tmax, val);
  }
  p.t = tmax + Scalar(1);
  return p;
}

} // namespace detail

/// Strictly feasible (t, d = 0, w) for the barrier iteration. Requires x
/// strictly inside the box when box rows are enforced.
template <typename Scalar> BarrierPoint<Scalar> strictly_feasible_start(const EpigraphQCQP<Scalar> &q) {
  if (q.enforce_box && !((q.lo.array() < Scalar(0)).all() && (q.hi.array() > Scalar(0)).all()))
    throw Error(Errc::BoundaryStart, "x lies on the box boundary");
  return detail::feasible_point<Scalar>(q, Vector<Scalar>::Zero(q.n()));
}

/// Residuals with xi_j chosen in the subdifferential of g_j at x + d: the
/// vertex rule delta * sign(G^{-T}(x+d)) where that sign is unambiguous, the
/// solver's multiplier estimate on (near-)kink coordinates.
template <typename Scalar>
KktResidual kkt_residual(const Vector<Scalar> &x, const SubproblemSolution<Scalar> &sol,
                         const std::vector<Vector<Scalar>> &grads, const std::vector<Matrix<Scalar>> &curvatures,
                         const std::vector<PolyhedralTerm<Scalar>> &terms) {
  const Eigen::Index n = x.size();
  const std::size_t m = grads.size();
  const Vector<Scalar> y = x + sol.d;
  KktResidual r;
  Vector<Scalar> station = Vector<Scalar>::Zero(n);
  Scalar lambda_sum = 0, lambda_neg = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const Scalar lam = sol.lambda(static_cast<Eigen::Index>(j));
    lambda_sum += lam;
    lambda_neg = std::max(lambda_neg, -lam);
    Vector<Scalar> xi = Vector<Scalar>::Zero(n);
    Scalar Qj = grads[j].dot(sol.d) + Scalar(0.5) * sol.d.dot(curvatures[j] * sol.d);
    if (!terms[j].is_zero()) {
      const auto &term = terms[j];
      const Vector<Scalar> v = term.Ginv_T() * y;
      Vector<Scalar> u(n);
      const bool have_estimate = j < sol.dual_u.size() && sol.dual_u[j].size() == n;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (have_estimate)
          u(i) = std::clamp(sol.dual_u[j](i), -term.delta(), term.delta());
        else
          u(i) = v(i) > 0 ? term.delta() : (v(i) < 0 ? -term.delta() : Scalar(0));
      }
      // xi is a subgradient at x + d iff delta |v|_1 = u'v.
      r.complementarity = std::max(r.complementarity,
                                   static_cast<double>(lam * (term.delta() * v.template lpNorm<1>() - u.dot(v))));
      xi = term.Ginv() * u;
      Qj += eval_support(term, y) - eval_support(term, x);
    }
    station += lam * (grads[j] + curvatures[j] * sol.d + xi);
    const Scalar gap = Qj - sol.theta;
    r.feasibility = std::max(r.feasibility, static_cast<double>(std::max(Scalar(0), gap)));
    r.complementarity = std::max(r.complementarity, static_cast<double>(std::abs(lam * gap)));
  }
  if (sol.box_lower_mult.size() == n && sol.box_upper_mult.size() == n) {
    station += sol.box_upper_mult - sol.box_lower_mult;
  }
  r.stationarity = static_cast<double>(station.template lpNorm<Eigen::Infinity>());
  r.simplex = static_cast<double>(std::abs(lambda_sum - Scalar(1)) + lambda_neg);
  return r;
}

namespace detail {

enum class CenterStatus { Converged, RoundingStall };

/// Log-barrier method on the epigraph program. The equality rows
/// A_j' w_j = x + d are kept satisfied exactly by parametrizing
///   w_j = (w0+ + p_j, w0- + p_j - G_j^{-T} d),
/// where (w0+, w0-) is the optimal LP dual at d = 0 (so b'w0 = g_j(x)). The
/// Newton systems are then SPD in (t, d, p_1, ..., p_k) and the rows carry no
/// O(g_j(x)) constants.
template <typename Scalar> class EpigraphBarrier {
public:
  EpigraphBarrier(const EpigraphQCQP<Scalar> &q, const SubproblemOptions &opt) : q_(q), opt_(opt) {
    n_ = q.n();
    for (std::size_t j = 0; j < q.rows.size(); ++j) {
      if (q.rows[j].has_dual_block()) {
        block_of_.push_back(static_cast<int>(blocks_.size()));
        const auto &term = *q.rows[j].term;
        Block b;
        b.row = static_cast<int>(j);
        b.M = term.Ginv_T();
        b.c = b.M.transpose() * Vector<Scalar>::Ones(n_);
        const Vector<Scalar> v0 = b.M * q.x;
        b.w0p = v0.cwiseMax(Scalar(0));
        b.w0m = (-v0).cwiseMax(Scalar(0));
        b.delta = term.delta();
        blocks_.push_back(std::move(b));
      } else {
        block_of_.push_back(-1);
      }
    }
    N_ = 1 + n_ + n_ * static_cast<Eigen::Index>(blocks_.size());
    grad_.resize(N_);
    hess_.resize(N_, N_);
    gs_.resize(N_);
  }

  Eigen::Index size() const { return N_; }

  Vector<Scalar> pack(const BarrierPoint<Scalar> &p) const {
    Vector<Scalar> z(N_);
    z(0) = p.t;
    z.segment(1, n_) = p.d;
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      z.segment(p_offset(b), n_) = p.w[blocks_[b].row].head(n_) - blocks_[b].w0p;
    return z;
  }

  /// Row slack s_j = t - (row value).
  Scalar row_slack(const Vector<Scalar> &z, std::size_t j) const {
    const auto &row = q_.rows[j];
    const auto d = z.segment(1, n_);
    Scalar val = row.grad.dot(d) + Scalar(0.5) * d.dot(row.H * d);
    const int b = block_of_[j];
    if (b >= 0) {
      const auto &blk = blocks_[b];
      val += blk.delta * (Scalar(2) * z.segment(p_offset(b), n_).sum() - blk.c.dot(d));
    }
    return z(0) - val;
  }

  Vector<Scalar> wplus(const Vector<Scalar> &z, std::size_t b) const {
    return blocks_[b].w0p + z.segment(p_offset(b), n_);
  }

  Vector<Scalar> wminus(const Vector<Scalar> &z, std::size_t b) const {
    const auto &blk = blocks_[b];
    return blk.w0m + z.segment(p_offset(b), n_) - blk.M * z.segment(1, n_);
  }

  /// Barrier objective t/mu - sum log(slacks); +inf outside the domain.
  Scalar objective(const Vector<Scalar> &z, Scalar mu) const {
    constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
    Scalar psi = z(0) / mu;
    for (std::size_t j = 0; j < q_.rows.size(); ++j) {
      const Scalar s = row_slack(z, j);
      if (!(s > 0))
        return inf;
      psi -= std::log(s);
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Vector<Scalar> p = wplus(z, b), r = wminus(z, b);
      if (!((p.array() > 0).all() && (r.array() > 0).all()))
        return inf;
      psi -= p.array().log().sum() + r.array().log().sum();
    }
    if (q_.enforce_box) {
      const auto d = z.segment(1, n_);
      const Vector<Scalar> lo = d - q_.lo, hi = q_.hi - d;
      if (!((lo.array() > 0).all() && (hi.array() > 0).all()))
        return inf;
      psi -= lo.array().log().sum() + hi.array().log().sum();
    }
    return psi;
  }

  void assemble(const Vector<Scalar> &z, Scalar mu) {
    grad_.setZero();
    hess_.setZero();
    grad_(0) = Scalar(1) / mu;
    const auto d = z.segment(1, n_);
    for (std::size_t j = 0; j < q_.rows.size(); ++j) {
      const auto &row = q_.rows[j];
      const Scalar s = row_slack(z, j);
      gs_.setZero();
      gs_(0) = Scalar(1);
      gs_.segment(1, n_) = -(row.grad + row.H * d);
      const int b = block_of_[j];
      if (b >= 0) {
        gs_.segment(1, n_) += blocks_[b].delta * blocks_[b].c;
        gs_.segment(p_offset(b), n_).setConstant(Scalar(-2) * blocks_[b].delta);
      }
      gs_ /= s;
      grad_ -= gs_;
      hess_.noalias() += gs_ * gs_.transpose();
      hess_.block(1, 1, n_, n_) += row.H / s;
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto &blk = blocks_[b];
      const Eigen::Index off = p_offset(b);
      const Vector<Scalar> ip = wplus(z, b).cwiseInverse(), ir = wminus(z, b).cwiseInverse();
      const Vector<Scalar> ir2 = ir.cwiseProduct(ir);
      grad_.segment(off, n_) -= ip + ir;
      grad_.segment(1, n_) += blk.M.transpose() * ir;
      hess_.block(off, off, n_, n_).diagonal() += ip.cwiseProduct(ip) + ir2;
      const Matrix<Scalar> DM = ir2.asDiagonal() * blk.M;
      hess_.block(1, 1, n_, n_) += blk.M.transpose() * DM;
      hess_.block(off, 1, n_, n_) -= DM;
      hess_.block(1, off, n_, n_) -= DM.transpose();
    }
    if (q_.enforce_box) {
      const Vector<Scalar> lo = (d - q_.lo).cwiseInverse(), hi = (q_.hi - d).cwiseInverse();
      grad_.segment(1, n_) += hi - lo;
      hess_.block(1, 1, n_, n_).diagonal() += lo.cwiseProduct(lo) + hi.cwiseProduct(hi);
    }
  }

  /// Newton's method towards the central point for weight mu. The barrier is
  /// self-concordant, so inside the quadratic region (decrement^(1/2) < 1/4)
  /// the full step is taken without a merit test; outside it an Armijo
  /// backtrack on the barrier objective is used. Stops at a decrement below
  /// 1e-14, or at the rounding floor (decrement < 1e-6 that no longer
  /// contracts quadratically). Hitting the iteration cap, or a Newton system
  /// that rounding has made indefinite, is reported as a stall.
  CenterStatus center(Vector<Scalar> &z, Scalar mu, int &iterations) {
    Scalar psi = objective(z, mu);
    Scalar prev_decrement = std::numeric_limits<Scalar>::infinity();
    for (int it = 0; it < opt_.max_newton_per_stage; ++it) {
      assemble(z, mu);
      llt_.compute(hess_);
      Vector<Scalar> step;
      if (llt_.info() == Eigen::Success) {
        step = -llt_.solve(grad_);
      } else {
        ldlt_.compute(hess_);
        step = -ldlt_.solve(grad_);
      }
      const Scalar slope = grad_.dot(step);
      const Scalar decrement = -slope;
      if (!(decrement >= 0) || !step.allFinite())
        return CenterStatus::RoundingStall;
      if (decrement / 2 <= kCenterTol)
        return CenterStatus::Converged;
      if (decrement < Scalar(1e-6) && decrement > Scalar(0.25) * prev_decrement)
        return CenterStatus::Converged;
      prev_decrement = decrement;
      ++iterations;

      Scalar alpha = 1;
      Vector<Scalar> trial = z + step;
      Scalar psi_trial = objective(trial, mu);
      bool moved = false;
      const bool quadratic_region = decrement < Scalar(0.0625);
      for (int halvings = 0; halvings <= 60; ++halvings) {
        if (trial == z)
          break;
        const bool feasible = psi_trial < std::numeric_limits<Scalar>::infinity();
        if (feasible && (quadratic_region || psi_trial <= psi + Scalar(0.25) * alpha * slope)) {
          moved = true;
          break;
        }
        alpha /= 2;
        trial = z + alpha * step;
        psi_trial = objective(trial, mu);
      }
      if (!moved)
        return CenterStatus::RoundingStall;
      z = std::move(trial);
      psi = psi_trial;
    }
    return CenterStatus::RoundingStall;
  }

  Eigen::Index p_offset(std::size_t b) const { return 1 + n_ + n_ * static_cast<Eigen::Index>(b); }
  int block_of(std::size_t j) const { return block_of_[j]; }

private:
  static constexpr Scalar kCenterTol = Scalar(1e-14);

  struct Block {
    int row = 0;
    Matrix<Scalar> M; // G^{-T}
    Vector<Scalar> c; // M' 1
    Vector<Scalar> w0p;
    Vector<Scalar> w0m;
    Scalar delta{0};
  };

  const EpigraphQCQP<Scalar> &q_;
  SubproblemOptions opt_;
  Eigen::Index n_ = 0;
  Eigen::Index N_ = 0;
  std::vector<Block> blocks_;
  std::vector<int> block_of_;
  Vector<Scalar> grad_;
  Matrix<Scalar> hess_;
  Vector<Scalar> gs_;
  Eigen::LLT<Matrix<Scalar>> llt_;
  Eigen::LDLT<Matrix<Scalar>> ldlt_;
};

} // namespace detail

inline constexpr double kActiveTol = 1e-8;
inline constexpr double kLambdaZero = 1e-12;

namespace detail {

/// Refines the barrier multiplier estimates at a fixed primal d. Variables
/// are lambda_j (active rows), lambda_j u_ji for kink coordinates i of row j
/// (|v_i| tiny or a barrier estimate of u_ji away from +/- delta)
/// and the multipliers of active box faces; the linear KKT system is solved
/// by minimum-norm corrections alternated with projection onto the sign and
/// interval constraints. Rows enter when they are within `row_tol` of theta
/// (the others get lambda_j = 0).
template <typename Scalar>
void polish_duals(const EpigraphQCQP<Scalar> &q, SubproblemSolution<Scalar> &sol, Scalar row_tol) {
  const Eigen::Index n = q.n();
  const Vector<Scalar> y = q.x + sol.d;
  struct Col {
    enum Kind { Lambda, Kink, Lower, Upper } kind;
    int row;
    Eigen::Index coord;
  };
  std::vector<Col> cols;
  std::vector<Vector<Scalar>> base(q.rows.size());
  std::vector<Vector<Scalar>> sign(q.rows.size());
  std::vector<int> rows;
  for (int j = 0; j < q.m(); ++j)
    if (sol.theta - model_value(q.rows[static_cast<std::size_t>(j)], q.x, sol.d) <= row_tol)
      rows.push_back(j);
  for (int j : rows) {
    const auto &row = q.rows[static_cast<std::size_t>(j)];
    Vector<Scalar> c = row.grad + row.H * sol.d;
    if (row.has_dual_block()) {
      const auto &term = *row.term;
      const Vector<Scalar> v = term.Ginv_T() * y;
      const Scalar kink = Scalar(1e-8) * (Scalar(1) + v.template lpNorm<Eigen::Infinity>());
      const Vector<Scalar> &estimate = sol.dual_u[static_cast<std::size_t>(j)];
      Vector<Scalar> u = Vector<Scalar>::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        // A barrier estimate strictly inside (-delta, delta) also marks a kink.
        if (std::abs(estimate(i)) < term.delta() * Scalar(1 - 1e-4))
          cols.push_back({Col::Kink, j, i});
        else if (v(i) > kink)
          u(i) = term.delta();
        else if (v(i) < -kink)
          u(i) = -term.delta();
        else
          cols.push_back({Col::Kink, j, i});
      }
      sign[static_cast<std::size_t>(j)] = u;
      c += term.Ginv() * u;
    }
    base[static_cast<std::size_t>(j)] = c;
    cols.push_back({Col::Lambda, j, 0});
  }
  if (q.enforce_box) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar width = q.hi(i) - q.lo(i);
      if (sol.d(i) - q.lo(i) <= Scalar(1e-7) * width)
        cols.push_back({Col::Lower, -1, i});
      if (q.hi(i) - sol.d(i) <= Scalar(1e-7) * width)
        cols.push_back({Col::Upper, -1, i});
    }
  }
  if (cols.empty())
    return;

  const Eigen::Index N = static_cast<Eigen::Index>(cols.size());
  Matrix<Scalar> A = Matrix<Scalar>::Zero(n + 1, N);
  Vector<Scalar> b = Vector<Scalar>::Zero(n + 1);
  b(n) = 1;
  Vector<Scalar> z(N);
  for (Eigen::Index c = 0; c < N; ++c) {
    const Col &col = cols[static_cast<std::size_t>(c)];
    switch (col.kind) {
    case Col::Lambda:
      A.col(c).head(n) = base[static_cast<std::size_t>(col.row)];
      A(n, c) = 1;
      z(c) = sol.lambda(col.row);
      break;
    case Col::Kink:
      A.col(c).head(n) = q.rows[static_cast<std::size_t>(col.row)].term->Ginv().col(col.coord);
      z(c) = sol.lambda(col.row) * sol.dual_u[static_cast<std::size_t>(col.row)](col.coord);
      break;
    case Col::Lower:
      A(col.coord, c) = -1;
      z(c) = sol.box_lower_mult(col.coord);
      break;
    case Col::Upper:
      A(col.coord, c) = 1;
      z(c) = sol.box_upper_mult(col.coord);
      break;
    }
  }
  auto project = [&](Vector<Scalar> &v) {
    for (Eigen::Index c = 0; c < N; ++c) {
      const Col &col = cols[static_cast<std::size_t>(c)];
      if (col.kind != Col::Kink)
        v(c) = std::max(v(c), Scalar(0));
    }
    for (Eigen::Index c = 0; c < N; ++c) {
      const Col &col = cols[static_cast<std::size_t>(c)];
      if (col.kind != Col::Kink)
        continue;
      Scalar lam = 0;
      for (Eigen::Index k = 0; k < N; ++k)
        if (cols[static_cast<std::size_t>(k)].kind == Col::Lambda && cols[static_cast<std::size_t>(k)].row == col.row)
          lam = v(k);
      const Scalar cap = lam * q.rows[static_cast<std::size_t>(col.row)].term->delta();
      v(c) = std::clamp(v(c), -cap, cap);
    }
  };
  const Scalar before = (A * z - b).template lpNorm<Eigen::Infinity>();
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod(A);
  Vector<Scalar> best = z;
  Scalar best_res = before;
  for (int it = 0; it < 20 && best_res > Scalar(1e-15); ++it) {
    z += cod.solve(b - A * z);
    project(z);
    const Scalar res = (A * z - b).template lpNorm<Eigen::Infinity>();
    if (res < best_res) {
      best_res = res;
      best = z;
    }
  }
  if (!(best_res < before))
    return;

  sol.lambda.setZero();
  if (sol.box_lower_mult.size() == n) {
    sol.box_lower_mult.setZero();
    sol.box_upper_mult.setZero();
  }
  for (Eigen::Index c = 0; c < N; ++c) {
    const Col &col = cols[static_cast<std::size_t>(c)];
    if (col.kind == Col::Lambda)
      sol.lambda(col.row) = best(c);
    else if (col.kind == Col::Lower)
      sol.box_lower_mult(col.coord) = best(c);
    else if (col.kind == Col::Upper)
      sol.box_upper_mult(col.coord) = best(c);
  }
  const Scalar total = sol.lambda.sum();
  sol.lambda /= total;
  for (int j : rows) {
    const auto jj = static_cast<std::size_t>(j);
    if (!q.rows[jj].has_dual_block())
      continue;
    Vector<Scalar> u = sign[jj];
    for (Eigen::Index c = 0; c < N; ++c) {
      const Col &col = cols[static_cast<std::size_t>(c)];
      if (col.kind == Col::Kink && col.row == j)
        u(col.coord) = sol.lambda(j) > 0 ? best(c) / (sol.lambda(j) * total) : Scalar(0);
    }
    sol.dual_u[jj] = u.cwiseMax(-q.rows[jj].term->delta()).cwiseMin(q.rows[jj].term->delta());
  }
}

} // namespace detail

/// Solves the epigraph program by the barrier method and recovers
/// (d, theta, lambda, w, KKT residuals).
///
/// A stage that can make no floating-point progress ends the schedule early;
/// that only happens once the barrier weight is below the rounding level of
/// the row values, and a stall at mu >= 1e-4 is reported as SolverStall.
template <typename Scalar>
SubproblemSolution<Scalar> solve_qcqp(const EpigraphQCQP<Scalar> &q, const SubproblemOptions &opt) {
  const Eigen::Index n = q.n();
  const int m = q.m();
  Vector<Scalar> d0 = Vector<Scalar>::Zero(n);
  if (q.enforce_box) {
    // x on a face: start from a point nudged 1e-9 of the box width inward.
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar nudge = Scalar(1e-9) * (q.hi(i) - q.lo(i));
      if (q.lo(i) > -nudge)
        d0(i) = q.lo(i) + nudge;
      else if (q.hi(i) < nudge)
        d0(i) = q.hi(i) - nudge;
    }
  }
  detail::EpigraphBarrier<Scalar> barrier(q, opt);
  Vector<Scalar> z = barrier.pack(detail::feasible_point(q, d0));

  // Weights are relative to the depth of the smooth models, 1/2 g'H^{-1}g.
  Scalar scale = 1;
  for (const auto &row : q.rows)
    scale = std::max(scale, Scalar(0.5) * row.grad.dot(row.H.llt().solve(row.grad)));

  SubproblemSolution<Scalar> sol;
  Scalar mu = Scalar(opt.mu_start) * scale;
  const Scalar mu_end = Scalar(opt.mu_end) * scale;
  for (;;) {
    const auto status = barrier.center(z, mu, sol.newton_iterations);
    if (status == detail::CenterStatus::RoundingStall) {
      if (mu >= Scalar(1e-4) * scale)
        throw Error(Errc::SolverStall, "barrier stage made no progress at weight " +
                                           std::to_string(static_cast<double>(mu)));
      break;
    }
    if (mu <= mu_end * Scalar(1 + 1e-9))
      break;
    mu = std::max(mu * Scalar(opt.mu_factor), mu_end);
  }

  sol.t = z(0);
  sol.d = z.segment(1, n);

  // lambda_j = mu / s_j at the central point; sums to 1 there.
  Vector<Scalar> raw(m);
  for (int j = 0; j < m; ++j)
    raw(j) = mu / barrier.row_slack(z, static_cast<std::size_t>(j));
  const Scalar raw_sum = raw.sum();
  sol.lambda = raw / raw_sum;
  for (int j = 0; j < m; ++j)
    if (sol.lambda(j) < Scalar(kLambdaZero))
      sol.lambda(j) = 0;
  sol.lambda /= sol.lambda.sum();

  sol.w.resize(m);
  sol.dual_u.resize(m);
  for (int j = 0; j < m; ++j) {
    const int b = barrier.block_of(static_cast<std::size_t>(j));
    if (b < 0)
      continue;
    const Vector<Scalar> p = barrier.wplus(z, static_cast<std::size_t>(b));
    const Vector<Scalar> r = barrier.wminus(z, static_cast<std::size_t>(b));
    Vector<Scalar> w(2 * n);
    w << p, r;
    sol.w[j] = std::move(w);
    const Scalar s = barrier.row_slack(z, static_cast<std::size_t>(j));
    const Scalar delta = q.rows[j].term->delta();
    // At a central point u = s / w- - delta = delta - s / w+. The larger of
    // w+ and w- carries no cancellation, so it is the one divided by.
    Vector<Scalar> u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar ui = p(i) > r(i) ? delta - s / p(i) : s / r(i) - delta;
      u(i) = std::clamp(ui, -delta, delta);
    }
    sol.dual_u[j] = std::move(u);
  }

  if (q.enforce_box) {
    sol.box_lower_mult = (mu / raw_sum) * (sol.d - q.lo).cwiseInverse();
    sol.box_upper_mult = (mu / raw_sum) * (q.hi - sol.d).cwiseInverse();
  }

  sol.theta = -std::numeric_limits<Scalar>::infinity();
  Vector<Scalar> Q(m);
  for (int j = 0; j < m; ++j) {
    Q(j) = model_value(q.rows[j], q.x, sol.d);
    sol.theta = std::max(sol.theta, Q(j));
  }
  for (int j = 0; j < m; ++j)
    if (sol.theta - Q(j) <= Scalar(kActiveTol))
      sol.active_set.push_back(j);

  std::vector<Vector<Scalar>> grads(m);
  std::vector<Matrix<Scalar>> curv(m);
  std::vector<PolyhedralTerm<Scalar>> terms;
  terms.reserve(m);
  for (int j = 0; j < m; ++j) {
    grads[j] = q.rows[j].grad;
    curv[j] = q.rows[j].H;
    terms.push_back(q.rows[j].term ? *q.rows[j].term : PolyhedralTerm<Scalar>::zero(n));
  }
  sol.kkt = kkt_residual(q.x, sol, grads, curv, terms);
  SubproblemSolution<Scalar> polished = sol;
  detail::polish_duals(q, polished, Scalar(1e-6));
  polished.kkt = kkt_residual(q.x, polished, grads, curv, terms);
  if (polished.kkt.max() < sol.kkt.max())
    return polished;
  return sol;
}

/// Direction-finding step: min_d max_j Q_j(x, d) (subject to x + d in the box
/// when enforced). `curvatures` are B_j for NPQNA/PQNA and floored Hessians
/// for NPGA; PQNA's regularization is added here.
template <typename Scalar>
SubproblemSolution<Scalar> solve_subproblem(const Vector<Scalar> &x, const std::vector<Vector<Scalar>> &grads,
                                            const std::vector<Matrix<Scalar>> &curvatures,
                                            const std::vector<PolyhedralTerm<Scalar>> &terms,
                                            const Box<Scalar> &box, const SubproblemOptions &opt) {
  const EpigraphQCQP<Scalar> q = build_qcqp(x, grads, curvatures, terms, box, opt);
  return solve_qcqp(q, opt);
}

} // namespace npqn
