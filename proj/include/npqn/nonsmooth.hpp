#pragma once

#include "npqn/rng.hpp"
#include "npqn/types.hpp"

#include <cmath>

namespace npqn {

/// Support function of the polytope Z = {z : -delta e <= G z <= delta e},
///
///   g(y) = max_{z in Z} <y, z> = delta * || G^{-T} y ||_1.
///
/// The inverse transpose and the stacked LP data A = [G; -G], b = delta e are
/// computed once at construction. A zero delta marks the term as g == 0.
template <typename Scalar> class PolyhedralTerm {
public:
  PolyhedralTerm() = default;

  PolyhedralTerm(Matrix<Scalar> G, Scalar delta) : G_(std::move(G)), delta_(delta) {
    if (G_.rows() != G_.cols())
      throw Error(Errc::DimensionMismatch, "nonsmooth matrix must be square");
    if (!(delta_ >= Scalar(0)))
      throw Error(Errc::PreconditionViolation, "delta must be nonnegative");
    Eigen::FullPivLU<Matrix<Scalar>> lu(G_);
    if (!lu.isInvertible())
      throw Error(Errc::PreconditionViolation, "nonsmooth matrix is singular");
    Ginv_ = lu.inverse();
    Ginv_T_ = Ginv_.transpose();
    const Eigen::Index n = G_.rows();
    dual_A_.resize(2 * n, n);
    dual_A_ << G_, -G_;
    dual_b_ = Vector<Scalar>::Constant(2 * n, delta_);
  }

  /// g == 0 on R^n (dimension n).
  static PolyhedralTerm zero(Eigen::Index n) {
    return PolyhedralTerm(Matrix<Scalar>::Identity(n, n), Scalar(0));
  }

  Eigen::Index dim() const { return G_.rows(); }
  const Matrix<Scalar> &G() const { return G_; }
  const Matrix<Scalar> &Ginv() const { return Ginv_; }
  const Matrix<Scalar> &Ginv_T() const { return Ginv_T_; }
  Scalar delta() const { return delta_; }
  const Matrix<Scalar> &dual_A() const { return dual_A_; }
  const Vector<Scalar> &dual_b() const { return dual_b_; }
  bool is_zero() const { return delta_ == Scalar(0); }

private:
  Matrix<Scalar> G_;
  Matrix<Scalar> Ginv_;
  Matrix<Scalar> Ginv_T_;
  Scalar delta_{0};
  Matrix<Scalar> dual_A_;
  Vector<Scalar> dual_b_;
};

using PolyhedralTermd = PolyhedralTerm<double>;

template <typename Scalar>
Scalar eval_support(const PolyhedralTerm<Scalar> &term, const Vector<Scalar> &y) {
  if (term.is_zero())
    return Scalar(0);
  return term.delta() * (term.Ginv_T() * y).template lpNorm<1>();
}

/// Enumerates the 2^n vertices z = G^{-1} u, u in {-delta, +delta}^n. Test oracle.
template <typename Scalar>
Scalar support_oracle_vertices(const PolyhedralTerm<Scalar> &term, const Vector<Scalar> &y) {
  const Eigen::Index n = term.dim();
  if (n > 12)
    throw Error(Errc::DimensionTooLarge, "vertex enumeration limited to n <= 12");
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  Vector<Scalar> u(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (Eigen::Index i = 0; i < n; ++i)
      u(i) = (mask >> i) & 1u ? term.delta() : -term.delta();
    const Vector<Scalar> z = term.Ginv() * u;
    best = std::max(best, y.dot(z));
  }
  return best;
}

/// delta * G^{-1} sign(G^{-T} y), with sign(0) = 0.
template <typename Scalar>
Vector<Scalar> support_subgradient(const PolyhedralTerm<Scalar> &term, const Vector<Scalar> &y) {
  if (term.is_zero())
    return Vector<Scalar>::Zero(y.size());
  const Vector<Scalar> v = term.Ginv_T() * y;
  const Vector<Scalar> u =
      v.unaryExpr([&](Scalar vi) { return vi > 0 ? term.delta() : (vi < 0 ? -term.delta() : Scalar(0)); });
  return term.Ginv() * u;
}

template <typename Scalar> struct DualData {
  Matrix<Scalar> A;
  Vector<Scalar> b;
};

template <typename Scalar> DualData<Scalar> build_dual_data(const PolyhedralTerm<Scalar> &term) {
  return {term.dual_A(), term.dual_b()};
}

/// Condition number in the 2-norm from the singular values.
template <typename Scalar> Scalar condition_number(const Matrix<Scalar> &M) {
  Eigen::JacobiSVD<Matrix<Scalar>> svd(M);
  const auto &s = svd.singularValues();
  if (s.size() == 0)
    return Scalar(1);
  const Scalar smin = s(s.size() - 1);
  if (smin == Scalar(0))
    return std::numeric_limits<Scalar>::infinity();
  return s(0) / smin;
}

/// Draws G with entries U[0,1] (redrawn until cond(G) < 1e6) and
/// delta = U[0.02, 0.10] * ||anchor||_2. Consumes the generator in that order:
/// n*n entries column by column per attempt, then one draw for the scale.
template <typename Scalar>
PolyhedralTerm<Scalar> generate_random_term(Eigen::Index n, const Vector<Scalar> &anchor,
                                            SplitMix64 &rng) {
  if (anchor.size() != n)
    throw Error(Errc::DimensionMismatch, "anchor dimension differs from n");
  constexpr int max_attempts = 100;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Matrix<Scalar> G(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < n; ++r)
        G(r, c) = static_cast<Scalar>(rng.uniform());
    if (condition_number(G) < Scalar(1e6)) {
      const Scalar scale = static_cast<Scalar>(rng.uniform(0.02, 0.10));
      return PolyhedralTerm<Scalar>(std::move(G), scale * anchor.norm());
    }
  }
  throw Error(Errc::ResampleLimit, "100 consecutive ill-conditioned samples");
}

} // namespace npqn
