#pragma once

#include "npqn/types.hpp"

#include <vector>

namespace npqn {

/// Symmetric eigen-decomposition with eigenvalues clamped below at `floor`.
/// Returns B unchanged (bit for bit) when no eigenvalue needs clamping.
template <typename Scalar>
Matrix<Scalar> spd_floor_project(const Matrix<Scalar> &B, Scalar floor, bool *clamped = nullptr) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(B);
  const Vector<Scalar> &ev = eig.eigenvalues();
  const bool needs_clamp = (ev.array() < floor).any();
  if (clamped)
    *clamped = needs_clamp;
  if (!needs_clamp)
    return B;
  const Vector<Scalar> lifted = ev.cwiseMax(floor);
  Matrix<Scalar> out = eig.eigenvectors() * lifted.asDiagonal() * eig.eigenvectors().transpose();
  return (out + out.transpose()) / Scalar(2);
}

template <typename Scalar> Scalar min_eigenvalue(const Matrix<Scalar> &B) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(B, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

enum class CurvatureRule {
  Relative, ///< s'y > curvature_eps * ||s|| ||y||
  Raw,      ///< s'y > 0
};

struct BfgsOptions {
  double spd_floor = 1e-8;
  double curvature_eps = 1e-12;
  CurvatureRule rule = CurvatureRule::Relative;
};

/// What happened to one matrix in one update.
struct UpdateEvent {
  bool skipped = false;
  bool clamped = false;
  /// ||B+ s - y|| / ||y|| right after the rank-two update, before clamping.
  double secant_residual = 0.0;
  double min_eig = 0.0;
};

/// B+ = B - (B s s'B)/(s'B s) + (y y')/(s'y) when the curvature test passes,
/// followed by the eigenvalue floor; B otherwise.
template <typename Scalar>
Matrix<Scalar> bfgs_update(const Matrix<Scalar> &B, const Vector<Scalar> &s, const Vector<Scalar> &y,
                           const BfgsOptions &opt = {}, UpdateEvent *event = nullptr) {
  const Scalar snorm = s.norm();
  if (snorm == Scalar(0))
    throw Error(Errc::ZeroStep, "BFGS update called with a zero step");
  const Scalar sy = s.dot(y);
  const Scalar threshold =
      opt.rule == CurvatureRule::Raw ? Scalar(0) : Scalar(opt.curvature_eps) * snorm * y.norm();
  UpdateEvent ev;
  if (!(sy > threshold)) {
    ev.skipped = true;
    ev.min_eig = static_cast<double>(min_eigenvalue(B));
    if (event)
      *event = ev;
    return B;
  }
  const Vector<Scalar> Bs = B * s;
  Matrix<Scalar> next = B - (Bs * Bs.transpose()) / s.dot(Bs) + (y * y.transpose()) / sy;
  next = (next + next.transpose()) / Scalar(2);
  const Scalar ynorm = y.norm();
  ev.secant_residual = static_cast<double>((next * s - y).norm() / (ynorm > Scalar(0) ? ynorm : Scalar(1)));
  next = spd_floor_project(next, Scalar(opt.spd_floor), &ev.clamped);
  ev.min_eig = static_cast<double>(min_eigenvalue(next));
  if (event)
    *event = ev;
  return next;
}

/// One BFGS matrix per objective.
template <typename Scalar> struct HessianApprox {
  std::vector<Matrix<Scalar>> matrices;
  std::vector<int> update_count;
  std::vector<int> skip_count;
  std::vector<int> clamp_count;
};

template <typename Scalar> HessianApprox<Scalar> init_identity(int m, int n) {
  if (m < 1 || n < 1)
    throw Error(Errc::PreconditionViolation, "init_identity needs m, n >= 1");
  HessianApprox<Scalar> h;
  h.matrices.assign(m, Matrix<Scalar>::Identity(n, n));
  h.update_count.assign(m, 0);
  h.skip_count.assign(m, 0);
  h.clamp_count.assign(m, 0);
  return h;
}

/// Updates every B_j independently with the shared step s and its own y_j.
template <typename Scalar>
std::vector<UpdateEvent> update_all(HessianApprox<Scalar> &approx, const Vector<Scalar> &s,
                                    const std::vector<Vector<Scalar>> &y, const BfgsOptions &opt) {
  std::vector<UpdateEvent> events(approx.matrices.size());
  for (std::size_t j = 0; j < approx.matrices.size(); ++j) {
    approx.matrices[j] = bfgs_update(approx.matrices[j], s, y[j], opt, &events[j]);
    if (events[j].skipped) {
      ++approx.skip_count[j];
    } else {
      ++approx.update_count[j];
      if (events[j].clamped)
        ++approx.clamp_count[j];
    }
  }
  return events;
}

} // namespace npqn
