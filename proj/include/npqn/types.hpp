#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace npqn {

template <typename Scalar> using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

enum class Errc {
  OutOfDomain,
  DimensionMismatch,
  DimensionTooLarge,
  ResampleLimit,
  SolverStall,
  NonConvexRow,
  BoundaryStart,
  ZeroStep,
  LineSearchFail,
  PreconditionViolation,
  InvalidConfig,
  UnknownProblem,
  IoFailure,
  ParseError,
};

inline const char *to_string(Errc code) {
  switch (code) {
  case Errc::OutOfDomain: return "OutOfDomain";
  case Errc::DimensionMismatch: return "DimensionMismatch";
  case Errc::DimensionTooLarge: return "DimensionTooLarge";
  case Errc::ResampleLimit: return "ResampleLimit";
  case Errc::SolverStall: return "SolverStall";
  case Errc::NonConvexRow: return "NonConvexRow";
  case Errc::BoundaryStart: return "BoundaryStart";
  case Errc::ZeroStep: return "ZeroStep";
  case Errc::LineSearchFail: return "LineSearchFail";
  case Errc::PreconditionViolation: return "PreconditionViolation";
  case Errc::InvalidConfig: return "InvalidConfig";
  case Errc::UnknownProblem: return "UnknownProblem";
  case Errc::IoFailure: return "IoFailure";
  case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// Componentwise bounds lb < ub.
template <typename Scalar> struct Box {
  Vector<Scalar> lb;
  Vector<Scalar> ub;

  Box() = default;
  Box(Vector<Scalar> lower, Vector<Scalar> upper) : lb(std::move(lower)), ub(std::move(upper)) {
    if (lb.size() != ub.size())
      throw Error(Errc::DimensionMismatch, "box bounds have different sizes");
    if (!(lb.array() < ub.array()).all())
      throw Error(Errc::PreconditionViolation, "box requires lb < ub componentwise");
  }

  Eigen::Index size() const { return lb.size(); }
  Vector<Scalar> midpoint() const { return (lb + ub) / Scalar(2); }

  bool contains(const Vector<Scalar> &x, Scalar tol = Scalar(0)) const {
    return x.size() == lb.size() && ((x - lb).array() >= -tol).all() &&
           ((ub - x).array() >= -tol).all();
  }
};

using Boxd = Box<double>;

} // namespace npqn
