#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace detvar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

//! Base of every error raised by the verification engine.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ShapeMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

//! Raised when a metric block is too ill-conditioned to invert. Carries the
//! condition estimates so callers can classify the point as near-boundary.
class DegenerateMetric : public NumericalError {
 public:
  DegenerateMetric(const std::string& what, double cond_first, double cond_second)
      : NumericalError(what), cond_first_(cond_first), cond_second_(cond_second) {}

  double cond_first() const { return cond_first_; }
  double cond_second() const { return cond_second_; }

 private:
  double cond_first_;
  double cond_second_;
};

class InvalidChartPoint : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

//! Constraint Gram matrix is singular: the point lies on a deeper stratum.
class SingularGram : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConventionFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

//! Frobenius norm of the difference, the metric used throughout for residuals.
inline double residual(const Matrix& lhs, const Matrix& rhs) { return (lhs - rhs).norm(); }

//! Condition number in the 2-norm from singular values; infinity when singular.
double condition_number(const Matrix& m);

//! Kronecker product, used to realise left/right multiplication operators on
//! column-major vectorised matrices: vec(A X B) = (B^T kron A) vec(X).
Matrix kron(const Matrix& lhs, const Matrix& rhs);

//! Column-major vectorisation.
inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

//! Orthonormal basis of the column space of m (numerical rank via SVD).
Matrix orthonormal_columns(const Matrix& m, double policy_factor = 4.0);

}  // namespace detvar
