#pragma once

#include "detvar/core/random.hpp"
#include "detvar/core/types.hpp"

#include <string>
#include <vector>

// Reflection symmetry of the rank-r stratum at a point X. Left multiplication
// by B = 2 Q Q^T - 1, Q an orthonormal basis of C(X), is an ambient isometry
// that fixes X, preserves rank and sends every normal vector W to -W.

namespace detvar::helicoidal {

struct ReflectionIsometry {
  Matrix B;  // p x p
  Matrix Q;  // p x r, leading left singular vectors of X
  double orthogonality = 0.0;  // ||B^T B - I||
  double involution = 0.0;     // ||B^2 - I||
  double fixed_point = 0.0;    // ||B X - X|| / max(1, ||X||)
};

//! Throws RankMismatch when the numerical rank of X differs from r.
ReflectionIsometry reflection(const Matrix& x, Eigen::Index r);

struct IsometryReport {
  double max_residual = 0.0;  // max |tr(X^T A^T A Y) - tr(X^T Y)| / (||X|| ||Y||)
  bool passed = false;
};

//! Inner products preserved under X -> A X for `samples` random pairs of p x q matrices.
IsometryReport isometry_check(const Matrix& a, Eigen::Index q, CounterRng& rng, int samples = 10,
                              double tol = 1e-12);

//! Orthonormal basis (pq x dim, column-major vec) of T_X Z_r from the chart
//! derivative on the first admissible column patch.
Matrix tangent_basis(const Matrix& x, Eigen::Index r);

//! Orthonormal basis of the normal space, from the chart's normal frame.
Matrix normal_basis(const Matrix& x, Eigen::Index r);

struct Membership {
  double residual = 0.0;  // ||Y - proj_T Y|| / ||Y||
  bool member = false;
};

Membership tangent_membership(const Matrix& x, Eigen::Index r, const Matrix& y, double tol = 1e-9);

//! Elements Y of the tangent set: C(Y) in C(X) or R(Y) in R(X).
struct TangentSetSample {
  std::vector<Matrix> members;
  std::vector<double> inclusion_residuals;  // relative, per member
};

//! Alternates column-type Q R and row-type L V^T members.
TangentSetSample sample_tangent_set(const Matrix& x, Eigen::Index r, CounterRng& rng, int count);

struct NormalReversal {
  double max_residual = 0.0;     // max ||B W + W|| over the orthonormal normal basis
  double column_leakage = 0.0;   // max ||Q^T W||, i.e. C(W) in C(X)^perp
  Eigen::Index count = 0;
};

NormalReversal normal_reversal(const Matrix& x, Eigen::Index r);
NormalReversal normal_reversal(const Matrix& x, Eigen::Index r, const Matrix& b);

struct CertificateTolerances {
  double isometry = 1e-12;
  double reversal = 1e-10;
  double spectrum = 1e-10;
};

struct HelicoidalCertificate {
  double fixed_point = 0.0;
  double orthogonality = 0.0;
  double involution = 0.0;
  double symmetry = 0.0;
  double determinant_error = 0.0;  // |det B - (-1)^(p-r)|
  double spectrum_error = 0.0;     // eigenvalues vs {+1 x r, -1 x (p-r)}
  int rank_failures = 0;           // samples with rank(B Y) != rank(Y)
  int rank_samples = 0;
  double normal_reversal = 0.0;
  //! Parametric mean curvature at X and ||B H + H||; B H = H by symmetry
  //! and B H = -H because H is normal, so both are zero.
  double mean_curvature = 0.0;
  double mean_curvature_reversal = 0.0;
  std::vector<std::string> failed;

  bool passed() const { return failed.empty(); }
};

//! Clauses for an arbitrary candidate map B at X (controls use non-reflections).
HelicoidalCertificate certify_isometry(const Matrix& x, Eigen::Index r, const Matrix& b, CounterRng& rng,
                                       const CertificateTolerances& tol = {}, int rank_samples = 20);

HelicoidalCertificate helicoidal_certificate(const Matrix& x, Eigen::Index r, CounterRng& rng,
                                             const CertificateTolerances& tol = {}, int rank_samples = 20);

}  // namespace detvar::helicoidal
