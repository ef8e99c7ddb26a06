#pragma once

#include "detvar/core/determinant.hpp"
#include "detvar/core/identity_report.hpp"
#include "detvar/core/random.hpp"
#include "detvar/core/types.hpp"

#include <string>
#include <vector>

// Level-set description of the (n+1) x n matrices of rank n - 1 through the
// two constraints
//   chi_1 = det(rows 1..n),   chi_2 = (-1)^(n-1) det(rows 2..n+1).
// Flat coordinates are row-major: x_{a + (K-1) n} = A_{Ka}, i.e. index K n + a
// with zero-based K, a.

namespace detvar::levelset {

inline Eigen::Index flat_index(Eigen::Index row, Eigen::Index col, Eigen::Index n) { return row * n + col; }

Vector flatten(const Matrix& a);
Matrix unflatten(const Vector& x, Eigen::Index n);

//! chi_1 (alpha = 0) or chi_2 (alpha = 1) as a polynomial in the flat coordinates.
template <typename Scalar>
Scalar constraint(const VectorX<Scalar>& x, Eigen::Index n, int alpha) {
  MatrixX<Scalar> block(n, n);
  const Eigen::Index first_row = alpha == 0 ? 0 : 1;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) block(i, j) = x(flat_index(first_row + i, j, n));
  const Scalar det = leibniz_det(block);
  return (alpha == 1 && (n - 1) % 2 == 1) ? Scalar(-det) : det;
}

struct ConstraintValues {
  Eigen::Index n = 0;
  double chi[2] = {0.0, 0.0};
  Vector grad[2];
  Matrix hess[2];
};

//! Gradients by cofactor expansion, Hessians by signed (n-2)-minors.
ConstraintValues evaluate_constraints(const Matrix& a);

//! Same quantities by dual-number differentiation of the determinant polynomial.
ConstraintValues evaluate_constraints_dual(const Matrix& a);

//! Largest entrywise difference between the cofactor and dual-number routes.
double constraint_route_discrepancy(const ConstraintValues& lhs, const ConstraintValues& rhs);

//! Inverses of the upper and lower n x n blocks, padded to n x (n+1) so that
//! column J addresses row J of A: upper(i, n) = 0, lower(i, 0) = 0.
struct MinorInverses {
  Matrix upper;
  Matrix lower;
};

MinorInverses minor_inverses(const Matrix& a);

struct GramProjector {
  Matrix M;  // 2 x 2 Gram of the constraint gradients
  Matrix P;  // (n^2 + n) x (n^2 + n) tangent projector
  Eigen::Index rank = 0;
  double idempotency = 0.0;   // ||P^2 - P||
  double symmetry = 0.0;      // ||P - P^T||
  double annihilation = 0.0;  // max_alpha ||P grad chi_alpha||
};

//! P = 1 - grad chi_alpha (M^{-1})^{alpha beta} grad chi_beta^T. Throws
//! SingularGram when the first or last row vanishes or M is numerically singular.
GramProjector tangent_projector(const Matrix& a, const ConstraintValues& cv);
GramProjector tangent_projector(const Matrix& a);

struct LevelSetCurvature {
  double trace[2] = {0.0, 0.0};     // tr(P d^2 chi_alpha)
  double relative[2] = {0.0, 0.0};  // trace / max(1, ||d^2 chi_alpha||)
  double max_relative() const { return std::max(std::abs(relative[0]), std::abs(relative[1])); }
};

LevelSetCurvature levelset_mean_curvature(const Matrix& a);

//! Ambient identities always: harmonicity, the alpha = gamma contractions
//! (grad chi)^T d^2 chi (grad chi) = 1/2 chi tr((d^2 chi)^2) and the mixed
//! 1/2 tr(d^2 chi_1 d^2 chi_2) chi forms, the [ij] antisymmetry of the
//! Hessians, and the cofactor-inverse forms where chi_alpha != 0. With
//! `on_variety`, also all eight contractions (grad chi_a)^T d^2 chi_b grad chi_c
//! and the symmetrised four-term cancellation.
IdentityReport identity_suite(const Matrix& a, bool on_variety);

struct RowCoefficients {
  Vector lambda;  // sum_k lambda_k row_k = 0, lambda_1 = -1, lambda_{n+1} = 0
  Vector mu;      // sum_k mu_k row_k = 0, mu_1 = 0, mu_{n+1} = -1
  double combination_residual = 0.0;
  //! max |d chi_1 / d A_ka + lambda_k d chi_1 / d A_1a| and the mu analogue for chi_2.
  double gradient_proportionality = 0.0;
  //! max |d chi_1 / d A_1a - d chi_2 / d A_{n+1,a}|
  double boundary_gradient_match = 0.0;
};

//! Throws ConventionFailure when rows 2..n are dependent or the first (last)
//! row is not in their span.
RowCoefficients row_coefficients(const Matrix& a);

struct RankOneReport {
  double sigma_ratio = 0.0;  // sigma_2 / sigma_1 of the cofactor matrix (0 when it vanishes)
  Eigen::Index rank = 0;
  Eigen::Index pivot_row = 0;
  Eigen::Index pivot_col = 0;
  Vector row_factors;  // lambda_i
  Vector col_factors;  // rho_j
  double factorization_residual = 0.0;  // max |C_ij - lambda_i rho_j C_pivot| / max |C|
};

//! The cofactor matrix of a singular square matrix has rank <= 1 and factors
//! as d chi / d M_ij = lambda_i rho_j d chi / d M_pivot. The pivot is (0, 0)
//! when its row and column are not identically zero, else the largest entry.
RankOneReport gradient_rank_one(const Matrix& m);

struct ConjectureEvidence {
  double lhs = 0.0;  // (grad chi_2)^T d^2 chi_1 grad chi_1
  double rhs = 0.0;  // chi_2 / 4 tr(d^2 chi_1 d^2 chi_2) + chi_1 / 4 tr((d^2 chi_2)^2)
  double residual = 0.0;
  double relative = 0.0;
};

ConjectureEvidence conjecture_evidence(const Matrix& a);

//! Rank-(n-1) point of R^{(n+1) x n} built from a chart point, checked to
//! satisfy |chi_alpha| <= 1e-12 times the Hadamard bound of its block.
Matrix sample_variety_point(CounterRng& rng, Eigen::Index n);

//! Hadamard bound prod_i ||row_i|| of the block that defines chi_alpha.
double hadamard_scale(const Matrix& a, int alpha);

}  // namespace detvar::levelset
