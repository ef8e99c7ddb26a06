#pragma once

#include "detvar/core/types.hpp"

namespace detvar {

//! Numerical rank of a dense matrix together with the factors that produced it.
//!
//! `kernel_basis` spans ker(m^T), i.e. the orthogonal complement of the column
//! space of m in R^rows; its columns are the trailing left singular vectors,
//! ordered by singular-value index. rank + kernel_basis.cols() == m.rows().
struct RankResult {
  Eigen::Index rank = 0;
  Vector singular_values;  // nonincreasing
  Matrix kernel_basis;
  Matrix left;             // full U
  Matrix right;            // full V
  double tolerance = 0.0;

  //! Leading `rank` left singular vectors: an orthonormal basis of C(m).
  Matrix column_space() const { return left.leftCols(rank); }
  //! Leading `rank` right singular vectors: an orthonormal basis of R(m).
  Matrix row_space() const { return right.leftCols(rank); }
  //! Trailing right singular vectors: ker(m).
  Matrix right_kernel() const { return right.rightCols(right.cols() - rank); }
};

//! Default factor in the relative threshold sigma_max * max(rows, cols) * eps * factor.
inline constexpr double kRankPolicyFactor = 4.0;

//! Rank, singular values and kernel of m by full SVD. Throws NonFiniteInput
//! when m has NaN or infinite entries.
RankResult svd_rank(const Matrix& m, double policy_factor = kRankPolicyFactor);

//! Largest of ||U^T U - I||, ||V^T V - I|| and ||U S V^T - m|| / max(1, sigma_max).
double svd_self_check(const Matrix& m, const RankResult& result);

}  // namespace detvar
