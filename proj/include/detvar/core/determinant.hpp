#pragma once

#include "detvar/core/types.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace detvar {

//! Determinant by the permutation (Leibniz) expansion. Exact polynomial in the
//! entries, so it differentiates cleanly with dual numbers, including at
//! singular matrices where pivoted elimination breaks down. O(n! n).
template <typename Scalar>
Scalar leibniz_det(const MatrixX<Scalar>& m) {
  const auto n = static_cast<int>(m.rows());
  if (n == 0) return Scalar(1);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Scalar total(0);
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)]) ++inversions;
    Scalar term(inversions % 2 == 0 ? 1.0 : -1.0);
    for (int i = 0; i < n; ++i) term = term * m(i, perm[static_cast<std::size_t>(i)]);
    total = total + term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

//! m with the listed rows and columns deleted (indices need not be sorted).
Matrix delete_rows_cols(const Matrix& m, std::vector<Eigen::Index> rows, std::vector<Eigen::Index> cols);

//! Matrix of first partials d det / d m_ij = (-1)^(i+j) det(minor_ij).
Matrix cofactor_matrix(const Matrix& m);

//! Second partials d^2 det / (d m_ij d m_kl) as an n^2 x n^2 matrix indexed
//! row-major (i*n + j). Each nonzero entry is a signed (n-2)-minor.
Matrix determinant_hessian(const Matrix& m);

}  // namespace detvar
