#pragma once

#include "detvar/core/types.hpp"

namespace detvar {

inline constexpr double kConditionBound = 1e6;

//! Inverse of the symmetric block matrix [[G, B], [B^T, D]].
struct BlockInverse {
  Matrix inverse;
  //! Inverse of the Schur complement D - B^T G^{-1} B (eliminating G first),
  //! or of G - B D^{-1} B^T for the lower-first route.
  Matrix schur_inv;
  double cond_upper = 1.0;
  double cond_lower = 1.0;
};

Matrix assemble_blocks(const Matrix& G, const Matrix& B, const Matrix& D);

//! Eliminates G first:
//!   [[G^{-1} + G^{-1} B rho B^T G^{-1}, -G^{-1} B rho], [-rho B^T G^{-1}, rho]]
//! with rho = (D - B^T G^{-1} B)^{-1}. Throws DegenerateMetric when cond(G) or
//! cond(D) exceeds `cond_bound`.
BlockInverse block_inverse(const Matrix& G, const Matrix& B, const Matrix& D,
                           double cond_bound = kConditionBound);

//! Eliminates D first, from the factorisation [[G', B], [0, D]] [[1, 0], [K, 1]]:
//!   [[G'^{-1}, -G'^{-1} B D^{-1}], [-D^{-1} B^T G'^{-1}, D^{-1} + D^{-1} B^T G'^{-1} B D^{-1}]]
//! with G' = G - B D^{-1} B^T. `schur_inv` holds G'^{-1}.
BlockInverse block_inverse_lower_first(const Matrix& G, const Matrix& B, const Matrix& D,
                                       double cond_bound = kConditionBound);

//! ||inverse * assembled - I||_inf (max absolute row sum).
double inverse_defect(const Matrix& inverse, const Matrix& assembled);

}  // namespace detvar
