#pragma once

#include "detvar/core/types.hpp"
#include "detvar/parametric.hpp"

#include <string>

// Indefinite product (A, B) = tr(zeta A^T eta B) on p x q matrices, eta and
// zeta diagonal with entries +-1. On column-major vec it is the diagonal
// form Omega with Omega_{(I,k)} = eta_I zeta_k.

namespace detvar::pseudo {

struct IndefiniteForm {
  Vector eta;   // p entries, +-1
  Vector zeta;  // q entries, +-1

  Eigen::Index p() const { return eta.size(); }
  Eigen::Index q() const { return zeta.size(); }
  Eigen::Index p1() const { return (eta.array() > 0).count(); }
  Eigen::Index p2() const { return p() - p1(); }
  Eigen::Index q1() const { return (zeta.array() > 0).count(); }
  Eigen::Index q2() const { return q() - q1(); }

  //! pq x pq diagonal Gram on the standard basis.
  Matrix omega() const;
  double product(const Matrix& a, const Matrix& b) const;
};

//! Builds a form from sign strings such as "++-". Throws std::invalid_argument.
IndefiniteForm parse_form(const std::string& eta, const std::string& zeta);
IndefiniteForm euclidean_form(Eigen::Index p, Eigen::Index q);

struct SubspaceSignature {
  Eigen::Index plus = 0;
  Eigen::Index minus = 0;
  Eigen::Index null = 0;

  Eigen::Index dimension() const { return plus + minus + null; }
  bool nondegenerate() const { return null == 0; }
  bool operator==(const SubspaceSignature& o) const { return plus == o.plus && minus == o.minus && null == o.null; }
};

//! Eigenvalue sign counts; |eigenvalue| <= 1e-10 max(||gram||, reference)
//! counts as null. Grams restricted to orthonormal bases pass reference = 1.
SubspaceSignature signature(const Matrix& gram, double reference = 0.0);

struct AmbientSignature {
  SubspaceSignature eigen;
  SubspaceSignature combinatorial;  // (p1 q1 + p2 q2, p1 q2 + p2 q1)
  SubspaceSignature printed;        // (p1 p2 + q1 q2, p1 q2 + p2 q1)
  bool combinatorial_matches = false;
  bool printed_matches = false;
};

AmbientSignature ambient_signature(const IndefiniteForm& form);

struct DegeneracyScan {
  Matrix metric;  // G_hat_{mu nu} = (DX e_mu, DX e_nu)
  double determinant = 0.0;
  double condition = 0.0;
  SubspaceSignature inertia;
  bool degenerate = false;
};

DegeneracyScan degeneracy_scan(const IndefiniteForm& form, const ChartPoint& cp);

struct ZPrimeMembership {
  SubspaceSignature column_space;  // eta restricted to V_M
  SubspaceSignature row_space;     // zeta restricted to W_M
  bool member = false;             // both nondegenerate with the target counts
};

ZPrimeMembership zprime_membership(const IndefiniteForm& form, const Matrix& m, Eigen::Index r,
                                   Eigen::Index target_p1, Eigen::Index target_q1);

//! Induced signature of Z'_r as printed, with "+ p~1 q1" appearing twice in
//! the positive count, and with the second occurrence read as p~2 q2.
SubspaceSignature induced_signature_printed(const IndefiniteForm& form, Eigen::Index r, Eigen::Index pt1,
                                            Eigen::Index qt1);
SubspaceSignature induced_signature_corrected(const IndefiniteForm& form, Eigen::Index r, Eigen::Index pt1,
                                              Eigen::Index qt1);

struct PseudoMinimality {
  Matrix mean_curvature;  // normal part of G^{mu nu} d2X_{mu nu}, ambient layout
  double residual = 0.0;  // ||H|| / max(1, scale)
  double scale = 0.0;     // sum |G^{mu nu}| ||d2X_{mu nu}||
  SubspaceSignature inertia;
  SubspaceSignature column_space;
  SubspaceSignature row_space;
  SubspaceSignature formula_printed;
  SubspaceSignature formula_corrected;
  bool printed_matches = false;
  bool corrected_matches = false;
};

//! Throws DegenerateMetric when G_hat is degenerate or worse conditioned than 1e6.
PseudoMinimality pseudo_minimality(const IndefiniteForm& form, const ChartPoint& cp);

//! B = 2 Q (Q^T eta Q)^{-1} Q^T eta - 1 for a basis Q of V_M: preserves the
//! form, fixes V_M. Throws DegenerateMetric when V_M is degenerate.
Matrix form_reflection(const IndefiniteForm& form, const Matrix& m, Eigen::Index r);

struct PseudoNormalReversal {
  double max_residual = 0.0;  // max ||B W + W|| over a unit basis of ker(J^T Omega)
  double form_preservation = 0.0;  // ||B^T eta B - eta||
  double fixed_point = 0.0;        // ||B M - M|| / max(1, ||M||)
  Eigen::Index count = 0;
};

PseudoNormalReversal pseudo_normal_reversal(const IndefiniteForm& form, const ChartPoint& cp);

}  // namespace detvar::pseudo
