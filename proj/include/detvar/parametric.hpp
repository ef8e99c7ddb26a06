#pragma once

#include "detvar/core/block_inverse.hpp"
#include "detvar/core/derivatives.hpp"
#include "detvar/core/random.hpp"
#include "detvar/core/rank.hpp"
#include "detvar/core/types.hpp"

#include <optional>
#include <vector>

// Chart X(a, lambda) = (a, a lambda) of the rank-r stratum of p x q matrices
// and everything needed to evaluate its mean curvature.
//
// Coordinates are ordered (vec(a), vec(lambda)) with column-major vec, so a_Js
// is coordinate J + p s and lambda_ss' is coordinate p r + s + r s'. Ambient
// matrices are flattened column-major too; tr(X^T Y) is then the dot product.

namespace detvar {

//! Point (a, lambda) of the chart domain. `permutation[k]` is the ambient
//! column that receives column k of (a, a lambda); identity when empty.
struct ChartPoint {
  Matrix a;       // p x r, rank r
  Matrix lambda;  // r x (q - r)
  std::vector<Eigen::Index> permutation;

  Eigen::Index p() const { return a.rows(); }
  Eigen::Index r() const { return a.cols(); }
  Eigen::Index q() const { return a.cols() + lambda.cols(); }
  //! Dimension of the stratum, p r + r (q - r) = r (p - r) + q r.
  Eigen::Index dim() const { return p() * r() + r() * (q() - r()); }
  Eigen::Index normal_count() const { return (q() - r()) * (p() - r()); }
  Vector coordinates() const;
};

//! Validates shapes (p >= q > r >= 0), rank(a) = r and the permutation.
//! Throws InvalidChartPoint.
ChartPoint make_chart_point(Matrix a, Matrix lambda, std::vector<Eigen::Index> permutation = {});

//! a ~ N(0, 1) entrywise, rejected while cond(a^T a) > 1e4; lambda ~ U[-2, 2].
ChartPoint sample_chart_point(CounterRng& rng, Eigen::Index p, Eigen::Index q, Eigen::Index r);

//! Chart in flat coordinates, generic in the scalar so dual numbers flow through.
//! Returns vec((a, a lambda)) in chart column order (no permutation).
template <typename Scalar>
VectorX<Scalar> chart_map_flat(const VectorX<Scalar>& x, Eigen::Index p, Eigen::Index q, Eigen::Index r) {
  const Eigen::Index rp = q - r;
  MatrixX<Scalar> a(p, r), lambda(r, rp);
  for (Eigen::Index s = 0; s < r; ++s)
    for (Eigen::Index j = 0; j < p; ++j) a(j, s) = x(j + p * s);
  for (Eigen::Index t = 0; t < rp; ++t)
    for (Eigen::Index s = 0; s < r; ++s) lambda(s, t) = x(p * r + s + r * t);
  VectorX<Scalar> out(p * q);
  for (Eigen::Index s = 0; s < r; ++s)
    for (Eigen::Index j = 0; j < p; ++j) out(j + p * s) = a(j, s);
  for (Eigen::Index t = 0; t < rp; ++t) {
    for (Eigen::Index j = 0; j < p; ++j) {
      Scalar acc(0);
      for (Eigen::Index s = 0; s < r; ++s) acc = acc + a(j, s) * lambda(s, t);
      out(j + p * (r + t)) = acc;
    }
  }
  return out;
}

//! Moves chart column k to ambient column permutation[k].
Matrix to_ambient(const Matrix& chart_layout, const std::vector<Eigen::Index>& permutation);
Matrix to_chart_layout(const Matrix& ambient, const std::vector<Eigen::Index>& permutation);

Matrix chart_map(const ChartPoint& cp);

//! D X (c, mu) = (c, c lambda + a mu), returned in ambient layout.
Matrix chart_derivative(const ChartPoint& cp, const Matrix& c, const Matrix& mu);

//! pq x dim matrix whose columns are vec(D X e_mu) in ambient layout.
Matrix chart_jacobian(const ChartPoint& cp);

//! Induced first fundamental form in block form. G realises right
//! multiplication by 1 + lambda lambda^T on c, B the map mu -> a mu lambda^T,
//! D left multiplication by a^T a on mu.
struct MetricBlocks {
  Matrix G;
  Matrix B;
  Matrix D;
  Matrix schur_inv;  // (D - B^T G^{-1} B)^{-1}

  Matrix assembled() const { return assemble_blocks(G, B, D); }
};

MetricBlocks induced_metric(const ChartPoint& cp);

//! The inverse metric by every available route, with their cross-checks.
struct MetricInverse {
  Matrix schur_route;     // eliminate G first
  Matrix lower_route;     // eliminate D first
  Matrix operator_route;  // closed form in left/right multiplication operators
  Matrix generic;         // LU inverse of the assembled matrix
  Matrix rho_operator;    // (a^T a)^{-1} mu (1 + lambda^T lambda)
  double max_defect = 0.0;                 // max over routes of ||inv G_hat - I||_inf
  double max_pairwise = 0.0;               // max over route pairs of the largest entry difference
  double rho_discrepancy = 0.0;            // schur_inv vs rho_operator
  //! Distance between the printed lower-left block R_lambda L_{(a^T a)^{-1} a^T}
  //! (no minus sign) and the actual block. Nonzero whenever lambda != 0.
  double printed_lower_left_discrepancy = 0.0;
};

MetricInverse metric_inverse(const ChartPoint& cp, const MetricBlocks& mb);

//! Normals N_{s's''}: columns 0..r-1 are gamma_s' lambda_{ks'} e_s'', column
//! r + s' is -gamma_s' e_s'', with {e_s''} an orthonormal basis of ker(a^T)
//! and gamma_s' = (1 + sum_k lambda_{ks'}^2)^{-1/2}. Index alpha = s' (p - r) + s''.
//! Unit length; normals with different s'' are orthogonal, those sharing s''
//! have inner product gamma_s' gamma_t' (lambda^T lambda)_{s't'}.
struct NormalFrame {
  std::vector<Matrix> normals;
  Vector gamma;
  Matrix kernel_basis;

  //! pq x count matrix of vec(N_alpha).
  Matrix columns() const;
  Matrix gram() const;
};

//! `kernel_basis`, when given, replaces the SVD choice of {e_s''} (gauge).
NormalFrame normal_frame(const ChartPoint& cp, const std::optional<Matrix>& kernel_basis = std::nullopt);

//! h^alpha_{mu nu} per normal, by the closed form and by contracting N_alpha
//! with the dual-number second derivatives of X.
struct SecondFundamentalForm {
  std::vector<Matrix> closed_form;
  std::vector<Matrix> contracted;
  double discrepancy = 0.0;
  //! Same comparison with the closed form's overall sign flipped, i.e. the
  //! +gamma delta e convention; nonzero because N carries -e in column r + s'.
  double printed_sign_discrepancy = 0.0;
  //! Largest |h| among a-a or lambda-lambda coordinate pairs.
  double off_pattern_max = 0.0;
};

SecondFundamentalForm second_fundamental_form(const ChartPoint& cp);

//! Second derivatives of X: the tensor over coordinate pairs, in ambient layout.
std::vector<Matrix> chart_second_derivatives(const ChartPoint& cp);

struct MeanCurvature {
  Vector components;      // <N_alpha, trace_vector>
  Matrix ambient_vector;  // normal projection of trace_vector
  Matrix trace_vector;    // sum G_hat^{mu nu} d^2 X / dx^mu dx^nu
  //! || trace_vector + 2 D X (0, (a^T a)^{-1} lambda) ||
  double tangency_residual = 0.0;
  //! Normal projection via the frame Gram vs via I - J G_hat^{-1} J^T.
  double projection_consistency = 0.0;
  double max_component() const { return components.size() ? components.cwiseAbs().maxCoeff() : 0.0; }
};

MeanCurvature mean_curvature(const ChartPoint& cp,
                             const std::optional<Matrix>& kernel_basis = std::nullopt);

//! The off-diagonal inverse block G_hat^{Js, ut'} carries its p-vector index
//! through the columns of a.
struct OpStructureReport {
  double column_space_residual = 0.0;  // max ||P_a slice|| / max(1, ||slice||)
  double explicit_form_residual = 0.0; // vs -(a (a^T a)^{-1})_{Ju} lambda_{st'}
  bool passed = false;
};

OpStructureReport o_p_structure_check(const ChartPoint& cp, double tol = 1e-10);

//! Finite-difference first variation of the area density along a normal
//! direction: d/d eps log sqrt det(J_eps^T J_eps) at eps = 0, where
//! J_eps is the Jacobian of x -> F(x) + eps V(x) and V(x) is the orthogonal
//! projection of the constant direction W onto the normal space at x.
//! For a normal W at x0 this equals -<H, W>. Uses function values only.
template <typename F>
double volume_first_variation(F&& f, const Vector& x0, const Vector& w) {
  const double h_jac = 1e-3;  // exact for quadratic maps, small enough for the rest
  const double h_x = 1e-4;
  const double h_eps = 1e-4;
  const auto n = x0.size();

  auto fd_jacobian = [&](auto&& g, const Vector& x, double h) {
    const Vector g0 = g(x);
    Matrix jac(g0.size(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      jac.col(i) = (g(xp) - g(xm)) / (2.0 * h);
    }
    return jac;
  };
  auto eval = [&](const Vector& x) -> Vector { return f(x); };
  auto normal_field = [&](const Vector& x) -> Vector {
    const Matrix jac = fd_jacobian(eval, x, h_jac);
    const Vector coeff = jac.colPivHouseholderQr().solve(w);
    return w - jac * coeff;
  };
  const Matrix j0 = fd_jacobian(eval, x0, h_x);
  const Matrix k0 = fd_jacobian(normal_field, x0, h_x);
  auto half_logdet = [&](double eps) {
    const Matrix je = j0 + eps * k0;
    const Matrix g = je.transpose() * je;
    Eigen::LLT<Matrix> llt(g);
    return llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  };
  return (half_logdet(h_eps) - half_logdet(-h_eps)) / (2.0 * h_eps);
}

//! First variation of the chart's area density along the ambient direction W.
double volume_first_variation(const ChartPoint& cp, const Matrix& w);

//! Chart point reproducing X on the first column patch (lexicographic r-subsets)
//! whose columns are well conditioned; falls back to the best-conditioned patch.
//! Throws RankMismatch when rank(X) != r.
ChartPoint chart_point_at(const Matrix& x, Eigen::Index r);

}  // namespace detvar
