#pragma once

#include "detvar/core/identity_report.hpp"
#include "detvar/core/random.hpp"
#include "detvar/core/types.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <optional>
#include <vector>

// Complex strata viewed as real submanifolds, with <Z, Z'> = Re tr(Z^dagger Z').
//
// The 3 x 2 chart Z(x, y, lambda, mu) = (x + i y, (lambda + i mu)(x + i y)) uses
// coordinates (x_1..3, y_1..3, lambda, mu) and the ambient order
// (Re col 1, Im col 1, Re col 2, Im col 2) in R^12.
//
// For the n x n determinant, points of R^{2n^2} hold all real parts and then
// all imaginary parts, column-major within each.

namespace detvar::kahler {

using ComplexMatrix = Eigen::MatrixXcd;

struct ComplexChartPoint {
  Eigen::Vector3d x;
  Eigen::Vector3d y;
  double lambda = 0.0;
  double mu = 0.0;

  Vector coordinates() const;
  Vector e1() const;  // (x; y)
  Vector e2() const;  // (-y; x)
  ComplexMatrix matrix() const;
};

//! Throws InvalidChartPoint when (x, y) = 0 or an entry is not finite.
ComplexChartPoint make_complex_chart_point(const Eigen::Vector3d& x, const Eigen::Vector3d& y, double lambda,
                                           double mu);

ComplexChartPoint sample_complex_chart_point(CounterRng& rng);

template <typename Scalar>
VectorX<Scalar> complex_chart_flat(const VectorX<Scalar>& c) {
  VectorX<Scalar> z(12);
  const Scalar lambda = c(6), mu = c(7);
  for (int i = 0; i < 3; ++i) {
    const Scalar x = c(i), y = c(3 + i);
    z(i) = x;
    z(3 + i) = y;
    z(6 + i) = lambda * x - mu * y;
    z(9 + i) = lambda * y + mu * x;
  }
  return z;
}

struct ComplexChartGeometry {
  Matrix jacobian;       // 12 x 8
  Matrix metric;         // Gram of the tangent vectors
  Matrix metric_closed;  // block form with (1 + lambda^2 + mu^2) 1_6, B, (|x|^2 + |y|^2) 1_2
  double metric_discrepancy = 0.0;
  double off_block_orthogonality = 0.0;  // |<b_1, b_2>| for the columns of B
  double off_block_length_gap = 0.0;     // | |b_1| - |b_2| |

  Matrix inverse;
  double schur_discrepancy = 0.0;    // (D - B^T G^{-1} B)^{-1} vs (1 + lambda^2 + mu^2)/(|x|^2 + |y|^2) 1
  double off_inverse_discrepancy = 0.0;  // vs -(lambda E1 - mu E2, lambda E2 + mu E1) / (|x|^2 + |y|^2)

  //! Second derivatives: largest deviation from d2_{x_i lambda} = (0,0,e_i,0) = -d2_{y_i mu},
  //! d2_{x_i mu} = (0,0,0,e_i) = d2_{y_i lambda}, all others zero.
  double second_derivative_pattern = 0.0;
  //! Same with the printed d2_{x_i mu} = d2_{y_i mu}, which contradicts the line before.
  double printed_pattern_discrepancy = 0.0;

  Matrix normals;  // 12 x 4, orthonormal
  double normal_tangency = 0.0;  // ||J^T n||
  double normal_e_orthogonality = 0.0;  // max |N . E_1|, |N . E_2| of the last six entries
  //! ||J^T (0, N)|| for normals padded with zeros in the first six entries.
  double padded_normal_tangency = 0.0;

  Vector mean_curvature;  // 4 components
};

ComplexChartGeometry complex_chart_geometry(const ComplexChartPoint& cp);

//! det Z = u + i v for the flattened complex matrix w in R^{2n^2}.
template <typename Scalar>
std::pair<Scalar, Scalar> complex_determinant(const VectorX<Scalar>& w, Eigen::Index n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  const Eigen::Index nn = n * n;
  Scalar re(0), im(0);
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)]) ++inversions;
    Scalar pr(1), pi(0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index k = i + n * perm[static_cast<std::size_t>(i)];
      const Scalar a = w(k), b = w(nn + k);
      const Scalar nr = pr * a - pi * b;
      pi = pr * b + pi * a;
      pr = nr;
    }
    if (inversions % 2) {
      re = re - pr;
      im = im - pi;
    } else {
      re = re + pr;
      im = im + pi;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {re, im};
}

Vector flatten_complex(const ComplexMatrix& z);
ComplexMatrix unflatten_complex(const Vector& w, Eigen::Index n);

struct TwinHarmonicValues {
  Eigen::Index n = 0;
  double u = 0.0;
  double v = 0.0;
  Vector grad_u, grad_v;
  Matrix hess_u, hess_v;
  double scale = 0.0;  // max(1, ||w||)^n, bounds |det|
};

TwinHarmonicValues twin_harmonics(const Vector& w, Eigen::Index n);

//! rho = u_i u_ij u_j / u, or v_i v_ij v_j / v when |u| is too small; empty
//! when both |u| and |v| are below 1e-6 times the scale.
std::optional<double> twin_rho(const TwinHarmonicValues& th);

struct TwinHarmonicReport {
  IdentityReport identities;
  std::optional<double> rho_u;
  std::optional<double> rho_v;
  double rho = 0.0;  // value substituted in the contraction identities
  double conformal_gram = 0.0;  // ||M - |grad u|^2 1_2|| / max(1, |grad u|^2)
};

//! |grad u|^2 = |grad v|^2, grad u . grad v = 0, harmonicity, the
//! differentiated relations u_i u_ij = v_i v_ij and u_i v_ij + u_ij v_i = 0, and
//! the eight contractions such as u_i v_ij u_j = -rho v with a common rho.
TwinHarmonicReport twin_harmonic_suite(const Vector& w, Eigen::Index n);

//! |rho(t w) - t^(2n-4) rho(w)| / max(1, |t^(2n-4) rho(w)|).
double rho_homogeneity(const Vector& w, Eigen::Index n, double t);

struct ZetaMinimality {
  double trace_u = 0.0;  // tr(P d^2 u) / max(1, ||d^2 u||)
  double trace_v = 0.0;
  double conformal_gram = 0.0;
  double max_relative() const { return std::max(std::abs(trace_u), std::abs(trace_v)); }
};

//! Requires |det Z| <= 1e-12 times the scale (InvalidChartPoint otherwise) and
//! throws SingularGram when grad u vanishes, i.e. on a deeper stratum.
ZetaMinimality zeta_minimality(const ComplexMatrix& z);

//! Random complex n x n matrix of rank n - 1.
ComplexMatrix sample_zeta_point(CounterRng& rng, Eigen::Index n);

}  // namespace detvar::kahler
