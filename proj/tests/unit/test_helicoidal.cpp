#include <doctest.h>

#include "detvar/helicoidal.hpp"
#include "detvar/parametric.hpp"

using namespace detvar;
using namespace detvar::helicoidal;

namespace {

Matrix axis_point() {
  Matrix x = Matrix::Zero(3, 2);
  x(0, 0) = 1.0;
  return x;
}

Matrix random_point(CounterRng& rng, Eigen::Index p, Eigen::Index q, Eigen::Index r) {
  if (r == 0) return Matrix::Zero(p, q);
  return rng.normal_matrix(p, r) * rng.normal_matrix(r, q);
}

// Normal space of the rank-r stratum: W = P_C^perp Y P_R^perp.
Matrix normal_part(const Matrix& x, Eigen::Index r, const Matrix& y) {
  const RankResult rr = svd_rank(x);
  const Matrix u = rr.left.leftCols(r), v = rr.right.leftCols(r);
  const Matrix pc = Matrix::Identity(x.rows(), x.rows()) - u * u.transpose();
  const Matrix pr = Matrix::Identity(x.cols(), x.cols()) - v * v.transpose();
  return pc * y * pr;
}

}  // namespace

TEST_CASE("reflection on the axis-aligned example") {
  const ReflectionIsometry refl = reflection(axis_point(), 1);
  Matrix expected = Matrix::Zero(3, 3);
  expected.diagonal() << 1, -1, -1;
  CHECK((refl.B - expected).norm() < 1e-15);
  CHECK(refl.fixed_point == 0.0);

  const NormalReversal nr = normal_reversal(axis_point(), 1);
  CHECK(nr.count == 2);
  CHECK(nr.max_residual < 1e-15);
  const Matrix nb = normal_basis(axis_point(), 1);
  for (Eigen::Index k = 0; k < nb.cols(); ++k) {
    const Matrix w = unvec(nb.col(k), 3, 2);
    CHECK(w.row(0).norm() < 1e-15);
    CHECK(w.col(0).norm() < 1e-15);
  }
}

TEST_CASE("reflection invariants at random points") {
  CounterRng rng(21, 0);
  for (Eigen::Index p = 2; p <= 6; ++p)
    for (Eigen::Index q = 2; q <= p; ++q)
      for (Eigen::Index r = 0; r < q; ++r) {
        const Matrix x = random_point(rng, p, q, r);
        const ReflectionIsometry refl = reflection(x, r);
        CHECK(refl.orthogonality < 1e-12);
        CHECK(refl.involution < 1e-12);
        CHECK(refl.fixed_point < 1e-12);
      }
  CHECK_THROWS_AS(reflection(random_point(rng, 4, 3, 1), 2), RankMismatch);
}

TEST_CASE("isometry check") {
  CounterRng rng(22, 0);
  CHECK(isometry_check(Matrix::Identity(4, 4), 3, rng).max_residual == 0.0);
  CHECK(isometry_check(reflection(random_point(rng, 4, 3, 2), 2).B, 3, rng).passed);
  Matrix stretch = Matrix::Identity(4, 4);
  stretch(0, 0) = 2.0;
  CHECK_FALSE(isometry_check(stretch, 3, rng).passed);
}

TEST_CASE("tangent membership against the closed-form projector") {
  CounterRng rng(23, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_point(rng, 5, 4, 2);
    CHECK(tangent_membership(x, 2, x).member);
    CHECK(tangent_membership(x, 2, -3.0 * x).member);

    const TangentSetSample ts = sample_tangent_set(x, 2, rng, 6);
    for (std::size_t i = 0; i < ts.members.size(); ++i) {
      CHECK(ts.inclusion_residuals[i] < 1e-10);
      CHECK(normal_part(x, 2, ts.members[i]).norm() < 1e-10 * ts.members[i].norm());
      CHECK(tangent_membership(x, 2, ts.members[i]).member);
    }

    const Matrix y = rng.normal_matrix(5, 4);
    const Matrix w = normal_part(x, 2, y);
    CHECK_FALSE(tangent_membership(x, 2, w).member);
    const Membership generic = tangent_membership(x, 2, y);
    CHECK(generic.residual == doctest::Approx(w.norm() / y.norm()).epsilon(1e-8));
    // invariant under X -> t X
    CHECK(tangent_membership(2.5 * x, 2, y).residual == doctest::Approx(generic.residual).epsilon(1e-9));
  }
}

TEST_CASE("normal reversal and tangent control") {
  CounterRng rng(24, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = random_point(rng, 4, 3, 1);
    const NormalReversal nr = normal_reversal(x, 1);
    CHECK(nr.count == 6);
    CHECK(nr.max_residual < 1e-10);
    CHECK(nr.column_leakage < 1e-10);

    const Matrix b = reflection(x, 1).B;
    const Matrix t = sample_tangent_set(x, 1, rng, 1).members[0];
    const Matrix unit = t / t.norm();
    CHECK((b * unit + unit).norm() > 0.1);
  }
}

TEST_CASE("helicoidal certificate passes on strata and fails for controls") {
  CounterRng rng(25, 0);
  for (Eigen::Index p = 2; p <= 6; ++p)
    for (Eigen::Index q = 2; q <= p; ++q)
      for (Eigen::Index r = 0; r < q; ++r) {
        const Matrix x = random_point(rng, p, q, r);
        const HelicoidalCertificate cert = helicoidal_certificate(x, r, rng);
        CHECK(cert.passed());
        CHECK(cert.determinant_error < 1e-10);
        CHECK(cert.mean_curvature < 1e-9);
        CHECK(cert.mean_curvature_reversal < 1e-9);
      }

  const Matrix x = random_point(rng, 4, 3, 2);
  const HelicoidalCertificate control = certify_isometry(x, 2, rng.orthogonal(4), rng);
  CHECK_FALSE(control.passed());
  CHECK(std::find(control.failed.begin(), control.failed.end(), "fixed_point") != control.failed.end());

  CHECK_THROWS_AS(helicoidal_certificate(random_point(rng, 4, 3, 1), 2, rng), RankMismatch);
}
