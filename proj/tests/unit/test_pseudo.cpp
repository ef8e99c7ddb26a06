#include <doctest.h>

#include "detvar/pseudo.hpp"

using namespace detvar;
using namespace detvar::pseudo;

namespace {

ChartPoint example_2x2(double lambda) {
  Matrix a(2, 1);
  a << 1, 0;
  Matrix l(1, 1);
  l << lambda;
  return make_chart_point(a, l);
}

std::string signs(int plus, int minus) { return std::string(static_cast<std::size_t>(plus), '+') + std::string(static_cast<std::size_t>(minus), '-'); }

}  // namespace

TEST_CASE("form parsing and the product on vec") {
  const IndefiniteForm form = parse_form("++-", "+-");
  CHECK(form.p1() == 2);
  CHECK(form.p2() == 1);
  CHECK(form.q1() == 1);
  CHECK(form.q2() == 1);
  CHECK_THROWS_AS(parse_form("+x", "+"), std::invalid_argument);
  CHECK_THROWS_AS(parse_form("", "+"), std::invalid_argument);

  CounterRng rng(41, 0);
  const Matrix a = rng.normal_matrix(3, 2), b = rng.normal_matrix(3, 2);
  double direct = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 2; ++k) direct += form.eta(i) * form.zeta(k) * a(i, k) * b(i, k);
  CHECK(form.product(a, b) == doctest::Approx(direct));
  CHECK(vec(a).dot(form.omega() * vec(b)) == doctest::Approx(direct));
}

TEST_CASE("ambient signature: eigen counts against both formulas") {
  const AmbientSignature ex = ambient_signature(parse_form("++", "+-"));
  CHECK(ex.eigen == SubspaceSignature{2, 2, 0});
  CHECK(ex.printed == SubspaceSignature{1, 2, 0});
  CHECK_FALSE(ex.printed_matches);
  CHECK(ex.combinatorial_matches);

  CHECK(ambient_signature(euclidean_form(3, 2)).eigen == SubspaceSignature{6, 0, 0});

  int printed_hits = 0, total = 0;
  for (int p = 1; p <= 4; ++p)
    for (int q = 1; q <= 4; ++q)
      for (int p1 = 0; p1 <= p; ++p1)
        for (int q1 = 0; q1 <= q; ++q1) {
          const AmbientSignature s = ambient_signature(parse_form(signs(p1, p - p1), signs(q1, q - q1)));
          CHECK(s.eigen.dimension() == p * q);
          CHECK(s.combinatorial_matches);
          printed_hits += s.printed_matches;
          ++total;
        }
  CHECK(printed_hits < total);
}

TEST_CASE("degeneracy of the 2 x 2 example") {
  const IndefiniteForm form = parse_form("++", "+-");
  const DegeneracyScan two = degeneracy_scan(form, example_2x2(2.0));
  CHECK(two.determinant == doctest::Approx(3.0));
  CHECK_FALSE(two.degenerate);

  const DegeneracyScan one = degeneracy_scan(form, example_2x2(1.0));
  CHECK(std::abs(one.determinant) < 1e-14);
  CHECK(one.degenerate);
  CHECK_THROWS_AS(pseudo_minimality(form, example_2x2(1.0)), DegenerateMetric);

  CounterRng rng(42, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const ChartPoint cp = sample_chart_point(rng, 2, 2, 1);
    const double lam = cp.lambda(0, 0);
    const double expected = cp.a.squaredNorm() * (lam * lam - 1.0);
    CHECK(degeneracy_scan(form, cp).determinant == doctest::Approx(expected).epsilon(1e-10));
    CHECK(degeneracy_scan(euclidean_form(2, 2), cp).inertia == SubspaceSignature{3, 0, 0});
  }

  // |det| <= 1e-10 exactly when |lambda^2 - 1| <= 1e-10 / (a^T a)
  for (double gap : {1e-6, 1e-8, 1e-12}) {
    const double lam = std::sqrt(1.0 + gap);
    const bool small = std::abs(degeneracy_scan(form, example_2x2(lam)).determinant) <= 1e-10;
    CHECK(small == (gap <= 1e-10));
  }
}

TEST_CASE("Z' membership via restricted Grams") {
  CounterRng rng(43, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = rng.normal_matrix(4, 2) * rng.normal_matrix(2, 3);
    const ZPrimeMembership z = zprime_membership(euclidean_form(4, 3), m, 2, 2, 2);
    CHECK(z.column_space == SubspaceSignature{2, 0, 0});
    CHECK(z.member);
  }
  const IndefiniteForm form = parse_form("+-+", "++");
  Matrix mixed = Matrix::Zero(3, 2);
  mixed(0, 0) = 1.0;
  mixed(1, 1) = 1.0;
  const ZPrimeMembership zm = zprime_membership(form, mixed, 2, 1, 2);
  CHECK(zm.column_space == SubspaceSignature{1, 1, 0});
  CHECK(zm.member);

  Matrix null_col = Matrix::Zero(3, 2);
  null_col(0, 0) = 1.0;
  null_col(1, 0) = 1.0;
  null_col(2, 1) = 1.0;
  const ZPrimeMembership zn = zprime_membership(form, null_col, 2, 1, 2);
  CHECK(zn.column_space.null == 1);
  CHECK_FALSE(zn.member);
}

TEST_CASE("pseudo minimality: euclidean specialisation") {
  CounterRng rng(44, 0);
  for (Eigen::Index p = 2; p <= 5; ++p)
    for (Eigen::Index q = 2; q <= p; ++q)
      for (Eigen::Index r = 1; r < q; ++r) {
        const ChartPoint cp = sample_chart_point(rng, p, q, r);
        const PseudoMinimality pm = pseudo_minimality(euclidean_form(p, q), cp);
        const MeanCurvature mc = mean_curvature(cp);
        CHECK((pm.mean_curvature - mc.ambient_vector).norm() < 1e-12);
        CHECK(pm.residual < 1e-9);
        CHECK(pm.corrected_matches);
      }
}

TEST_CASE("pseudo minimality at indefinite nondegenerate points") {
  const PseudoMinimality ex = pseudo_minimality(parse_form("++", "+-"), example_2x2(2.0));
  CHECK(ex.residual < 1e-10);

  CounterRng rng(45, 0);
  const IndefiniteForm form = parse_form("++-", "++");
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const ChartPoint cp = sample_chart_point(rng, 3, 2, 1);
    const DegeneracyScan scan = degeneracy_scan(form, cp);
    if (scan.degenerate || scan.condition > 1e6) continue;
    const PseudoMinimality pm = pseudo_minimality(form, cp);
    CHECK(pm.residual < 1e-9);
    CHECK(pm.corrected_matches);
    ++checked;

    // the trace vector's normal part by finite differences of the chart
    const auto n = cp.dim();
    const Matrix g_inv = scan.metric.inverse();
    const Vector x0 = cp.coordinates();
    auto f = [&](const Vector& x) { return vec(to_ambient(unvec(chart_map_flat<double>(x, 3, 2, 1), 3, 2), cp.permutation)); };
    Vector trace = Vector::Zero(6);
    const double h = 1e-4;
    for (Eigen::Index mu = 0; mu < n; ++mu)
      for (Eigen::Index nu = 0; nu < n; ++nu) {
        Vector pp = x0, pm_ = x0, mp = x0, mm = x0;
        pp(mu) += h; pp(nu) += h;
        pm_(mu) += h; pm_(nu) -= h;
        mp(mu) -= h; mp(nu) += h;
        mm(mu) -= h; mm(nu) -= h;
        trace += g_inv(mu, nu) * (f(pp) - f(pm_) - f(mp) + f(mm)) / (4 * h * h);
      }
    const Matrix jac = chart_jacobian(cp);
    const Vector normal = trace - jac * (g_inv * (jac.transpose() * form.omega() * trace));
    CHECK(normal.norm() < 1e-5 * std::max(1.0, pm.scale));
  }
  CHECK(checked > 20);
}

TEST_CASE("induced signature formula: corrected reading across forms") {
  CounterRng rng(46, 0);
  int printed = 0, corrected = 0, total = 0;
  for (int p = 2; p <= 4; ++p)
    for (int q = 2; q <= p; ++q)
      for (int p1 = 0; p1 <= p; ++p1)
        for (int q1 = 0; q1 <= q; ++q1)
          for (int r = 1; r < q; ++r)
            for (int trial = 0; trial < 3; ++trial) {
              const IndefiniteForm form = parse_form(signs(p1, p - p1), signs(q1, q - q1));
              const ChartPoint cp = sample_chart_point(rng, p, q, r);
              const DegeneracyScan scan = degeneracy_scan(form, cp);
              if (scan.degenerate || scan.condition > 1e6) continue;
              const PseudoMinimality pm = pseudo_minimality(form, cp);
              if (!pm.column_space.nondegenerate() || !pm.row_space.nondegenerate()) continue;
              ++total;
              corrected += pm.corrected_matches;
              printed += pm.printed_matches;
            }
  CHECK(total > 100);
  CHECK(corrected == total);
  CHECK(printed < total);
}

TEST_CASE("form-compatible reflection reverses pseudo-normals") {
  CounterRng rng(47, 0);
  const IndefiniteForm form = parse_form("++-", "+-");
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const ChartPoint cp = sample_chart_point(rng, 3, 2, 1);
    if (degeneracy_scan(form, cp).degenerate) continue;
    const PseudoNormalReversal nr = pseudo_normal_reversal(form, cp);
    CHECK(nr.count == 2);
    CHECK(nr.max_residual < 1e-9);
    CHECK(nr.form_preservation < 1e-9);
    CHECK(nr.fixed_point < 1e-12);
    ++checked;
  }
  CHECK(checked > 10);

  Matrix null_col = Matrix::Zero(3, 2);
  null_col(0, 0) = 1.0;
  null_col(2, 0) = 1.0;
  CHECK_THROWS_AS(form_reflection(form, null_col, 1), DegenerateMetric);
}
