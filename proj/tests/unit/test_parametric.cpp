#include <doctest.h>

#include "detvar/parametric.hpp"

using namespace detvar;

namespace {

ChartPoint point_2x2(double c) {
  Matrix a(2, 1);
  a << 1, 0;
  Matrix lambda(1, 1);
  lambda << c;
  return make_chart_point(a, lambda);
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("chart_map: direct substitution and zero lambda") {
  const Matrix x = chart_map(point_2x2(2.0));
  Matrix expected(2, 2);
  expected << 1, 2, 0, 0;
  CHECK((x - expected).norm() == 0.0);

  CounterRng rng(1, 0);
  Matrix a = rng.normal_matrix(4, 2);
  const ChartPoint zero = make_chart_point(a, Matrix::Zero(2, 1));
  CHECK(chart_map(zero).leftCols(2) == a);
  CHECK(chart_map(zero).col(2).isZero(0.0));

  for (int i = 0; i < 10; ++i) CHECK(svd_rank(chart_map(sample_chart_point(rng, 5, 4, 2))).rank == 2);
}

TEST_CASE("chart point validation") {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;  // rank 1
  CHECK_THROWS_AS(make_chart_point(a, Matrix::Zero(2, 1)), InvalidChartPoint);
  CHECK_THROWS_AS(make_chart_point(Matrix::Identity(2, 2), Matrix::Zero(2, 1)), InvalidChartPoint);  // p < q
  CHECK_THROWS_AS(make_chart_point(Matrix::Identity(3, 1), Matrix::Zero(2, 1)), InvalidChartPoint);
}

TEST_CASE("chart_derivative: linearity, substitution, full rank") {
  CounterRng rng(2, 0);
  const ChartPoint cp = sample_chart_point(rng, 4, 3, 2);
  CHECK(chart_derivative(cp, Matrix::Zero(4, 2), Matrix::Zero(2, 1)).isZero(0.0));

  Matrix e11 = Matrix::Zero(2, 1);
  e11(0, 0) = 1.0;
  const Matrix d = chart_derivative(cp, Matrix::Zero(4, 2), e11);
  CHECK(d.leftCols(2).isZero(0.0));
  CHECK((d.col(2) - cp.a * e11).norm() == 0.0);

  CHECK_THROWS_AS(chart_derivative(cp, Matrix::Zero(3, 2), e11), ShapeMismatch);

  for (Eigen::Index p = 2; p <= 6; ++p)
    for (Eigen::Index q = 2; q <= p; ++q)
      for (Eigen::Index r = 0; r < q; ++r) {
        const ChartPoint pt = sample_chart_point(rng, p, q, r);
        const Eigen::Index expected = r * (p - r) + q * r;
        CHECK(pt.dim() == expected);
        if (expected > 0) CHECK(svd_rank(chart_jacobian(pt)).rank == expected);
        CHECK(pt.dim() + pt.normal_count() == p * q);
      }
}

TEST_CASE("chart_jacobian agrees with dual-number differentiation") {
  CounterRng rng(3, 0);
  const ChartPoint cp = sample_chart_point(rng, 5, 4, 2);
  auto map = [](const auto& x) { return chart_map_flat(x, 5, 4, 2); };
  CHECK((jacobian(map, cp.coordinates()) - chart_jacobian(cp)).norm() <= 1e-14);
}

TEST_CASE("induced_metric: identity at orthonormal a, zero lambda") {
  CounterRng rng(4, 0);
  const Matrix a = rng.orthogonal(5).leftCols(2);
  const ChartPoint cp = make_chart_point(a, Matrix::Zero(2, 2));
  CHECK((induced_metric(cp).assembled() - Matrix::Identity(cp.dim(), cp.dim())).norm() <= 1e-14);
}

TEST_CASE("induced_metric: equals Gram matrix of the chart derivative") {
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = 2 + static_cast<Eigen::Index>(rng.uniform() * 5);
    const auto q = 2 + static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(p - 1));
    const auto r = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(q));
    const ChartPoint cp = sample_chart_point(rng, p, q, r);
    if (cp.dim() == 0) continue;
    const Matrix jac = chart_jacobian(cp);
    CHECK(max_abs(induced_metric(cp).assembled() - jac.transpose() * jac) <= 1e-12);
  }
}

TEST_CASE("induced_metric: 2x2 hand evaluation") {
  const double c = 0.7;
  const MetricBlocks mb = induced_metric(point_2x2(c));
  CHECK((mb.G - (1 + c * c) * Matrix::Identity(2, 2)).norm() <= 1e-15);
  CHECK(mb.D.rows() == 1);
  CHECK(mb.D(0, 0) == doctest::Approx(1.0));
  CHECK(mb.B(0, 0) == doctest::Approx(c));
  CHECK(mb.B(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("metric_inverse: all routes agree and invert the metric") {
  CounterRng rng(6, 0);
  const ChartPoint id = make_chart_point(Matrix::Identity(3, 1), Matrix::Zero(1, 1));
  const MetricInverse mi_id = metric_inverse(id, induced_metric(id));
  CHECK((mi_id.operator_route - Matrix::Identity(3, 3)).norm() <= 1e-15);

  for (int trial = 0; trial < 40; ++trial) {
    const ChartPoint cp = sample_chart_point(rng, 5, 4, 2);
    const MetricBlocks mb = induced_metric(cp);
    const MetricInverse mi = metric_inverse(cp, mb);
    CHECK(mi.max_defect <= 1e-10);
    CHECK(mi.max_pairwise <= 1e-10);
    CHECK(mi.rho_discrepancy <= 1e-10);
    // The printed lower-left block lacks the minus sign; it is off by twice the block.
    CHECK(mi.printed_lower_left_discrepancy > 1e-3);
  }
}

TEST_CASE("metric_inverse: top-left block is 1 - P_a (.) lambda lambda^T (1 + lambda lambda^T)^{-1}") {
  CounterRng rng(7, 0);
  const ChartPoint cp = sample_chart_point(rng, 4, 3, 1);
  const MetricBlocks mb = induced_metric(cp);
  const Matrix generic = block_inverse(mb.G, mb.B, mb.D).inverse;
  const Eigen::Index p = 4, r = 1;
  const Matrix pa = Matrix::Identity(p, p) - cp.a * (cp.a.transpose() * cp.a).inverse() * cp.a.transpose();
  const Matrix llt = cp.lambda * cp.lambda.transpose();
  const Matrix shrink = llt * (Matrix::Identity(r, r) + llt).inverse();
  for (Eigen::Index J = 0; J < p; ++J)
    for (Eigen::Index s = 0; s < r; ++s)
      for (Eigen::Index K = 0; K < p; ++K)
        for (Eigen::Index t = 0; t < r; ++t) {
          // (c -> c - P_a c S) applied to E_{Kt}, read at (J, s)
          const double expected = (J == K && s == t ? 1.0 : 0.0) - pa(J, K) * shrink(t, s);
          CHECK(generic(J + p * s, K + p * t) == doctest::Approx(expected).epsilon(1e-10));
        }
}

TEST_CASE("normal_frame: 2x2 example, zero lambda, counts") {
  const double c = 1.3;
  const ChartPoint cp = point_2x2(c);
  const NormalFrame nf = normal_frame(cp);
  REQUIRE(nf.normals.size() == 1);
  Matrix expected(2, 2);
  expected << 0, 0, c, -1;
  expected /= std::sqrt(1 + c * c);
  CHECK((nf.normals[0].cwiseAbs() - expected.cwiseAbs()).norm() <= 1e-15);
  const Matrix jac = chart_jacobian(cp);
  CHECK((jac.transpose() * vec(nf.normals[0])).norm() <= 1e-15);

  CounterRng rng(8, 0);
  const ChartPoint flat = make_chart_point(rng.normal_matrix(5, 2), Matrix::Zero(2, 2));
  const NormalFrame nf0 = normal_frame(flat);
  CHECK(nf0.gamma.isOnes(0.0));
  for (const Matrix& n : nf0.normals) CHECK(n.leftCols(2).isZero(0.0));

  CHECK(normal_frame(sample_chart_point(rng, 5, 3, 2)).normals.size() == 3);
}

TEST_CASE("normal_frame: unit normals orthogonal to the tangent space") {
  CounterRng rng(9, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = 2 + static_cast<Eigen::Index>(rng.uniform() * 6);
    const auto q = 2 + static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(p - 1));
    const auto r = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(q));
    const ChartPoint cp = sample_chart_point(rng, p, q, r);
    const NormalFrame nf = normal_frame(cp);
    CHECK(static_cast<Eigen::Index>(nf.normals.size()) == (q - r) * (p - r));
    const Matrix cols = nf.columns();
    if (cp.dim() > 0) CHECK(max_abs(chart_jacobian(cp).transpose() * cols) <= 1e-10);
    const Matrix gram = nf.gram();
    CHECK((gram.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-12);
    // Distinct kernel vectors give orthogonal normals; the frame spans the normal space.
    const Eigen::Index rpp = p - r;
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
      for (Eigen::Index j = 0; j < gram.cols(); ++j)
        if (i % rpp != j % rpp) CHECK(std::abs(gram(i, j)) <= 1e-12);
    CHECK(svd_rank(cols).rank == cols.cols());
  }
}

TEST_CASE("second_fundamental_form: closed form equals contraction with d^2 X") {
  CounterRng rng(10, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = 2 + static_cast<Eigen::Index>(rng.uniform() * 5);
    const auto q = 2 + static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(p - 1));
    const auto r = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(q));
    const ChartPoint cp = sample_chart_point(rng, p, q, r);
    const SecondFundamentalForm sff = second_fundamental_form(cp);
    CHECK(sff.discrepancy <= 1e-10);
    CHECK(sff.off_pattern_max == 0.0);
    for (const Matrix& h : sff.contracted) CHECK((h - h.transpose()).norm() == 0.0);
  }
}

TEST_CASE("second_fundamental_form: Kronecker delta in the normal label") {
  CounterRng rng(11, 0);
  const ChartPoint cp = sample_chart_point(rng, 5, 4, 2);
  const SecondFundamentalForm sff = second_fundamental_form(cp);
  const Eigen::Index p = 5, r = 2, rpp = 3;
  for (std::size_t alpha = 0; alpha < sff.contracted.size(); ++alpha) {
    const Eigen::Index tp = static_cast<Eigen::Index>(alpha) / rpp;
    for (Eigen::Index sp = 0; sp < 2; ++sp) {
      if (sp == tp) continue;
      for (Eigen::Index s = 0; s < r; ++s)
        for (Eigen::Index J = 0; J < p; ++J)
          CHECK(sff.contracted[alpha](J + p * s, p * r + s + r * sp) == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("mean_curvature: exact zero at lambda = 0") {
  CounterRng rng(12, 0);
  const ChartPoint cp = make_chart_point(rng.normal_matrix(5, 2), Matrix::Zero(2, 2));
  const MeanCurvature mc = mean_curvature(cp);
  CHECK(mc.trace_vector.isZero(0.0));
  CHECK(mc.components.isZero(0.0));
}

TEST_CASE("mean_curvature: (3,2,1) vanishes, confirmed by the volume first variation") {
  CounterRng rng(13, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const ChartPoint cp = sample_chart_point(rng, 3, 2, 1);
    const MeanCurvature mc = mean_curvature(cp);
    CHECK(mc.max_component() <= 1e-10);
    CHECK(mc.tangency_residual <= 1e-9);
    CHECK(mc.projection_consistency <= 1e-10);
    for (const Matrix& n : normal_frame(cp).normals) CHECK(std::abs(volume_first_variation(cp, n)) <= 1e-5);
  }
}

TEST_CASE("mean_curvature: (6,5,3) at 100 seeded points") {
  CounterRng rng(14, 0);
  double worst = 0.0, worst_tangency = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const MeanCurvature mc = mean_curvature(sample_chart_point(rng, 6, 5, 3));
    worst = std::max(worst, mc.max_component());
    worst_tangency = std::max(worst_tangency, mc.tangency_residual);
  }
  CHECK(worst <= 1e-9);
  CHECK(worst_tangency <= 1e-9);
}

TEST_CASE("volume_first_variation detects curvature of a paraboloid") {
  // Graph of z = x^2 + y^2 at (x, y) = (0.3, -0.2); the oracle must return -<H, W>.
  auto graph = [](const auto& u) {
    using S = std::decay_t<decltype(u(0))>;
    VectorX<S> out(3);
    out << u(0), u(1), u(0) * u(0) + u(1) * u(1);
    return out;
  };
  Vector x0(2);
  x0 << 0.3, -0.2;
  const Matrix jac = jacobian(graph, x0);
  const Matrix g_inv = (jac.transpose() * jac).inverse();
  const std::vector<Matrix> d2 = hessian_tensor(graph, x0);
  Vector trace(3);
  for (int c = 0; c < 3; ++c) trace(c) = (g_inv.array() * d2[static_cast<std::size_t>(c)].array()).sum();
  const Vector h = trace - jac * g_inv * jac.transpose() * trace;
  const Vector w = h.normalized();
  const double variation = volume_first_variation([&](const Vector& u) -> Vector { return graph(u); }, x0, w);
  CHECK(variation == doctest::Approx(-h.dot(w)).epsilon(1e-5));
  CHECK(std::abs(variation) > 0.5);
}

TEST_CASE("o_p_structure_check: column-space residual and explicit form") {
  CounterRng rng(15, 0);
  const ChartPoint zero = make_chart_point(rng.normal_matrix(4, 1), Matrix::Zero(1, 2));
  CHECK(o_p_structure_check(zero).passed);
  for (int trial = 0; trial < 20; ++trial) {
    const OpStructureReport rep = o_p_structure_check(sample_chart_point(rng, 4, 3, 1));
    CHECK(rep.column_space_residual <= 1e-10);
    CHECK(rep.explicit_form_residual <= 1e-10);
    CHECK(rep.passed);
  }
  CHECK(o_p_structure_check(sample_chart_point(rng, 6, 4, 2)).passed);
}

TEST_CASE("mean_curvature: gauge invariance under kernel-basis mixing") {
  CounterRng rng(16, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const ChartPoint cp = sample_chart_point(rng, 6, 4, 2);
    const Matrix e = svd_rank(cp.a).kernel_basis;
    const Matrix mixed = e * rng.orthogonal(e.cols());
    const double base = mean_curvature(cp).components.norm();
    const double gauged = mean_curvature(cp, mixed).components.norm();
    CHECK(std::abs(base - gauged) <= 1e-10);
  }
}

TEST_CASE("mean_curvature: scaling a leaves the verdict unchanged") {
  CounterRng rng(17, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const ChartPoint cp = sample_chart_point(rng, 5, 3, 2);
    for (double t : {0.5, 3.0, 10.0}) {
      const ChartPoint scaled = make_chart_point(t * cp.a, cp.lambda);
      CHECK(mean_curvature(scaled).max_component() <= 1e-9);
    }
  }
}

TEST_CASE("chart_point_at: permuted patches reproduce the point and the verdict") {
  CounterRng rng(18, 0);
  for (int trial = 0; trial < 20; ++trial) {
    // Rank-2 point whose first two columns are dependent forces a permuted patch.
    Matrix x = rng.normal_matrix(5, 2) * rng.normal_matrix(2, 4);
    x.col(1) = 2.0 * x.col(0);
    const ChartPoint cp = chart_point_at(x, 2);
    CHECK(cp.permutation != std::vector<Eigen::Index>{0, 1, 2, 3});
    CHECK((chart_map(cp) - x).norm() <= 1e-10 * x.norm());
    const MeanCurvature mc = mean_curvature(cp);
    CHECK(mc.max_component() <= 1e-9);
    CHECK(mc.tangency_residual <= 1e-9);
  }
  CHECK_THROWS_AS(chart_point_at(Matrix::Identity(3, 2), 1), RankMismatch);
}
