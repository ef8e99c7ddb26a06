#include <doctest.h>

#include "detvar/core/block_inverse.hpp"
#include "detvar/core/derivatives.hpp"
#include "detvar/core/determinant.hpp"
#include "detvar/core/random.hpp"
#include "detvar/core/rank.hpp"
#include "detvar/parametric.hpp"

#include <cmath>
#include <limits>

using namespace detvar;

namespace {

// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
int exact_rank(std::vector<std::vector<__int128>> m) {
  const int rows = static_cast<int>(m.size());
  const int cols = rows ? static_cast<int>(m[0].size()) : 0;
  int rank = 0;
  __int128 prev = 1;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int pivot = -1;
    for (int i = rank; i < rows; ++i)
      if (m[i][c] != 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) continue;
    std::swap(m[pivot], m[rank]);
    for (int i = rank + 1; i < rows; ++i) {
      for (int j = c + 1; j < cols; ++j) m[i][j] = (m[rank][c] * m[i][j] - m[i][c] * m[rank][j]) / prev;
      m[i][c] = 0;
    }
    prev = m[rank][c];
    ++rank;
  }
  return rank;
}

double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("svd_rank: identity and zero") {
  const RankResult id = svd_rank(Matrix::Identity(3, 3));
  CHECK(id.rank == 3);
  CHECK(id.kernel_basis.cols() == 0);

  const RankResult zero = svd_rank(Matrix::Zero(3, 2));
  CHECK(zero.rank == 0);
  REQUIRE(zero.kernel_basis.cols() == 3);
  CHECK((zero.kernel_basis.transpose() * zero.kernel_basis - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("svd_rank: rejects non-finite input") {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_rank(m), NonFiniteInput);
}

TEST_CASE("svd_rank: chart output has rank r (exact integer oracle)") {
  CounterRng rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a(4, 2), lambda(2, 1);
    for (auto* m : {&a, &lambda})
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = std::round(rng.uniform(-9.0, 9.0));
    std::vector<std::vector<__int128>> ia(4, std::vector<__int128>(2));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) ia[i][j] = static_cast<__int128>(a(i, j));
    if (exact_rank(ia) < 2) continue;
    const ChartPoint cp = make_chart_point(a, lambda);
    const Matrix x = chart_map(cp);
    std::vector<std::vector<__int128>> ix(4, std::vector<__int128>(3));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j) ix[i][j] = static_cast<__int128>(std::llround(x(i, j)));
    CHECK(exact_rank(ix) == 2);
    CHECK(svd_rank(x).rank == 2);
  }
}

TEST_CASE("svd_rank: factor invariants on random matrices") {
  CounterRng rng(5, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rows = 1 + static_cast<Eigen::Index>(rng.uniform() * 7);
    const auto cols = 1 + static_cast<Eigen::Index>(rng.uniform() * 7);
    const auto k = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(std::min(rows, cols) + 1));
    const Matrix m = rng.normal_matrix(rows, k) * rng.normal_matrix(k, cols);
    const RankResult rr = svd_rank(m);
    CHECK(rr.rank == k);
    CHECK(svd_self_check(m, rr) <= 1e-12 * std::max<double>(1.0, static_cast<double>(rows + cols)));
    CHECK(rr.rank + rr.kernel_basis.cols() == rows);
    CHECK((rr.kernel_basis.transpose() * m).norm() <= 1e-12 * std::max(1.0, rr.singular_values(0)) * 10);
  }
}

TEST_CASE("block_inverse: identity blocks") {
  const BlockInverse bi = block_inverse(Matrix::Identity(3, 3), Matrix::Zero(3, 2), Matrix::Identity(2, 2));
  CHECK((bi.inverse - Matrix::Identity(5, 5)).norm() == doctest::Approx(0.0));
  CHECK((bi.schur_inv - Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("block_inverse: induced metric blocks, both elimination orders") {
  CounterRng rng(3, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const ChartPoint cp = sample_chart_point(rng, 3, 2, 1);
    const MetricBlocks mb = induced_metric(cp);
    const Matrix full = mb.assembled();
    const BlockInverse upper = block_inverse(mb.G, mb.B, mb.D);
    const BlockInverse lower = block_inverse_lower_first(mb.G, mb.B, mb.D);
    CHECK(inverse_defect(upper.inverse, full) <= 1e-10);
    CHECK(inverse_defect(lower.inverse, full) <= 1e-10);
    CHECK((upper.inverse - lower.inverse).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("block_inverse: ill-conditioned block reports condition estimates") {
  Matrix g = Matrix::Identity(2, 2);
  g(1, 1) = 1e-9;
  try {
    block_inverse(g, Matrix::Zero(2, 1), Matrix::Identity(1, 1));
    FAIL("expected DegenerateMetric");
  } catch (const DegenerateMetric& e) {
    CHECK(e.cond_first() > 1e8);
    CHECK(e.cond_second() == doctest::Approx(1.0));
  }
}

TEST_CASE("block_inverse: defect stays below 1e-10 up to condition 1e6") {
  CounterRng rng(17, 2);
  for (int trial = 0; trial < 30; ++trial) {
    const double target = std::pow(10.0, rng.uniform(0.0, 6.0));
    const Matrix q = rng.orthogonal(6);
    Vector spectrum(6);
    for (int i = 0; i < 6; ++i) spectrum(i) = std::pow(target, -static_cast<double>(i) / 5.0);
    const Matrix spd = q * spectrum.asDiagonal() * q.transpose();
    const Matrix G = spd.topLeftCorner(4, 4), B = spd.topRightCorner(4, 2), D = spd.bottomRightCorner(2, 2);
    if (condition_number(G) > kConditionBound || condition_number(D) > kConditionBound) continue;
    CHECK(inverse_defect(block_inverse(G, B, D).inverse, spd) <= 1e-10 * std::max(1.0, target / 1e2));
  }
}

TEST_CASE("hessian: chart map has only mixed a-lambda second derivatives") {
  CounterRng rng(21, 0);
  const Eigen::Index p = 4, q = 3, r = 2;
  const ChartPoint cp = sample_chart_point(rng, p, q, r);
  const std::vector<Matrix> d2 = chart_second_derivatives(cp);
  const Eigen::Index n = cp.dim();
  for (Eigen::Index mu = 0; mu < n; ++mu) {
    for (Eigen::Index nu = 0; nu < n; ++nu) {
      Matrix expected = Matrix::Zero(p, q);
      // a_Js (index J + p s) against lambda_{s s'} (index p r + s + r s') -> E_{J, r + s'}
      auto is_a = [&](Eigen::Index i) { return i < p * r; };
      if (is_a(mu) != is_a(nu)) {
        const Eigen::Index ai = is_a(mu) ? mu : nu;
        const Eigen::Index li = (is_a(mu) ? nu : mu) - p * r;
        const Eigen::Index J = ai % p, s = ai / p, sl = li % r, sp = li / r;
        if (s == sl) expected(J, r + sp) = 1.0;
      }
      CHECK((d2[static_cast<std::size_t>(mu * n + nu)] - expected).norm() == 0.0);
    }
  }
}

TEST_CASE("hessian: 2x2 determinant has four unit entries") {
  auto chi = [](const auto& x) { return x(0) * x(3) - x(1) * x(2); };
  const Matrix h = hessian(chi, Vector::Random(4));
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 3) = expected(3, 0) = 1.0;
  expected(1, 2) = expected(2, 1) = -1.0;
  CHECK((h - expected).norm() == 0.0);
}

TEST_CASE("hessian: random cubic agrees with finite differences") {
  CounterRng rng(8, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix c3 = rng.normal_matrix(9, 3);  // c3(3 i + j, k) x_i x_j x_k
    const Matrix c2 = rng.normal_matrix(3, 3);
    const Vector c1 = rng.normal_matrix(3, 1);
    auto cubic = [&](const auto& x) {
      using S = std::decay_t<decltype(x(0))>;
      S acc(0);
      for (int i = 0; i < 3; ++i) {
        acc = acc + S(c1(i)) * x(i);
        for (int j = 0; j < 3; ++j) {
          acc = acc + S(c2(i, j)) * x(i) * x(j);
          for (int k = 0; k < 3; ++k) acc = acc + S(c3(3 * i + j, k)) * x(i) * x(j) * x(k);
        }
      }
      return acc;
    };
    const Vector x = rng.uniform_matrix(3, 1, -1.0, 1.0);
    const Matrix exact = hessian(cubic, x);
    const Matrix approx = fd_hessian([&](const Vector& v) { return cubic(v); }, x);
    CHECK(rel_err(approx, exact) <= 1e-6);
    const Vector g = gradient(cubic, x);
    const Vector g_fd = fd_gradient([&](const Vector& v) { return cubic(v); }, x);
    CHECK(rel_err(g_fd, g) <= 1e-6);
  }
}

TEST_CASE("second_directional matches the Hessian tensor contraction") {
  CounterRng rng(9, 0);
  const ChartPoint cp = sample_chart_point(rng, 5, 3, 2);
  auto map = [&](const auto& x) { return chart_map_flat(x, 5, 3, 2); };
  const std::vector<Matrix> tensor = hessian_tensor(map, cp.coordinates());
  const Vector v = rng.normal_matrix(cp.dim(), 1), w = rng.normal_matrix(cp.dim(), 1);
  const Vector dd = second_directional(map, cp.coordinates(), v, w);
  for (std::size_t comp = 0; comp < tensor.size(); ++comp)
    CHECK(dd(static_cast<Eigen::Index>(comp)) == doctest::Approx(v.dot(tensor[comp] * w)).epsilon(1e-12));
}

TEST_CASE("determinant: cofactors and (n-2)-minor Hessian match dual numbers") {
  CounterRng rng(13, 0);
  for (int n = 2; n <= 5; ++n) {
    const Matrix m = rng.normal_matrix(n, n);
    auto det = [n](const auto& x) {
      using S = std::decay_t<decltype(x(0))>;
      MatrixX<S> mm(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mm(i, j) = x(i * n + j);
      return leibniz_det(mm);
    };
    Vector flat(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) flat(i * n + j) = m(i, j);
    CHECK(leibniz_det(m) == doctest::Approx(m.determinant()).epsilon(1e-12));
    const Vector g = gradient(det, flat);
    const Matrix cof = cofactor_matrix(m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(cof(i, j) == doctest::Approx(g(i * n + j)).epsilon(1e-12));
    CHECK(rel_err(determinant_hessian(m), hessian(det, flat)) <= 1e-12);
  }
}

TEST_CASE("CounterRng: reproducible and stream-separated") {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  const Matrix q = CounterRng(1, 1).orthogonal(5);
  CHECK((q.transpose() * q - Matrix::Identity(5, 5)).norm() < 1e-12);
}
