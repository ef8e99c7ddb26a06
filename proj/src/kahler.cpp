#include "detvar/kahler.hpp"

#include "detvar/core/derivatives.hpp"
#include "detvar/core/rank.hpp"

#include <cmath>

namespace detvar::kahler {

namespace {

double floor1(double x) { return std::max(1.0, x); }

}  // namespace

Vector ComplexChartPoint::coordinates() const {
  Vector c(8);
  c << x, y, lambda, mu;
  return c;
}

Vector ComplexChartPoint::e1() const {
  Vector e(6);
  e << x, y;
  return e;
}

Vector ComplexChartPoint::e2() const {
  Vector e(6);
  e << -y, x;
  return e;
}

ComplexMatrix ComplexChartPoint::matrix() const {
  ComplexMatrix z(3, 2);
  const std::complex<double> c(lambda, mu);
  for (int i = 0; i < 3; ++i) {
    z(i, 0) = {x(i), y(i)};
    z(i, 1) = c * z(i, 0);
  }
  return z;
}

ComplexChartPoint make_complex_chart_point(const Eigen::Vector3d& x, const Eigen::Vector3d& y, double lambda,
                                           double mu) {
  if (!x.allFinite() || !y.allFinite() || !std::isfinite(lambda) || !std::isfinite(mu))
    throw InvalidChartPoint("complex chart point: non-finite entry");
  if (x.squaredNorm() + y.squaredNorm() == 0.0) throw InvalidChartPoint("complex chart point: (x, y) = 0");
  return ComplexChartPoint{x, y, lambda, mu};
}

ComplexChartPoint sample_complex_chart_point(CounterRng& rng) {
  const Eigen::Vector3d x = rng.normal_matrix(3, 1);
  const Eigen::Vector3d y = rng.normal_matrix(3, 1);
  const double lambda = rng.uniform(-2.0, 2.0);
  const double mu = rng.uniform(-2.0, 2.0);
  return make_complex_chart_point(x, y, lambda, mu);
}

ComplexChartGeometry complex_chart_geometry(const ComplexChartPoint& cp) {
  auto chart = [](const auto& c) { return complex_chart_flat(c); };
  const Vector c = cp.coordinates();
  const double lam = cp.lambda, mu = cp.mu;
  const double s = 1.0 + lam * lam + mu * mu;
  const double r2 = cp.x.squaredNorm() + cp.y.squaredNorm();
  const Vector e1 = cp.e1(), e2 = cp.e2();

  ComplexChartGeometry g;
  g.jacobian = jacobian(chart, c);
  g.metric = g.jacobian.transpose() * g.jacobian;

  Matrix b(6, 2);
  b.col(0) = lam * e1 - mu * e2;
  b.col(1) = lam * e2 + mu * e1;
  g.metric_closed = Matrix::Zero(8, 8);
  g.metric_closed.topLeftCorner(6, 6) = s * Matrix::Identity(6, 6);
  g.metric_closed.topRightCorner(6, 2) = b;
  g.metric_closed.bottomLeftCorner(2, 6) = b.transpose();
  g.metric_closed.bottomRightCorner(2, 2) = r2 * Matrix::Identity(2, 2);
  g.metric_discrepancy = (g.metric - g.metric_closed).cwiseAbs().maxCoeff();
  g.off_block_orthogonality = std::abs(b.col(0).dot(b.col(1)));
  g.off_block_length_gap = std::abs(b.col(0).norm() - b.col(1).norm());

  g.inverse = g.metric.inverse();
  const Matrix gb = g.metric.topRightCorner(6, 2);
  const Matrix schur = g.metric.bottomRightCorner(2, 2) - gb.transpose() * gb / s;
  g.schur_discrepancy = (schur.inverse() - (s / r2) * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff();
  g.off_inverse_discrepancy = (g.inverse.topRightCorner(6, 2) + b / r2).cwiseAbs().maxCoeff();

  const std::vector<Matrix> d2 = hessian_tensor(chart, c);
  auto pattern = [&](bool printed) {
    double worst = 0.0;
    for (int k = 0; k < 12; ++k) {
      Matrix expected = Matrix::Zero(8, 8);
      const int i = k % 3;
      if (k >= 6 && k < 9) {  // Re col 2: lambda x_i - mu y_i
        expected(i, 6) = expected(6, i) = 1.0;
        expected(3 + i, 7) = expected(7, 3 + i) = -1.0;
      } else if (k >= 9) {  // Im col 2: lambda y_i + mu x_i
        expected(i, 7) = expected(7, i) = 1.0;
        if (printed) {
          expected(3 + i, 7) = expected(7, 3 + i) = 1.0;
        } else {
          expected(3 + i, 6) = expected(6, 3 + i) = 1.0;
        }
      }
      worst = std::max(worst, (d2[static_cast<std::size_t>(k)] - expected).cwiseAbs().maxCoeff());
    }
    return worst;
  };
  g.second_derivative_pattern = pattern(false);
  g.printed_pattern_discrepancy = pattern(true);

  // N spans the complement of {E1, E2} in the last six entries; the first six
  // entries are fixed by orthogonality to d_x and d_y.
  Matrix e(6, 2);
  e << e1, e2;
  const Matrix kernel = svd_rank(e).kernel_basis;  // 6 x 4
  Matrix raw(12, kernel.cols()), padded = Matrix::Zero(12, kernel.cols());
  for (Eigen::Index a = 0; a < kernel.cols(); ++a) {
    const Vector n1 = kernel.col(a).head(3), n2 = kernel.col(a).tail(3);
    raw.col(a) << -(lam * n1 + mu * n2), mu * n1 - lam * n2, n1, n2;
    padded.col(a).tail(6) = kernel.col(a);
  }
  g.normals = orthonormal_columns(raw);
  g.normal_tangency = (g.jacobian.transpose() * g.normals).cwiseAbs().maxCoeff();
  g.padded_normal_tangency = (g.jacobian.transpose() * padded).norm();
  g.normal_e_orthogonality = (e.transpose() * g.normals.bottomRows(6)).cwiseAbs().maxCoeff();

  Vector trace(12);
  for (int k = 0; k < 12; ++k) trace(k) = (g.inverse.array() * d2[static_cast<std::size_t>(k)].array()).sum();
  g.mean_curvature = g.normals.transpose() * trace;
  return g;
}

Vector flatten_complex(const ComplexMatrix& z) {
  const Eigen::Index nn = z.size();
  Vector w(2 * nn);
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      w(i + z.rows() * j) = z(i, j).real();
      w(nn + i + z.rows() * j) = z(i, j).imag();
    }
  return w;
}

ComplexMatrix unflatten_complex(const Vector& w, Eigen::Index n) {
  ComplexMatrix z(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = {w(i + n * j), w(n * n + i + n * j)};
  return z;
}

TwinHarmonicValues twin_harmonics(const Vector& w, Eigen::Index n) {
  if (w.size() != 2 * n * n) throw ShapeMismatch("twin_harmonics: expected a point of R^{2n^2}");
  auto fu = [n](const auto& x) { return complex_determinant(x, n).first; };
  auto fv = [n](const auto& x) { return complex_determinant(x, n).second; };
  TwinHarmonicValues th;
  th.n = n;
  std::tie(th.u, th.v) = complex_determinant<double>(w, n);
  th.grad_u = gradient(fu, w);
  th.grad_v = gradient(fv, w);
  th.hess_u = hessian(fu, w);
  th.hess_v = hessian(fv, w);
  th.scale = std::pow(floor1(w.norm()), static_cast<double>(n));
  return th;
}

namespace {

std::optional<double> rho_from(double value, const Vector& g, const Matrix& h, double scale) {
  if (std::abs(value) <= 1e-6 * scale) return std::nullopt;
  return g.dot(h * g) / value;
}

}  // namespace

std::optional<double> twin_rho(const TwinHarmonicValues& th) {
  if (auto r = rho_from(th.u, th.grad_u, th.hess_u, th.scale)) return r;
  return rho_from(th.v, th.grad_v, th.hess_v, th.scale);
}

TwinHarmonicReport twin_harmonic_suite(const Vector& w, Eigen::Index n) {
  const TwinHarmonicValues th = twin_harmonics(w, n);
  const Vector& gu = th.grad_u;
  const Vector& gv = th.grad_v;
  const Matrix& hu = th.hess_u;
  const Matrix& hv = th.hess_v;
  TwinHarmonicReport rep;
  IdentityReport& id = rep.identities;

  const double g2 = gu.squaredNorm() + gv.squaredNorm();
  id.add("gradient_norms", gu.squaredNorm(), gv.squaredNorm(), g2);
  id.add("gradient_orthogonality", gu.dot(gv), 0.0, g2);
  id.add("harmonic/u", hu.trace(), 0.0, hu.norm());
  id.add("harmonic/v", hv.trace(), 0.0, hv.norm());

  const double hg = hu.norm() * gu.norm() + hv.norm() * gv.norm();
  id.add("differentiated/norms", (hu * gu - hv * gv).norm(), 0.0, hg);
  id.add("differentiated/orthogonality", (hv * gu + hu * gv).norm(), 0.0, hg);

  rep.rho_u = rho_from(th.u, gu, hu, th.scale);
  rep.rho_v = rho_from(th.v, gv, hv, th.scale);
  rep.rho = rep.rho_u ? *rep.rho_u : (rep.rho_v ? *rep.rho_v : 0.0);
  if (rep.rho_u && rep.rho_v)
    id.add("rho_agreement", *rep.rho_u, *rep.rho_v, std::max(std::abs(*rep.rho_u), std::abs(*rep.rho_v)));

  const double rho = rep.rho, u = th.u, v = th.v;
  const double cscale = g2 * std::max(hu.norm(), hv.norm()) + std::abs(rho) * (std::abs(u) + std::abs(v));
  auto contraction = [&](const char* name, const Vector& a, const Matrix& h, const Vector& b, double rhs) {
    id.add(std::string("contraction/") + name, a.dot(h * b), rhs, cscale);
  };
  contraction("v_vv_u", gv, hv, gu, rho * u);
  contraction("u_uu_u", gu, hu, gu, rho * u);
  contraction("u_uu_v", gu, hu, gv, rho * v);
  contraction("v_vv_v", gv, hv, gv, rho * v);
  contraction("u_vv_u", gu, hv, gu, -rho * v);
  contraction("v_uu_u", gv, hu, gu, rho * v);
  contraction("v_uu_v", gv, hu, gv, -rho * u);
  contraction("u_vv_v", gu, hv, gv, rho * u);

  Matrix grads(gu.size(), 2);
  grads << gu, gv;
  const Matrix m = grads.transpose() * grads;
  rep.conformal_gram = (m - gu.squaredNorm() * Matrix::Identity(2, 2)).norm() / floor1(gu.squaredNorm());
  return rep;
}

double rho_homogeneity(const Vector& w, Eigen::Index n, double t) {
  const auto base = twin_rho(twin_harmonics(w, n));
  const auto scaled = twin_rho(twin_harmonics(t * w, n));
  if (!base || !scaled) throw NumericalError("rho_homogeneity: rho undefined at the point");
  const double expected = std::pow(t, static_cast<double>(2 * n - 4)) * *base;
  return std::abs(*scaled - expected) / floor1(std::abs(expected));
}

ZetaMinimality zeta_minimality(const ComplexMatrix& z) {
  const Eigen::Index n = z.rows();
  if (z.cols() != n || n < 2) throw ShapeMismatch("zeta_minimality: square matrix with n >= 2 required");
  const TwinHarmonicValues th = twin_harmonics(flatten_complex(z), n);
  if (std::hypot(th.u, th.v) > 1e-12 * th.scale)
    throw InvalidChartPoint("zeta_minimality: det Z does not vanish");
  const double g2 = th.grad_u.squaredNorm();
  const double gscale = std::pow(floor1(z.norm()), static_cast<double>(2 * (n - 1)));
  if (g2 <= 1e-20 * gscale) throw SingularGram("zeta_minimality: grad u vanishes; Z lies on a deeper stratum");

  Matrix grads(th.grad_u.size(), 2);
  grads << th.grad_u, th.grad_v;
  const Matrix m = grads.transpose() * grads;
  const Matrix p = Matrix::Identity(grads.rows(), grads.rows()) - grads * m.inverse() * grads.transpose();
  ZetaMinimality out;
  out.trace_u = (p.array() * th.hess_u.array()).sum() / floor1(th.hess_u.norm());
  out.trace_v = (p.array() * th.hess_v.array()).sum() / floor1(th.hess_v.norm());
  out.conformal_gram = (m - g2 * Matrix::Identity(2, 2)).norm() / floor1(g2);
  return out;
}

ComplexMatrix sample_zeta_point(CounterRng& rng, Eigen::Index n) {
  auto complex_normal = [&rng](Eigen::Index rows, Eigen::Index cols) {
    ComplexMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double re = rng.normal();
        m(i, j) = {re, rng.normal()};
      }
    return m;
  };
  return complex_normal(n, n - 1) * complex_normal(n - 1, n);
}

}  // namespace detvar::kahler
