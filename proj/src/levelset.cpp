#include "detvar/levelset.hpp"

#include "detvar/core/derivatives.hpp"
#include "detvar/core/rank.hpp"
#include "detvar/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace detvar::levelset {

namespace {

Matrix block(const Matrix& a, int alpha) {
  const auto n = a.cols();
  return a.middleRows(alpha == 0 ? 0 : 1, n);
}

double sign_of(int alpha, Eigen::Index n) { return (alpha == 1 && (n - 1) % 2 == 1) ? -1.0 : 1.0; }

void check_shape(const Matrix& a) {
  if (a.rows() != a.cols() + 1 || a.cols() < 2)
    throw ShapeMismatch("levelset: expected an (n+1) x n matrix with n >= 2");
}

double floor1(double x) { return std::max(1.0, x); }

}  // namespace

Vector flatten(const Matrix& a) {
  Vector x(a.size());
  for (Eigen::Index k = 0; k < a.rows(); ++k)
    for (Eigen::Index j = 0; j < a.cols(); ++j) x(flat_index(k, j, a.cols())) = a(k, j);
  return x;
}

Matrix unflatten(const Vector& x, Eigen::Index n) {
  Matrix a(n + 1, n);
  for (Eigen::Index k = 0; k <= n; ++k)
    for (Eigen::Index j = 0; j < n; ++j) a(k, j) = x(flat_index(k, j, n));
  return a;
}

double hadamard_scale(const Matrix& a, int alpha) {
  return block(a, alpha).rowwise().norm().prod();
}

ConstraintValues evaluate_constraints(const Matrix& a) {
  check_shape(a);
  const auto n = a.cols();
  const auto dim = n * n + n;
  ConstraintValues cv;
  cv.n = n;
  for (int alpha = 0; alpha < 2; ++alpha) {
    const Matrix m = block(a, alpha);
    const double sign = sign_of(alpha, n);
    const Eigen::Index offset = alpha == 0 ? 0 : 1;
    cv.chi[alpha] = sign * m.determinant();

    const Matrix cof = cofactor_matrix(m);
    cv.grad[alpha] = Vector::Zero(dim);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) cv.grad[alpha](flat_index(i + offset, j, n)) = sign * cof(i, j);

    const Matrix h = determinant_hessian(m);
    cv.hess[alpha] = Matrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
          for (Eigen::Index l = 0; l < n; ++l)
            cv.hess[alpha](flat_index(i + offset, j, n), flat_index(k + offset, l, n)) = sign * h(i * n + j, k * n + l);
  }
  return cv;
}

ConstraintValues evaluate_constraints_dual(const Matrix& a) {
  check_shape(a);
  const auto n = a.cols();
  const Vector x = flatten(a);
  ConstraintValues cv;
  cv.n = n;
  for (int alpha = 0; alpha < 2; ++alpha) {
    auto f = [n, alpha](const auto& v) { return constraint(v, n, alpha); };
    cv.chi[alpha] = constraint<double>(x, n, alpha);
    cv.grad[alpha] = gradient(f, x);
    cv.hess[alpha] = hessian(f, x);
  }
  return cv;
}

double constraint_route_discrepancy(const ConstraintValues& lhs, const ConstraintValues& rhs) {
  double worst = 0.0;
  for (int alpha = 0; alpha < 2; ++alpha) {
    worst = std::max(worst, std::abs(lhs.chi[alpha] - rhs.chi[alpha]));
    worst = std::max(worst, (lhs.grad[alpha] - rhs.grad[alpha]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (lhs.hess[alpha] - rhs.hess[alpha]).cwiseAbs().maxCoeff());
  }
  return worst;
}

MinorInverses minor_inverses(const Matrix& a) {
  check_shape(a);
  const auto n = a.cols();
  MinorInverses out;
  out.upper = Matrix::Zero(n, n + 1);
  out.lower = Matrix::Zero(n, n + 1);
  out.upper.leftCols(n) = block(a, 0).inverse();
  out.lower.rightCols(n) = block(a, 1).inverse();
  return out;
}

GramProjector tangent_projector(const Matrix& a, const ConstraintValues& cv) {
  check_shape(a);
  if (a.row(0).isZero(0.0) || a.row(a.rows() - 1).isZero(0.0))
    throw SingularGram("tangent_projector: first or last row vanishes");
  const auto dim = cv.grad[0].size();
  Matrix grads(dim, 2);
  grads << cv.grad[0], cv.grad[1];
  GramProjector gp;
  gp.M = grads.transpose() * grads;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gp.M);
  const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(1);
  if (!(hi > 0.0) || lo <= 1e-12 * hi) {
    std::ostringstream msg;
    msg << "tangent_projector: constraint Gram is singular (eigenvalues " << lo << ", " << hi
        << "); the point lies on a deeper stratum";
    throw SingularGram(msg.str());
  }
  gp.P = Matrix::Identity(dim, dim) - grads * gp.M.inverse() * grads.transpose();
  gp.idempotency = (gp.P * gp.P - gp.P).norm();
  gp.symmetry = (gp.P - gp.P.transpose()).norm();
  gp.annihilation = std::max((gp.P * cv.grad[0]).norm(), (gp.P * cv.grad[1]).norm()) /
                    floor1(std::max(cv.grad[0].norm(), cv.grad[1].norm()));
  // singular values of an idempotent P sit at 0 or 1; the eps-scaled SVD cutoff
  // miscounts when M is ill-conditioned, so split the spectrum at 1/2
  const Vector sv = Eigen::JacobiSVD<Matrix>(gp.P).singularValues();
  gp.rank = (sv.array() > 0.5).count();
  return gp;
}

GramProjector tangent_projector(const Matrix& a) { return tangent_projector(a, evaluate_constraints(a)); }

LevelSetCurvature levelset_mean_curvature(const Matrix& a) {
  const ConstraintValues cv = evaluate_constraints(a);
  const GramProjector gp = tangent_projector(a, cv);
  LevelSetCurvature out;
  for (int alpha = 0; alpha < 2; ++alpha) {
    out.trace[alpha] = (gp.P.array() * cv.hess[alpha].transpose().array()).sum();
    out.relative[alpha] = out.trace[alpha] / floor1(cv.hess[alpha].norm());
  }
  return out;
}

IdentityReport identity_suite(const Matrix& a, bool on_variety) {
  const ConstraintValues cv = evaluate_constraints(a);
  const auto n = cv.n;
  IdentityReport rep;
  auto add = [&rep](std::string name, double lhs, double rhs, double scale) {
    rep.add(std::move(name), lhs, rhs, scale);
  };
  const Matrix& h1 = cv.hess[0];
  const Matrix& h2 = cv.hess[1];
  const double tr12 = (h1 * h2).trace();

  for (int alpha = 0; alpha < 2; ++alpha) {
    const std::string tag = std::to_string(alpha + 1);
    const Matrix& h = cv.hess[alpha];
    const Vector& g = cv.grad[alpha];
    add("harmonic/chi" + tag, h.trace(), 0.0, h.norm());
    const double sq = (h * h).trace();
    add("self_contraction/chi" + tag, g.dot(h * g), 0.5 * cv.chi[alpha] * sq,
        g.squaredNorm() * h.norm() + std::abs(cv.chi[alpha]) * sq);

    const int other = 1 - alpha;
    const Vector& go = cv.grad[other];
    add("mixed_contraction/chi" + tag, go.dot(h * go), 0.5 * tr12 * cv.chi[other],
        go.squaredNorm() * h.norm() + std::abs(cv.chi[other] * tr12));

    // [ij] antisymmetry: d^2 chi / dA_Li dA_Kj = -d^2 chi / dA_Lj dA_Ki
    double anti = 0.0;
    for (Eigen::Index L = 0; L <= n; ++L)
      for (Eigen::Index K = 0; K <= n; ++K)
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j)
            anti = std::max(anti, std::abs(h(flat_index(L, i, n), flat_index(K, j, n)) +
                                           h(flat_index(L, j, n), flat_index(K, i, n))));
    add("antisymmetry/chi" + tag, anti, 0.0, h.norm());
  }

  // Cofactor-inverse forms, defined where the block is invertible.
  const MinorInverses inv = [&] {
    try {
      return minor_inverses(a);
    } catch (...) {
      return MinorInverses{};
    }
  }();
  for (int alpha = 0; alpha < 2 && inv.upper.size() > 0; ++alpha) {
    const double chi = cv.chi[alpha];
    if (std::abs(chi) <= 1e-8 * floor1(hadamard_scale(a, alpha))) continue;
    const Matrix& mi = alpha == 0 ? inv.upper : inv.lower;
    const std::string tag = std::to_string(alpha + 1);
    double g_err = 0.0, h_err = 0.0;
    for (Eigen::Index J = 0; J <= n; ++J)
      for (Eigen::Index i = 0; i < n; ++i) g_err = std::max(g_err, std::abs(cv.grad[alpha](flat_index(J, i, n)) - chi * mi(i, J)));
    for (Eigen::Index L = 0; L <= n; ++L)
      for (Eigen::Index K = 0; K <= n; ++K)
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j) {
            const double expected = chi * (mi(i, L) * mi(j, K) - mi(j, L) * mi(i, K));
            h_err = std::max(h_err, std::abs(cv.hess[alpha](flat_index(L, i, n), flat_index(K, j, n)) - expected));
          }
    add("cofactor_inverse/gradient/chi" + tag, g_err, 0.0, cv.grad[alpha].cwiseAbs().maxCoeff());
    add("cofactor_inverse/hessian/chi" + tag, h_err, 0.0, cv.hess[alpha].cwiseAbs().maxCoeff());
  }

  if (on_variety) {
    for (int al = 0; al < 2; ++al)
      for (int be = 0; be < 2; ++be)
        for (int ga = 0; ga < 2; ++ga) {
          const double v = cv.grad[al].dot(cv.hess[be] * cv.grad[ga]);
          add("contraction/" + std::to_string(al + 1) + std::to_string(be + 1) + std::to_string(ga + 1), v, 0.0,
              cv.grad[al].norm() * cv.hess[be].norm() * cv.grad[ga].norm());
        }
    // Symmetrised four-term contraction for alpha != gamma.
    for (int be = 0; be < 2; ++be) {
      const Vector& ga = cv.grad[0];
      const Vector& gc = cv.grad[1];
      const Matrix& h = cv.hess[be];
      double total = 0.0;
      for (Eigen::Index L = 0; L <= n; ++L)
        for (Eigen::Index K = 0; K <= n; ++K)
          for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
              const auto Li = flat_index(L, i, n), Kj = flat_index(K, j, n);
              const auto Lj = flat_index(L, j, n), Ki = flat_index(K, i, n);
              total += h(Li, Kj) * (ga(Li) * gc(Kj) + ga(Kj) * gc(Li) - ga(Lj) * gc(Ki) - ga(Ki) * gc(Lj));
            }
      add("four_term/chi" + std::to_string(be + 1), total, 0.0, 4.0 * ga.norm() * h.norm() * gc.norm());
    }
  }
  return rep;
}

RowCoefficients row_coefficients(const Matrix& a) {
  check_shape(a);
  const auto n = a.cols();
  const Matrix middle = a.middleRows(1, n - 1);  // rows 2..n
  if (svd_rank(middle.transpose()).rank < n - 1)
    throw ConventionFailure("row_coefficients: rows 2..n are linearly dependent");

  auto solve = [&](const Vector& target, const char* which) {
    const Vector coeff = middle.transpose().colPivHouseholderQr().solve(target);
    const double res = (middle.transpose() * coeff - target).norm();
    if (res > 1e-9 * floor1(target.norm())) {
      std::ostringstream msg;
      msg << "row_coefficients: " << which << " row is not a combination of rows 2..n (residual " << res << ")";
      throw ConventionFailure(msg.str());
    }
    return coeff;
  };

  RowCoefficients rc;
  rc.lambda = Vector::Zero(n + 1);
  rc.mu = Vector::Zero(n + 1);
  rc.lambda(0) = -1.0;
  rc.lambda.segment(1, n - 1) = solve(a.row(0).transpose(), "first");
  rc.mu(n) = -1.0;
  rc.mu.segment(1, n - 1) = solve(a.row(n).transpose(), "last");
  rc.combination_residual = std::max((rc.lambda.transpose() * a).norm(), (rc.mu.transpose() * a).norm());

  const ConstraintValues cv = evaluate_constraints(a);
  for (Eigen::Index k = 0; k <= n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double g1 = cv.grad[0](flat_index(k, j, n)) + rc.lambda(k) * cv.grad[0](flat_index(0, j, n));
      const double g2 = cv.grad[1](flat_index(k, j, n)) + rc.mu(k) * cv.grad[1](flat_index(n, j, n));
      rc.gradient_proportionality = std::max({rc.gradient_proportionality, std::abs(g1), std::abs(g2)});
    }
  }
  for (Eigen::Index j = 0; j < n; ++j)
    rc.boundary_gradient_match = std::max(
        rc.boundary_gradient_match, std::abs(cv.grad[0](flat_index(0, j, n)) - cv.grad[1](flat_index(n, j, n))));
  return rc;
}

RankOneReport gradient_rank_one(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeMismatch("gradient_rank_one: square matrix required");
  const Matrix cof = cofactor_matrix(m);
  RankOneReport rep;
  const double cmax = cof.cwiseAbs().maxCoeff();
  rep.row_factors = Vector::Zero(m.rows());
  rep.col_factors = Vector::Zero(m.cols());
  // cofactors are (n-1)-fold products of entries; below roundoff they vanish
  const double scale = std::pow(std::max(1.0, m.norm()), static_cast<double>(m.rows() - 1));
  if (cmax <= 1e-12 * scale) return rep;
  const RankResult rr = svd_rank(cof);
  rep.rank = rr.rank;
  const auto& s = rr.singular_values;
  rep.sigma_ratio = s.size() > 1 ? s(1) / s(0) : 0.0;

  const bool corner_ok = std::abs(cof(0, 0)) > 1e-8 * cmax;
  if (!corner_ok) cof.cwiseAbs().maxCoeff(&rep.pivot_row, &rep.pivot_col);
  const double pivot = cof(rep.pivot_row, rep.pivot_col);
  rep.row_factors = cof.col(rep.pivot_col) / pivot;
  rep.col_factors = cof.row(rep.pivot_row).transpose() / pivot;
  const Matrix rebuilt = pivot * rep.row_factors * rep.col_factors.transpose();
  rep.factorization_residual = (cof - rebuilt).cwiseAbs().maxCoeff() / cmax;
  return rep;
}

ConjectureEvidence conjecture_evidence(const Matrix& a) {
  const ConstraintValues cv = evaluate_constraints(a);
  ConjectureEvidence ev;
  ev.lhs = cv.grad[1].dot(cv.hess[0] * cv.grad[0]);
  ev.rhs = 0.25 * cv.chi[1] * (cv.hess[0] * cv.hess[1]).trace() + 0.25 * cv.chi[0] * (cv.hess[1] * cv.hess[1]).trace();
  ev.residual = ev.lhs - ev.rhs;
  const double scale = cv.grad[1].norm() * cv.hess[0].norm() * cv.grad[0].norm() +
                       std::abs(cv.chi[1]) * cv.hess[0].norm() * cv.hess[1].norm() +
                       std::abs(cv.chi[0]) * cv.hess[1].squaredNorm();
  ev.relative = std::abs(ev.residual) / floor1(scale);
  return ev;
}

Matrix sample_variety_point(CounterRng& rng, Eigen::Index n) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const ChartPoint cp = sample_chart_point(rng, n + 1, n, n - 1);
    const Matrix a = chart_map(cp);
    const ConstraintValues cv = evaluate_constraints(a);
    bool ok = true;
    for (int alpha = 0; alpha < 2; ++alpha)
      ok = ok && std::abs(cv.chi[alpha]) <= 1e-12 * floor1(hadamard_scale(a, alpha));
    if (ok) return a;
  }
  throw NumericalError("sample_variety_point: could not certify chi_1 = chi_2 = 0");
}

}  // namespace detvar::levelset
