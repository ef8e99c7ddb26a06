#include "detvar/pseudo.hpp"

#include "detvar/core/rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace detvar::pseudo {

namespace {

constexpr double kZeroBand = 1e-10;
constexpr double kConditionBound = 1e6;

Vector parse_signs(const std::string& s, const char* which) {
  if (s.empty()) throw std::invalid_argument(std::string("form: empty ") + which + " sign string");
  Vector v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      v(static_cast<Eigen::Index>(i)) = 1.0;
    } else if (s[i] == '-') {
      v(static_cast<Eigen::Index>(i)) = -1.0;
    } else {
      throw std::invalid_argument(std::string("form: ") + which + " must consist of '+' and '-'");
    }
  }
  return v;
}

Matrix tangent_operator(const IndefiniteForm& form, const Matrix& jac) { return jac.transpose() * form.omega(); }

}  // namespace

Matrix IndefiniteForm::omega() const {
  Vector d(p() * q());
  for (Eigen::Index k = 0; k < q(); ++k)
    for (Eigen::Index i = 0; i < p(); ++i) d(i + p() * k) = eta(i) * zeta(k);
  return d.asDiagonal();
}

double IndefiniteForm::product(const Matrix& a, const Matrix& b) const {
  return (zeta.asDiagonal() * a.transpose() * eta.asDiagonal() * b).trace();
}

IndefiniteForm parse_form(const std::string& eta, const std::string& zeta) {
  return IndefiniteForm{parse_signs(eta, "eta"), parse_signs(zeta, "zeta")};
}

IndefiniteForm euclidean_form(Eigen::Index p, Eigen::Index q) { return IndefiniteForm{Vector::Ones(p), Vector::Ones(q)}; }

SubspaceSignature signature(const Matrix& gram, double reference) {
  SubspaceSignature s;
  if (gram.size() == 0) return s;
  const Matrix sym = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double band = kZeroBand * std::max({sym.norm(), reference, std::numeric_limits<double>::min()});
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double e = eig.eigenvalues()(i);
    if (std::abs(e) <= band) {
      ++s.null;
    } else if (e > 0) {
      ++s.plus;
    } else {
      ++s.minus;
    }
  }
  return s;
}

AmbientSignature ambient_signature(const IndefiniteForm& form) {
  const auto p1 = form.p1(), p2 = form.p2(), q1 = form.q1(), q2 = form.q2();
  AmbientSignature out;
  out.eigen = signature(form.omega());
  out.combinatorial = {p1 * q1 + p2 * q2, p1 * q2 + p2 * q1, 0};
  out.printed = {p1 * p2 + q1 * q2, p1 * q2 + p2 * q1, 0};
  out.combinatorial_matches = out.eigen == out.combinatorial;
  out.printed_matches = out.eigen == out.printed;
  return out;
}

DegeneracyScan degeneracy_scan(const IndefiniteForm& form, const ChartPoint& cp) {
  if (form.p() != cp.p() || form.q() != cp.q()) throw ShapeMismatch("degeneracy_scan: form and chart sizes differ");
  const Matrix jac = chart_jacobian(cp);
  DegeneracyScan scan;
  scan.metric = tangent_operator(form, jac) * jac;
  scan.determinant = scan.metric.size() ? scan.metric.determinant() : 1.0;
  scan.condition = scan.metric.size() ? condition_number(scan.metric) : 1.0;
  scan.inertia = signature(scan.metric);
  scan.degenerate = !scan.inertia.nondegenerate();
  return scan;
}

ZPrimeMembership zprime_membership(const IndefiniteForm& form, const Matrix& m, Eigen::Index r,
                                   Eigen::Index target_p1, Eigen::Index target_q1) {
  const RankResult rr = svd_rank(m);
  if (rr.rank != r) {
    std::ostringstream msg;
    msg << "zprime_membership: numerical rank " << rr.rank << " differs from declared r = " << r;
    throw RankMismatch(msg.str());
  }
  const Matrix u = rr.column_space(), v = rr.row_space();
  ZPrimeMembership out;
  out.column_space = signature(u.transpose() * form.eta.asDiagonal() * u, 1.0);
  out.row_space = signature(v.transpose() * form.zeta.asDiagonal() * v, 1.0);
  out.member = out.column_space.nondegenerate() && out.row_space.nondegenerate() &&
               out.column_space.plus == target_p1 && out.row_space.plus == target_q1;
  return out;
}

SubspaceSignature induced_signature_printed(const IndefiniteForm& form, Eigen::Index r, Eigen::Index pt1,
                                            Eigen::Index qt1) {
  const auto p1 = form.p1(), p2 = form.p2(), q1 = form.q1(), q2 = form.q2();
  const auto pt2 = r - pt1, qt2 = r - qt1;
  return {-pt1 * qt1 - pt2 * qt2 + p1 * qt1 + p2 * qt2 + pt1 * q1 + pt1 * q1,
          -pt1 * qt2 - pt2 * qt1 + p1 * qt2 + p2 * qt1 + pt1 * q2 + pt2 * q1, 0};
}

SubspaceSignature induced_signature_corrected(const IndefiniteForm& form, Eigen::Index r, Eigen::Index pt1,
                                              Eigen::Index qt1) {
  const auto p1 = form.p1(), p2 = form.p2(), q1 = form.q1(), q2 = form.q2();
  const auto pt2 = r - pt1, qt2 = r - qt1;
  return {-pt1 * qt1 - pt2 * qt2 + p1 * qt1 + p2 * qt2 + pt1 * q1 + pt2 * q2,
          -pt1 * qt2 - pt2 * qt1 + p1 * qt2 + p2 * qt1 + pt1 * q2 + pt2 * q1, 0};
}

PseudoMinimality pseudo_minimality(const IndefiniteForm& form, const ChartPoint& cp) {
  const DegeneracyScan scan = degeneracy_scan(form, cp);
  if (scan.degenerate || scan.condition > kConditionBound) {
    std::ostringstream msg;
    msg << "pseudo_minimality: induced metric is degenerate (condition " << scan.condition << ")";
    throw DegenerateMetric(msg.str(), scan.condition, scan.condition);
  }
  const auto p = cp.p(), q = cp.q(), n = cp.dim();
  PseudoMinimality out;
  out.inertia = scan.inertia;

  const Matrix g_inv = n > 0 ? Matrix(scan.metric.inverse()) : Matrix(0, 0);
  const std::vector<Matrix> d2 = chart_second_derivatives(cp);
  Vector trace = Vector::Zero(p * q);
  for (Eigen::Index mu = 0; mu < n; ++mu)
    for (Eigen::Index nu = 0; nu < n; ++nu) {
      const Matrix& h = d2[static_cast<std::size_t>(mu * n + nu)];
      trace += g_inv(mu, nu) * vec(h);
      out.scale += std::abs(g_inv(mu, nu)) * h.norm();
    }
  Vector normal = trace;
  if (n > 0) {
    const Matrix jac = chart_jacobian(cp);
    normal -= jac * (g_inv * (tangent_operator(form, jac) * trace));
  }
  out.mean_curvature = unvec(normal, p, q);
  out.residual = normal.norm() / std::max(1.0, out.scale);

  const Matrix x = chart_map(cp);
  const RankResult rr = svd_rank(x);
  const Matrix u = rr.column_space(), v = rr.row_space();
  out.column_space = signature(u.transpose() * form.eta.asDiagonal() * u, 1.0);
  out.row_space = signature(v.transpose() * form.zeta.asDiagonal() * v, 1.0);
  if (out.column_space.nondegenerate() && out.row_space.nondegenerate()) {
    const auto r = cp.r();
    out.formula_printed = induced_signature_printed(form, r, out.column_space.plus, out.row_space.plus);
    out.formula_corrected = induced_signature_corrected(form, r, out.column_space.plus, out.row_space.plus);
    out.printed_matches = out.formula_printed == out.inertia;
    out.corrected_matches = out.formula_corrected == out.inertia;
  }
  return out;
}

Matrix form_reflection(const IndefiniteForm& form, const Matrix& m, Eigen::Index r) {
  const RankResult rr = svd_rank(m);
  if (rr.rank != r) throw RankMismatch("form_reflection: numerical rank differs from declared r");
  const Matrix q = rr.column_space();
  const Matrix eta = form.eta.asDiagonal();
  const Matrix restricted = q.transpose() * eta * q;
  if (r > 0 && !signature(restricted, 1.0).nondegenerate()) {
    const double cond = condition_number(restricted);
    throw DegenerateMetric("form_reflection: column space is degenerate for eta", cond, cond);
  }
  const auto p = m.rows();
  if (r == 0) return -Matrix::Identity(p, p);
  return 2.0 * q * restricted.inverse() * q.transpose() * eta - Matrix::Identity(p, p);
}

PseudoNormalReversal pseudo_normal_reversal(const IndefiniteForm& form, const ChartPoint& cp) {
  const Matrix x = chart_map(cp);
  const Matrix b = form_reflection(form, x, cp.r());
  const Matrix eta = form.eta.asDiagonal();
  PseudoNormalReversal out;
  out.form_preservation = (b.transpose() * eta * b - eta).norm();
  out.fixed_point = (b * x - x).norm() / std::max(1.0, x.norm());

  const Matrix jac = chart_jacobian(cp);
  const auto p = cp.p(), q = cp.q();
  const Matrix normals = cp.dim() > 0 ? svd_rank(tangent_operator(form, jac)).right_kernel()
                                      : Matrix(Matrix::Identity(p * q, p * q));
  out.count = normals.cols();
  for (Eigen::Index k = 0; k < normals.cols(); ++k) {
    const Matrix w = unvec(normals.col(k), p, q);
    out.max_residual = std::max(out.max_residual, (b * w + w).norm());
  }
  return out;
}

}  // namespace detvar::pseudo
