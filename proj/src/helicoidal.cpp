#include "detvar/helicoidal.hpp"

#include "detvar/core/rank.hpp"
#include "detvar/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace detvar::helicoidal {

namespace {

double floor1(double x) { return std::max(1.0, x); }

void require_rank(const RankResult& rr, Eigen::Index r, const char* where) {
  if (rr.rank != r) {
    std::ostringstream msg;
    msg << where << ": numerical rank " << rr.rank << " differs from declared r = " << r;
    throw RankMismatch(msg.str());
  }
}

Matrix random_rank_matrix(CounterRng& rng, Eigen::Index p, Eigen::Index q, Eigen::Index k) {
  if (k == 0) return Matrix::Zero(p, q);
  return rng.normal_matrix(p, k) * rng.normal_matrix(k, q);
}

}  // namespace

ReflectionIsometry reflection(const Matrix& x, Eigen::Index r) {
  const RankResult rr = svd_rank(x);
  require_rank(rr, r, "reflection");
  const auto p = x.rows();
  ReflectionIsometry out;
  out.Q = rr.column_space();
  out.B = 2.0 * out.Q * out.Q.transpose() - Matrix::Identity(p, p);
  const Matrix id = Matrix::Identity(p, p);
  out.orthogonality = (out.B.transpose() * out.B - id).norm();
  out.involution = (out.B * out.B - id).norm();
  out.fixed_point = (out.B * x - x).norm() / floor1(x.norm());
  return out;
}

IsometryReport isometry_check(const Matrix& a, Eigen::Index q, CounterRng& rng, int samples, double tol) {
  IsometryReport rep;
  const auto p = a.cols();
  for (int i = 0; i < samples; ++i) {
    const Matrix x = rng.normal_matrix(p, q);
    const Matrix y = rng.normal_matrix(p, q);
    const double lhs = ((a * x).transpose() * (a * y)).trace();
    const double rhs = (x.transpose() * y).trace();
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs) / (x.norm() * y.norm()));
  }
  rep.passed = rep.max_residual <= tol;
  return rep;
}

Matrix tangent_basis(const Matrix& x, Eigen::Index r) {
  const ChartPoint cp = chart_point_at(x, r);
  return orthonormal_columns(chart_jacobian(cp));
}

Matrix normal_basis(const Matrix& x, Eigen::Index r) {
  const ChartPoint cp = chart_point_at(x, r);
  return orthonormal_columns(normal_frame(cp).columns());
}

Membership tangent_membership(const Matrix& x, Eigen::Index r, const Matrix& y, double tol) {
  const Matrix t = tangent_basis(x, r);
  const Vector v = vec(y);
  Membership m;
  const double norm = v.norm();
  if (norm > 0.0) m.residual = (v - t * (t.transpose() * v)).norm() / norm;
  m.member = m.residual <= tol;
  return m;
}

TangentSetSample sample_tangent_set(const Matrix& x, Eigen::Index r, CounterRng& rng, int count) {
  const RankResult rr = svd_rank(x);
  require_rank(rr, r, "sample_tangent_set");
  const Matrix q = rr.column_space();
  const Matrix v = rr.row_space();
  const auto p = x.rows(), cols = x.cols();
  const Matrix pc = Matrix::Identity(p, p) - q * q.transpose();
  const Matrix pr = Matrix::Identity(cols, cols) - v * v.transpose();
  TangentSetSample out;
  for (int i = 0; i < count; ++i) {
    const bool column_type = i % 2 == 0;
    const Matrix y = column_type ? Matrix(q * rng.normal_matrix(r, cols)) : Matrix(rng.normal_matrix(p, r) * v.transpose());
    const double norm = y.norm();
    const double res = norm > 0.0 ? (column_type ? (pc * y).norm() : (y * pr).norm()) / norm : 0.0;
    out.members.push_back(y);
    out.inclusion_residuals.push_back(res);
  }
  return out;
}

NormalReversal normal_reversal(const Matrix& x, Eigen::Index r, const Matrix& b) {
  const Matrix nb = normal_basis(x, r);
  const Matrix q = svd_rank(x).column_space();
  NormalReversal rep;
  rep.count = nb.cols();
  for (Eigen::Index k = 0; k < nb.cols(); ++k) {
    const Matrix w = unvec(nb.col(k), x.rows(), x.cols());
    rep.max_residual = std::max(rep.max_residual, (b * w + w).norm());
    rep.column_leakage = std::max(rep.column_leakage, (q.transpose() * w).norm());
  }
  return rep;
}

NormalReversal normal_reversal(const Matrix& x, Eigen::Index r) { return normal_reversal(x, r, reflection(x, r).B); }

HelicoidalCertificate certify_isometry(const Matrix& x, Eigen::Index r, const Matrix& b, CounterRng& rng,
                                       const CertificateTolerances& tol, int rank_samples) {
  const RankResult rr = svd_rank(x);
  require_rank(rr, r, "helicoidal_certificate");
  const auto p = x.rows(), q = x.cols();
  if (b.rows() != p || b.cols() != p) throw ShapeMismatch("helicoidal_certificate: B must be p x p");
  const Matrix id = Matrix::Identity(p, p);

  HelicoidalCertificate cert;
  cert.fixed_point = (b * x - x).norm() / floor1(x.norm());
  cert.orthogonality = (b.transpose() * b - id).norm();
  cert.involution = (b * b - id).norm();
  cert.symmetry = (b - b.transpose()).norm();
  cert.determinant_error = std::abs(b.determinant() - ((p - r) % 2 ? -1.0 : 1.0));

  Eigen::EigenSolver<Matrix> es(b);
  std::vector<double> re;
  double imag = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    re.push_back(es.eigenvalues()(i).real());
    imag = std::max(imag, std::abs(es.eigenvalues()(i).imag()));
  }
  std::sort(re.begin(), re.end());
  cert.spectrum_error = imag;
  for (Eigen::Index i = 0; i < p; ++i)
    cert.spectrum_error = std::max(cert.spectrum_error, std::abs(re[static_cast<std::size_t>(i)] - (i < p - r ? -1.0 : 1.0)));

  cert.rank_samples = rank_samples;
  for (int i = 0; i < rank_samples; ++i) {
    const Eigen::Index k = i % (std::min(p, q) + 1);
    const Matrix y = random_rank_matrix(rng, p, q, k);
    if (svd_rank(b * y).rank != svd_rank(y).rank) ++cert.rank_failures;
  }

  cert.normal_reversal = normal_reversal(x, r, b).max_residual;
  const MeanCurvature mc = mean_curvature(chart_point_at(x, r));
  cert.mean_curvature = mc.ambient_vector.norm();
  cert.mean_curvature_reversal = (b * mc.ambient_vector + mc.ambient_vector).norm();

  auto clause = [&cert](const char* name, bool ok) {
    if (!ok) cert.failed.emplace_back(name);
  };
  clause("fixed_point", cert.fixed_point <= tol.isometry);
  clause("orthogonality", cert.orthogonality <= tol.isometry);
  clause("involution", cert.involution <= tol.isometry);
  clause("spectrum", cert.symmetry <= tol.spectrum && cert.determinant_error <= tol.spectrum &&
                         cert.spectrum_error <= tol.spectrum);
  clause("rank_preservation", cert.rank_failures == 0);
  clause("normal_reversal", cert.normal_reversal <= tol.reversal);
  return cert;
}

HelicoidalCertificate helicoidal_certificate(const Matrix& x, Eigen::Index r, CounterRng& rng,
                                             const CertificateTolerances& tol, int rank_samples) {
  return certify_isometry(x, r, reflection(x, r).B, rng, tol, rank_samples);
}

}  // namespace detvar::helicoidal
