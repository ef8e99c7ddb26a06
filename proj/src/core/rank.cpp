#include "detvar/core/rank.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace detvar {

RankResult svd_rank(const Matrix& m, double policy_factor) {
  if (!m.allFinite()) {
    std::ostringstream msg;
    msg << "svd_rank: non-finite entries in " << m.rows() << "x" << m.cols() << " input";
    throw NonFiniteInput(msg.str());
  }
  RankResult out;
  if (m.size() == 0) {
    out.left = Matrix::Identity(m.rows(), m.rows());
    out.right = Matrix::Identity(m.cols(), m.cols());
    out.kernel_basis = out.left;
    out.singular_values = Vector(0);
    return out;
  }

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  out.left = svd.matrixU();
  out.right = svd.matrixV();

  const double sigma_max = out.singular_values(0);
  const double dim = static_cast<double>(std::max(m.rows(), m.cols()));
  out.tolerance = sigma_max * dim * std::numeric_limits<double>::epsilon() * policy_factor;

  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values(i) > out.tolerance) ++rank;
  }
  out.rank = rank;
  out.kernel_basis = out.left.rightCols(m.rows() - rank);
  return out;
}

double svd_self_check(const Matrix& m, const RankResult& result) {
  const auto rows = m.rows();
  const auto cols = m.cols();
  const double u_err = (result.left.transpose() * result.left - Matrix::Identity(rows, rows)).norm();
  const double v_err = (result.right.transpose() * result.right - Matrix::Identity(cols, cols)).norm();
  Matrix sigma = Matrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < result.singular_values.size(); ++i) sigma(i, i) = result.singular_values(i);
  const double scale = result.singular_values.size() > 0 ? std::max(1.0, result.singular_values(0)) : 1.0;
  const double recon = (result.left * sigma * result.right.transpose() - m).norm() / scale;
  return std::max({u_err, v_err, recon});
}

double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Matrix kron(const Matrix& lhs, const Matrix& rhs) {
  Matrix out(lhs.rows() * rhs.rows(), lhs.cols() * rhs.cols());
  for (Eigen::Index i = 0; i < lhs.rows(); ++i)
    for (Eigen::Index j = 0; j < lhs.cols(); ++j)
      out.block(i * rhs.rows(), j * rhs.cols(), rhs.rows(), rhs.cols()) = lhs(i, j) * rhs;
  return out;
}

Matrix orthonormal_columns(const Matrix& m, double policy_factor) {
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  const RankResult rr = svd_rank(m, policy_factor);
  return rr.column_space();
}

}  // namespace detvar
