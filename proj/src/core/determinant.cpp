#include "detvar/core/determinant.hpp"

namespace detvar {

namespace {

double det(const Matrix& m) { return m.size() == 0 ? 1.0 : m.determinant(); }

double sign(Eigen::Index k) { return k % 2 == 0 ? 1.0 : -1.0; }

}  // namespace

Matrix delete_rows_cols(const Matrix& m, std::vector<Eigen::Index> rows, std::vector<Eigen::Index> cols) {
  std::sort(rows.begin(), rows.end());
  std::sort(cols.begin(), cols.end());
  std::vector<Eigen::Index> keep_r, keep_c;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (!std::binary_search(rows.begin(), rows.end(), i)) keep_r.push_back(i);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (!std::binary_search(cols.begin(), cols.end(), j)) keep_c.push_back(j);
  return m(keep_r, keep_c);
}

Matrix cofactor_matrix(const Matrix& m) {
  const auto n = m.rows();
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = sign(i + j) * det(delete_rows_cols(m, {i}, {j}));
  return out;
}

Matrix determinant_hessian(const Matrix& m) {
  const auto n = m.rows();
  Matrix out = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == i) continue;
        for (Eigen::Index l = 0; l < n; ++l) {
          if (l == j) continue;
          // Position of m_kl inside minor_ij, then expand that minor along it.
          const Eigen::Index kk = k - (k > i ? 1 : 0);
          const Eigen::Index ll = l - (l > j ? 1 : 0);
          out(i * n + j, k * n + l) = sign(i + j) * sign(kk + ll) * det(delete_rows_cols(m, {i, k}, {j, l}));
        }
      }
    }
  }
  return out;
}

}  // namespace detvar
