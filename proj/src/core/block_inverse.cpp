#include "detvar/core/block_inverse.hpp"

#include <sstream>

namespace detvar {

namespace {

void guard(const Matrix& G, const Matrix& D, double cond_bound, double& cond_g, double& cond_d) {
  cond_g = condition_number(G);
  cond_d = condition_number(D);
  if (cond_g > cond_bound || cond_d > cond_bound) {
    std::ostringstream msg;
    msg << "block_inverse: ill-conditioned diagonal block (cond(G)=" << cond_g
        << ", cond(D)=" << cond_d << ", bound=" << cond_bound << ")";
    throw DegenerateMetric(msg.str(), cond_g, cond_d);
  }
}

void check_shapes(const Matrix& G, const Matrix& B, const Matrix& D) {
  if (G.rows() != G.cols() || D.rows() != D.cols() || B.rows() != G.rows() || B.cols() != D.rows())
    throw ShapeMismatch("block_inverse: inconsistent block shapes");
}

Matrix inv(const Matrix& m) {
  if (m.size() == 0) return m;
  return m.partialPivLu().inverse();
}

}  // namespace

Matrix assemble_blocks(const Matrix& G, const Matrix& B, const Matrix& D) {
  const auto n1 = G.rows();
  const auto n2 = D.rows();
  Matrix out(n1 + n2, n1 + n2);
  out.topLeftCorner(n1, n1) = G;
  out.topRightCorner(n1, n2) = B;
  out.bottomLeftCorner(n2, n1) = B.transpose();
  out.bottomRightCorner(n2, n2) = D;
  return out;
}

BlockInverse block_inverse(const Matrix& G, const Matrix& B, const Matrix& D, double cond_bound) {
  check_shapes(G, B, D);
  BlockInverse out;
  guard(G, D, cond_bound, out.cond_upper, out.cond_lower);

  const Matrix g_inv = inv(G);
  const Matrix g_inv_b = g_inv * B;
  out.schur_inv = inv(D - B.transpose() * g_inv_b);

  const auto n1 = G.rows();
  const auto n2 = D.rows();
  out.inverse.resize(n1 + n2, n1 + n2);
  out.inverse.topLeftCorner(n1, n1) = g_inv + g_inv_b * out.schur_inv * g_inv_b.transpose();
  out.inverse.topRightCorner(n1, n2) = -g_inv_b * out.schur_inv;
  out.inverse.bottomLeftCorner(n2, n1) = -out.schur_inv * g_inv_b.transpose();
  out.inverse.bottomRightCorner(n2, n2) = out.schur_inv;
  return out;
}

BlockInverse block_inverse_lower_first(const Matrix& G, const Matrix& B, const Matrix& D,
                                       double cond_bound) {
  check_shapes(G, B, D);
  BlockInverse out;
  guard(G, D, cond_bound, out.cond_upper, out.cond_lower);

  const Matrix d_inv = inv(D);
  const Matrix b_d_inv = B * d_inv;
  out.schur_inv = inv(G - b_d_inv * B.transpose());

  const auto n1 = G.rows();
  const auto n2 = D.rows();
  out.inverse.resize(n1 + n2, n1 + n2);
  out.inverse.topLeftCorner(n1, n1) = out.schur_inv;
  out.inverse.topRightCorner(n1, n2) = -out.schur_inv * b_d_inv;
  out.inverse.bottomLeftCorner(n2, n1) = -b_d_inv.transpose() * out.schur_inv;
  out.inverse.bottomRightCorner(n2, n2) = d_inv + b_d_inv.transpose() * out.schur_inv * b_d_inv;
  return out;
}

double inverse_defect(const Matrix& inverse, const Matrix& assembled) {
  if (assembled.size() == 0) return 0.0;
  const Matrix diff = inverse * assembled - Matrix::Identity(assembled.rows(), assembled.cols());
  return diff.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace detvar
