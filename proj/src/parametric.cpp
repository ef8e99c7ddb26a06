#include "detvar/parametric.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace detvar {

namespace {

constexpr double kChartConditionBound = 1e4;

std::vector<Eigen::Index> identity_permutation(Eigen::Index q) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(q));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  return perm;
}

Matrix ata_inverse(const ChartPoint& cp) {
  if (cp.r() == 0) return Matrix(0, 0);
  return (cp.a.transpose() * cp.a).inverse();
}

}  // namespace

Vector ChartPoint::coordinates() const {
  Vector x(dim());
  x.head(a.size()) = vec(a);
  x.tail(lambda.size()) = vec(lambda);
  return x;
}

ChartPoint make_chart_point(Matrix a, Matrix lambda, std::vector<Eigen::Index> permutation) {
  const auto p = a.rows();
  const auto r = a.cols();
  const auto q = r + lambda.cols();
  std::ostringstream msg;
  if (lambda.rows() != r) {
    msg << "chart point: lambda has " << lambda.rows() << " rows, expected r = " << r;
    throw InvalidChartPoint(msg.str());
  }
  if (!(p >= q && q > r && r >= 0)) {
    msg << "chart point: need p >= q > r >= 0, got (p, q, r) = (" << p << ", " << q << ", " << r << ")";
    throw InvalidChartPoint(msg.str());
  }
  if (!a.allFinite() || !lambda.allFinite()) throw InvalidChartPoint("chart point: non-finite entries");
  if (r > 0) {
    const auto rank = svd_rank(a).rank;
    if (rank < r) {
      msg << "chart point: rank(a) = " << rank << " < r = " << r;
      throw InvalidChartPoint(msg.str());
    }
  }
  if (permutation.empty()) {
    permutation = identity_permutation(q);
  } else {
    std::vector<Eigen::Index> sorted = permutation;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != identity_permutation(q)) throw InvalidChartPoint("chart point: invalid column permutation");
  }
  return ChartPoint{std::move(a), std::move(lambda), std::move(permutation)};
}

ChartPoint sample_chart_point(CounterRng& rng, Eigen::Index p, Eigen::Index q, Eigen::Index r) {
  Matrix a = rng.normal_matrix(p, r);
  for (int attempt = 0; r > 0 && condition_number(a.transpose() * a) > kChartConditionBound; ++attempt) {
    if (attempt > 1000) throw InvalidChartPoint("sample_chart_point: rejection sampling did not terminate");
    a = rng.normal_matrix(p, r);
  }
  Matrix lambda = rng.uniform_matrix(r, q - r, -2.0, 2.0);
  return make_chart_point(std::move(a), std::move(lambda));
}

Matrix to_ambient(const Matrix& chart_layout, const std::vector<Eigen::Index>& permutation) {
  Matrix out(chart_layout.rows(), chart_layout.cols());
  for (Eigen::Index k = 0; k < chart_layout.cols(); ++k)
    out.col(permutation[static_cast<std::size_t>(k)]) = chart_layout.col(k);
  return out;
}

Matrix to_chart_layout(const Matrix& ambient, const std::vector<Eigen::Index>& permutation) {
  Matrix out(ambient.rows(), ambient.cols());
  for (Eigen::Index k = 0; k < ambient.cols(); ++k)
    out.col(k) = ambient.col(permutation[static_cast<std::size_t>(k)]);
  return out;
}

Matrix chart_map(const ChartPoint& cp) {
  Matrix y(cp.p(), cp.q());
  y.leftCols(cp.r()) = cp.a;
  y.rightCols(cp.q() - cp.r()) = cp.a * cp.lambda;
  return to_ambient(y, cp.permutation);
}

Matrix chart_derivative(const ChartPoint& cp, const Matrix& c, const Matrix& mu) {
  if (c.rows() != cp.p() || c.cols() != cp.r() || mu.rows() != cp.r() || mu.cols() != cp.q() - cp.r())
    throw ShapeMismatch("chart_derivative: (c, mu) shapes do not match the chart point");
  Matrix y(cp.p(), cp.q());
  y.leftCols(cp.r()) = c;
  y.rightCols(cp.q() - cp.r()) = c * cp.lambda + cp.a * mu;
  return to_ambient(y, cp.permutation);
}

Matrix chart_jacobian(const ChartPoint& cp) {
  const auto p = cp.p(), q = cp.q(), r = cp.r();
  Matrix jac(p * q, cp.dim());
  Vector basis = Vector::Zero(cp.dim());
  for (Eigen::Index mu = 0; mu < cp.dim(); ++mu) {
    basis.setZero();
    basis(mu) = 1.0;
    const Matrix c = unvec(basis.head(p * r), p, r);
    const Matrix m = unvec(basis.tail(r * (q - r)), r, q - r);
    jac.col(mu) = vec(chart_derivative(cp, c, m));
  }
  return jac;
}

MetricBlocks induced_metric(const ChartPoint& cp) {
  const auto p = cp.p(), r = cp.r(), rp = cp.q() - cp.r();
  const Matrix& a = cp.a;
  const Matrix& lambda = cp.lambda;
  MetricBlocks mb;
  mb.G = kron(Matrix::Identity(r, r) + lambda * lambda.transpose(), Matrix::Identity(p, p));
  mb.B = kron(lambda, a);
  mb.D = kron(Matrix::Identity(rp, rp), a.transpose() * a);
  if (mb.D.size() == 0) {
    mb.schur_inv = Matrix(0, 0);
  } else {
    const Matrix g_inv_b = mb.G.partialPivLu().solve(mb.B);
    mb.schur_inv = (mb.D - mb.B.transpose() * g_inv_b).partialPivLu().inverse();
  }
  return mb;
}

MetricInverse metric_inverse(const ChartPoint& cp, const MetricBlocks& mb) {
  const auto p = cp.p(), r = cp.r(), rp = cp.q() - cp.r();
  const auto n1 = p * r, n2 = r * rp;
  const Matrix assembled = mb.assembled();
  MetricInverse out;

  out.schur_route = block_inverse(mb.G, mb.B, mb.D).inverse;
  out.lower_route = block_inverse_lower_first(mb.G, mb.B, mb.D).inverse;
  out.generic = assembled.size() ? Matrix(assembled.partialPivLu().inverse()) : Matrix(0, 0);

  const Matrix& a = cp.a;
  const Matrix& lambda = cp.lambda;
  const Matrix ata_inv = ata_inverse(cp);
  const Matrix a_pinv = ata_inv * a.transpose();  // (a^T a)^{-1} a^T
  const Matrix proj_perp = Matrix::Identity(p, p) - a * a_pinv;
  const Matrix llt = lambda * lambda.transpose();
  const Matrix shrink = llt * (Matrix::Identity(r, r) + llt).inverse();
  out.rho_operator = kron(Matrix::Identity(rp, rp) + lambda.transpose() * lambda, ata_inv);

  const Matrix lower_left = -kron(lambda.transpose(), a_pinv);
  out.operator_route.resize(n1 + n2, n1 + n2);
  out.operator_route.topLeftCorner(n1, n1) = Matrix::Identity(n1, n1) - kron(shrink.transpose(), proj_perp);
  out.operator_route.topRightCorner(n1, n2) = -kron(lambda, a * ata_inv);
  out.operator_route.bottomLeftCorner(n2, n1) = lower_left;
  out.operator_route.bottomRightCorner(n2, n2) = out.rho_operator;

  const std::vector<const Matrix*> routes{&out.schur_route, &out.lower_route, &out.operator_route, &out.generic};
  for (std::size_t i = 0; i < routes.size(); ++i) {
    out.max_defect = std::max(out.max_defect, inverse_defect(*routes[i], assembled));
    for (std::size_t j = i + 1; j < routes.size(); ++j)
      if (assembled.size())
        out.max_pairwise = std::max(out.max_pairwise, (*routes[i] - *routes[j]).cwiseAbs().maxCoeff());
  }
  if (n2 > 0) {
    out.rho_discrepancy = (mb.schur_inv - out.rho_operator).cwiseAbs().maxCoeff();
    out.printed_lower_left_discrepancy = (-lower_left - out.schur_route.bottomLeftCorner(n2, n1)).norm();
  }
  return out;
}

Matrix NormalFrame::columns() const {
  if (normals.empty()) return Matrix(0, 0);
  Matrix out(normals.front().size(), static_cast<Eigen::Index>(normals.size()));
  for (std::size_t i = 0; i < normals.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = vec(normals[i]);
  return out;
}

Matrix NormalFrame::gram() const {
  const Matrix cols = columns();
  return cols.transpose() * cols;
}

NormalFrame normal_frame(const ChartPoint& cp, const std::optional<Matrix>& kernel_basis) {
  const auto p = cp.p(), r = cp.r(), q = cp.q(), rp = q - r, rpp = p - r;
  NormalFrame frame;
  if (kernel_basis) {
    if (kernel_basis->rows() != p || kernel_basis->cols() != rpp)
      throw ShapeMismatch("normal_frame: kernel basis must be p x (p - r)");
    frame.kernel_basis = *kernel_basis;
  } else {
    frame.kernel_basis = svd_rank(cp.a).kernel_basis;
    if (frame.kernel_basis.cols() != rpp) throw InvalidChartPoint("normal_frame: rank(a) != r");
  }
  frame.gamma.resize(rp);
  for (Eigen::Index sp = 0; sp < rp; ++sp)
    frame.gamma(sp) = 1.0 / std::sqrt(1.0 + cp.lambda.col(sp).squaredNorm());

  for (Eigen::Index sp = 0; sp < rp; ++sp) {
    for (Eigen::Index spp = 0; spp < rpp; ++spp) {
      const Vector e = frame.kernel_basis.col(spp);
      Matrix n = Matrix::Zero(p, q);
      for (Eigen::Index k = 0; k < r; ++k) n.col(k) = cp.lambda(k, sp) * e;
      n.col(r + sp) = -e;
      frame.normals.push_back(to_ambient(frame.gamma(sp) * n, cp.permutation));
    }
  }
  return frame;
}

std::vector<Matrix> chart_second_derivatives(const ChartPoint& cp) {
  const auto p = cp.p(), q = cp.q(), r = cp.r(), n = cp.dim();
  if (n == 0) return {};
  auto map = [p, q, r](const auto& x) { return chart_map_flat(x, p, q, r); };
  const std::vector<Matrix> per_component = hessian_tensor(map, cp.coordinates());
  // Regroup: one ambient p x q matrix per coordinate pair (mu, nu), index mu * n + nu.
  std::vector<Matrix> out(static_cast<std::size_t>(n * n), Matrix::Zero(p, q));
  for (Eigen::Index mu = 0; mu < n; ++mu) {
    for (Eigen::Index nu = 0; nu < n; ++nu) {
      Matrix y(p, q);
      for (Eigen::Index comp = 0; comp < p * q; ++comp)
        y(comp % p, comp / p) = per_component[static_cast<std::size_t>(comp)](mu, nu);
      out[static_cast<std::size_t>(mu * n + nu)] = to_ambient(y, cp.permutation);
    }
  }
  return out;
}

SecondFundamentalForm second_fundamental_form(const ChartPoint& cp) {
  const auto p = cp.p(), r = cp.r(), rp = cp.q() - cp.r(), rpp = p - r, n = cp.dim();
  const NormalFrame frame = normal_frame(cp);
  SecondFundamentalForm sff;

  // Closed form: h^{(t't'')}_{Js, ss'} = -gamma_t' delta_{t's'} (e_t'')_J, symmetric.
  // The sign follows the -e_s'' entry that N_{s's''} carries in column r + s'.
  for (Eigen::Index tp = 0; tp < rp; ++tp) {
    for (Eigen::Index tpp = 0; tpp < rpp; ++tpp) {
      Matrix h = Matrix::Zero(n, n);
      for (Eigen::Index s = 0; s < r; ++s) {
        for (Eigen::Index j = 0; j < p; ++j) {
          const Eigen::Index a_idx = j + p * s;
          const Eigen::Index l_idx = p * r + s + r * tp;
          h(a_idx, l_idx) = h(l_idx, a_idx) = -frame.gamma(tp) * frame.kernel_basis(j, tpp);
        }
      }
      sff.closed_form.push_back(std::move(h));
    }
  }

  const std::vector<Matrix> d2x = chart_second_derivatives(cp);
  for (const Matrix& normal : frame.normals) {
    Matrix h = Matrix::Zero(n, n);
    for (Eigen::Index mu = 0; mu < n; ++mu)
      for (Eigen::Index nu = 0; nu < n; ++nu)
        h(mu, nu) = (normal.array() * d2x[static_cast<std::size_t>(mu * n + nu)].array()).sum();
    sff.contracted.push_back(std::move(h));
  }

  const Eigen::Index na = p * r;
  for (std::size_t i = 0; i < sff.closed_form.size() && n > 0; ++i) {
    sff.discrepancy = std::max(sff.discrepancy, (sff.closed_form[i] - sff.contracted[i]).cwiseAbs().maxCoeff());
    sff.printed_sign_discrepancy =
        std::max(sff.printed_sign_discrepancy, (-sff.closed_form[i] - sff.contracted[i]).cwiseAbs().maxCoeff());
    const Matrix& h = sff.contracted[i];
    if (na > 0) sff.off_pattern_max = std::max(sff.off_pattern_max, h.topLeftCorner(na, na).cwiseAbs().maxCoeff());
    if (n > na)
      sff.off_pattern_max =
          std::max(sff.off_pattern_max, h.bottomRightCorner(n - na, n - na).cwiseAbs().maxCoeff());
  }
  return sff;
}

MeanCurvature mean_curvature(const ChartPoint& cp, const std::optional<Matrix>& kernel_basis) {
  const auto p = cp.p(), q = cp.q(), r = cp.r(), n = cp.dim();
  MeanCurvature mc;
  const NormalFrame frame = normal_frame(cp, kernel_basis);
  mc.trace_vector = Matrix::Zero(p, q);

  Matrix g_inv;
  if (n > 0) {
    const MetricBlocks mb = induced_metric(cp);
    g_inv = block_inverse(mb.G, mb.B, mb.D).inverse;
    // G_hat^{-1} = L L^T, so sum G^{mu nu} d2X_{mu nu} = sum_k X''[l_k, l_k]:
    // one second directional derivative per coordinate.
    const Matrix sym = 0.5 * (g_inv + g_inv.transpose());
    const Matrix l = sym.llt().matrixL();
    auto map = [p, q, r](const auto& x) { return chart_map_flat(x, p, q, r); };
    const Vector x = cp.coordinates();
    Vector acc = Vector::Zero(p * q);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Vector dir = l.col(k);
      acc += second_directional(map, x, dir, dir);
    }
    mc.trace_vector = to_ambient(unvec(acc, p, q), cp.permutation);
  }

  const Matrix cols = frame.columns();
  const Vector t = vec(mc.trace_vector);
  mc.components = cols.size() ? Vector(cols.transpose() * t) : Vector(0);
  if (cols.size()) {
    const Vector coeff = frame.gram().ldlt().solve(mc.components);
    mc.ambient_vector = unvec(cols * coeff, p, q);
  } else {
    mc.ambient_vector = Matrix::Zero(p, q);
  }

  const Matrix mu_star = r > 0 ? Matrix(ata_inverse(cp) * cp.lambda) : Matrix(0, q - r);
  const Matrix rhs = -2.0 * chart_derivative(cp, Matrix::Zero(p, r), mu_star);
  mc.tangency_residual = (mc.trace_vector - rhs).norm();

  if (n > 0) {
    const Matrix jac = chart_jacobian(cp);
    const Vector normal_part = t - jac * (g_inv * (jac.transpose() * t));
    mc.projection_consistency = (normal_part - vec(mc.ambient_vector)).norm();
  } else {
    mc.projection_consistency = (t - vec(mc.ambient_vector)).norm();
  }
  return mc;
}

OpStructureReport o_p_structure_check(const ChartPoint& cp, double tol) {
  const auto p = cp.p(), r = cp.r(), rp = cp.q() - cp.r();
  OpStructureReport rep;
  if (r == 0 || rp == 0) {
    rep.passed = true;
    return rep;
  }
  const MetricBlocks mb = induced_metric(cp);
  const Matrix inv = block_inverse(mb.G, mb.B, mb.D).inverse;
  const Matrix ata_inv = ata_inverse(cp);
  const Matrix proj_perp = Matrix::Identity(p, p) - cp.a * ata_inv * cp.a.transpose();
  const Matrix a_pinv_t = cp.a * ata_inv;
  const Eigen::Index na = p * r;

  for (Eigen::Index s = 0; s < r; ++s) {
    for (Eigen::Index u = 0; u < r; ++u) {
      for (Eigen::Index tp = 0; tp < rp; ++tp) {
        const Vector slice = inv.block(s * p, na + u + r * tp, p, 1);
        rep.column_space_residual =
            std::max(rep.column_space_residual, (proj_perp * slice).norm() / std::max(1.0, slice.norm()));
        const Vector expected = -a_pinv_t.col(u) * cp.lambda(s, tp);
        rep.explicit_form_residual = std::max(rep.explicit_form_residual, (slice - expected).norm());
      }
    }
  }
  rep.passed = rep.column_space_residual <= tol && rep.explicit_form_residual <= tol;
  return rep;
}

double volume_first_variation(const ChartPoint& cp, const Matrix& w) {
  const auto p = cp.p(), q = cp.q(), r = cp.r();
  const auto perm = cp.permutation;
  auto ambient_map = [p, q, r, perm](const Vector& x) -> Vector {
    return vec(to_ambient(unvec(chart_map_flat<double>(x, p, q, r), p, q), perm));
  };
  return volume_first_variation(ambient_map, cp.coordinates(), vec(w));
}

ChartPoint chart_point_at(const Matrix& x, Eigen::Index r) {
  const auto p = x.rows(), q = x.cols();
  const RankResult rr = svd_rank(x);
  if (rr.rank != r) {
    std::ostringstream msg;
    msg << "chart_point_at: numerical rank " << rr.rank << " differs from declared r = " << r;
    throw RankMismatch(msg.str());
  }
  if (r == 0) return make_chart_point(Matrix(p, 0), Matrix(0, q));

  std::vector<bool> select(static_cast<std::size_t>(q), false);
  std::fill(select.begin(), select.begin() + r, true);
  std::vector<Eigen::Index> best;
  double best_cond = std::numeric_limits<double>::infinity();
  // prev_permutation over a descending-sorted mask enumerates subsets lexicographically.
  do {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index k = 0; k < q; ++k)
      if (select[static_cast<std::size_t>(k)]) cols.push_back(k);
    const Matrix sub = x(Eigen::all, cols);
    const double cond = condition_number(sub.transpose() * sub);
    if (cond < best_cond) {
      best_cond = cond;
      best = cols;
    }
    if (cond <= kChartConditionBound) break;
  } while (std::prev_permutation(select.begin(), select.end()));

  std::vector<Eigen::Index> perm = best;
  for (Eigen::Index k = 0; k < q; ++k)
    if (std::find(best.begin(), best.end(), k) == best.end()) perm.push_back(k);
  const Matrix a = x(Eigen::all, best);
  std::vector<Eigen::Index> rest(perm.begin() + r, perm.end());
  const Matrix rest_cols = x(Eigen::all, rest);
  const Matrix lambda = (a.transpose() * a).ldlt().solve(a.transpose() * rest_cols);
  return make_chart_point(a, lambda, perm);
}

}  // namespace detvar
