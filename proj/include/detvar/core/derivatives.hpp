#pragma once

#include "detvar/core/dual.hpp"
#include "detvar/core/types.hpp"

#include <cmath>
#include <limits>
#include <vector>

// Exact first and second derivatives of polynomial maps by forward-mode dual
// numbers, plus central finite differences kept as an independent oracle.
//
// A scalar map is a generic callable `f(const VectorX<S>&) -> S`; a vector map
// `F(const VectorX<S>&) -> VectorX<S>`. Both must be instantiable for S in
// {double, Dual1, Dual2}.

namespace detvar {

template <typename F>
Vector gradient(F&& f, const Vector& x) {
  const auto n = x.size();
  Vector out(n);
  VectorX<Dual1> xd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) xd(k) = Dual1(x(k), k == i ? 1.0 : 0.0);
    out(i) = f(xd).derivative;
  }
  return out;
}

template <typename F>
Matrix jacobian(F&& f, const Vector& x) {
  const auto n = x.size();
  VectorX<Dual1> xd(n);
  Matrix out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) xd(k) = Dual1(x(k), k == i ? 1.0 : 0.0);
    const VectorX<Dual1> y = f(xd);
    if (i == 0) out.resize(y.size(), n);
    for (Eigen::Index r = 0; r < y.size(); ++r) out(r, i) = y(r).derivative;
  }
  return out;
}

namespace detail {

inline VectorX<Dual2> seed2(const Vector& x, const Vector& inner, const Vector& outer) {
  VectorX<Dual2> xd(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k)
    xd(k) = Dual2(Dual1(x(k), inner(k)), Dual1(outer(k), 0.0));
  return xd;
}

inline Vector unit(Eigen::Index n, Eigen::Index i) { return Vector::Unit(n, i); }

}  // namespace detail

//! Full Hessian of a scalar map via nested dual numbers (n(n+1)/2 evaluations).
template <typename F>
Matrix hessian(F&& f, const Vector& x) {
  const auto n = x.size();
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const Dual2 y = f(detail::seed2(x, detail::unit(n, i), detail::unit(n, j)));
      out(i, j) = out(j, i) = y.derivative.derivative;
    }
  }
  return out;
}

//! Second-derivative tensor of a vector map: one n x n matrix per output component.
template <typename F>
std::vector<Matrix> hessian_tensor(F&& f, const Vector& x) {
  const auto n = x.size();
  std::vector<Matrix> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const VectorX<Dual2> y = f(detail::seed2(x, detail::unit(n, i), detail::unit(n, j)));
      if (out.empty()) out.assign(static_cast<std::size_t>(y.size()), Matrix::Zero(n, n));
      for (Eigen::Index r = 0; r < y.size(); ++r)
        out[static_cast<std::size_t>(r)](i, j) = out[static_cast<std::size_t>(r)](j, i) =
            y(r).derivative.derivative;
    }
  }
  return out;
}

//! Second directional derivative F''(x)[v, w] of a vector map.
template <typename F>
Vector second_directional(F&& f, const Vector& x, const Vector& v, const Vector& w) {
  const VectorX<Dual2> y = f(detail::seed2(x, v, w));
  Vector out(y.size());
  for (Eigen::Index r = 0; r < y.size(); ++r) out(r) = y(r).derivative.derivative;
  return out;
}

//! Central-difference step for first derivatives: cbrt(eps) * scale.
inline double fd_step_first(double scale) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
}

//! Step for value-only second differences: eps^(1/4) * scale, which balances
//! O(h^2) truncation against O(eps / h^2) cancellation.
inline double fd_step_second(double scale) {
  return std::pow(std::numeric_limits<double>::epsilon(), 0.25) * scale;
}

template <typename F>
Vector fd_gradient(F&& f, const Vector& x, double scale = 1.0) {
  const double h = fd_step_first(scale);
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    out(i) = (static_cast<double>(f(xp)) - static_cast<double>(f(xm))) / (2.0 * h);
  }
  return out;
}

//! Hessian from function values only (four-point mixed central differences).
template <typename F>
Matrix fd_hessian(F&& f, const Vector& x, double scale = 1.0) {
  const double h = fd_step_second(scale);
  const auto n = x.size();
  Matrix out(n, n);
  auto eval = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    Vector y = x;
    y(i) += si * h;
    y(j) += sj * h;
    return static_cast<double>(f(y));
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = (eval(i, 1, j, 1) - eval(i, 1, j, -1) - eval(i, -1, j, 1) + eval(i, -1, j, -1)) /
                       (4.0 * h * h);
      out(i, j) = out(j, i) = v;
    }
  }
  return out;
}

}  // namespace detvar
