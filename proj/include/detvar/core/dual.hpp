#pragma once

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <ostream>

namespace detvar {

//! Forward-mode dual number value + derivative * epsilon with epsilon^2 = 0.
//! Nest as Dual<Dual<double>> for exact second derivatives.
template <typename T>
struct Dual {
  T value{};
  T derivative{};

  constexpr Dual() = default;
  constexpr Dual(T v, T d) : value(v), derivative(d) {}
  // NOLINTNEXTLINE(google-explicit-constructor)
  constexpr Dual(T v) : value(v), derivative(0) {}
  template <typename U>
    requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
  // NOLINTNEXTLINE(google-explicit-constructor)
  constexpr Dual(U v) : value(T(v)), derivative(T(0)) {}

  constexpr Dual& operator+=(const Dual& o) {
    value += o.value;
    derivative += o.derivative;
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    value -= o.value;
    derivative -= o.derivative;
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) {
    derivative = derivative * o.value + value * o.derivative;
    value *= o.value;
    return *this;
  }
  constexpr Dual& operator/=(const Dual& o) {
    derivative = (derivative * o.value - value * o.derivative) / (o.value * o.value);
    value /= o.value;
    return *this;
  }

  friend constexpr Dual operator-(const Dual& a) { return {-a.value, -a.derivative}; }
  friend constexpr Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend constexpr Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend constexpr Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend constexpr Dual operator/(Dual a, const Dual& b) { return a /= b; }

  friend constexpr bool operator==(const Dual& a, const Dual& b) { return a.value == b.value; }
  friend constexpr bool operator!=(const Dual& a, const Dual& b) { return a.value != b.value; }
  friend constexpr bool operator<(const Dual& a, const Dual& b) { return a.value < b.value; }
  friend constexpr bool operator>(const Dual& a, const Dual& b) { return a.value > b.value; }
  friend constexpr bool operator<=(const Dual& a, const Dual& b) { return a.value <= b.value; }
  friend constexpr bool operator>=(const Dual& a, const Dual& b) { return a.value >= b.value; }

  friend std::ostream& operator<<(std::ostream& os, const Dual& a) {
    return os << '(' << a.value << " + " << a.derivative << "e)";
  }
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T root = sqrt(a.value);
  return {root, a.derivative / (T(2) * root)};
}

template <typename T>
Dual<T> abs(const Dual<T>& a) {
  return a.value < T(0) ? -a : a;
}

//! Plain value of a possibly nested dual number.
inline double primal(double x) { return x; }
template <typename T>
double primal(const Dual<T>& x) {
  return primal(x.value);
}

}  // namespace detvar

namespace Eigen {

template <typename T>
struct NumTraits<detvar::Dual<T>> : NumTraits<double> {
  using Real = detvar::Dual<T>;
  using NonInteger = detvar::Dual<T>;
  using Literal = detvar::Dual<T>;
  using Nested = detvar::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2 * NumTraits<T>::ReadCost,
    AddCost = 2 * NumTraits<T>::AddCost,
    MulCost = 3 * NumTraits<T>::MulCost + NumTraits<T>::AddCost,
  };
  static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(NumTraits<double>::dummy_precision()); }
  static inline Real highest() { return Real(NumTraits<double>::highest()); }
  static inline Real lowest() { return Real(NumTraits<double>::lowest()); }
};

}  // namespace Eigen
