#pragma once

// Minimal forward-mode dual numbers with a fixed number of directions.
// Nesting Dual<Dual<double, N>, N> yields exact second derivatives, which the
// likelihood uses for per-record Hessians of its few local predictors.

#include <array>
#include <cmath>
#include <type_traits>

namespace brbvs::ad {

template <class T, int N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(double x) : v(x) {}  // NOLINT(google-explicit-constructor)
  template <class U>
    requires(!std::is_same_v<U, double> && std::is_convertible_v<U, T>)
  Dual(const U& x) : v(x) {}  // NOLINT(google-explicit-constructor)

  static Dual variable(const T& x, int i) {
    Dual r(x);
    r.d[i] = T(1.0);
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const T inv = T(1.0) / o.v;
    v *= inv;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - v * o.d[i]) * inv;
    return *this;
  }
};

template <class T>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

/// Scalar value at the bottom of a (possibly nested) dual.
inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& x) {
  return value_of(x.v);
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}

#define BRBVS_AD_BINARY(op, opeq)                                      \
  template <class T, int N>                                            \
  Dual<T, N> operator op(Dual<T, N> a, const Dual<T, N>& b) {          \
    return a opeq b;                                                   \
  }                                                                    \
  template <class T, int N>                                            \
  Dual<T, N> operator op(Dual<T, N> a, double b) {                     \
    return a opeq Dual<T, N>(b);                                       \
  }                                                                    \
  template <class T, int N>                                            \
  Dual<T, N> operator op(double a, const Dual<T, N>& b) {              \
    return Dual<T, N>(a) opeq b;                                       \
  }

BRBVS_AD_BINARY(+, +=)
BRBVS_AD_BINARY(-, -=)
BRBVS_AD_BINARY(*, *=)
BRBVS_AD_BINARY(/, /=)
#undef BRBVS_AD_BINARY

template <class T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) {
  return value_of(a) < value_of(b);
}
template <class T, int N>
bool operator<(const Dual<T, N>& a, double b) {
  return value_of(a) < b;
}
template <class T, int N>
bool operator>(const Dual<T, N>& a, double b) {
  return value_of(a) > b;
}
template <class T, int N>
bool operator>(const Dual<T, N>& a, const Dual<T, N>& b) {
  return value_of(a) > value_of(b);
}

// Chain rule helper: f(a) with f'(a) given.
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& a, const T& fa, const T& dfa) {
  Dual<T, N> r;
  r.v = fa;
  for (int i = 0; i < N; ++i) r.d[i] = dfa * a.d[i];
  return r;
}

using std::exp;
using std::expm1;
using std::log;
using std::log1p;
using std::sqrt;

template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
  const T e = exp(a.v);
  return chain(a, e, e);
}
template <class T, int N>
Dual<T, N> expm1(const Dual<T, N>& a) {
  return chain(a, expm1(a.v), exp(a.v));
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& a) {
  return chain(a, log(a.v), T(1.0) / a.v);
}
template <class T, int N>
Dual<T, N> log1p(const Dual<T, N>& a) {
  return chain(a, log1p(a.v), T(1.0) / (T(1.0) + a.v));
}
template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  const T s = sqrt(a.v);
  return chain(a, s, T(0.5) / s);
}

}  // namespace brbvs::ad
