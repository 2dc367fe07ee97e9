#pragma once

#include <array>
#include <cmath>

namespace ngnf {

/// Second-order forward-mode number carrying value, gradient and Hessian
/// with respect to N independent variables. Propagating these through the
/// flow and the source density yields exact spatial first and second
/// derivatives of the modeled density.
template <int N>
struct Dual2 {
  double v = 0.0;
  std::array<double, N> g{};
  std::array<double, N * N> h{};  // row-major, kept symmetric

  Dual2() = default;
  Dual2(double value) : v(value) {}  // NOLINT: implicit by design

  static Dual2 variable(double value, int index) {
    Dual2 d(value);
    d.g[index] = 1.0;
    return d;
  }

  double hess(int i, int j) const { return h[i * N + j]; }
};

template <int N>
inline Dual2<N> operator+(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.v + b.v);
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] + b.g[i];
  for (int i = 0; i < N * N; ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}

template <int N>
inline Dual2<N> operator-(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.v - b.v);
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] - b.g[i];
  for (int i = 0; i < N * N; ++i) r.h[i] = a.h[i] - b.h[i];
  return r;
}

template <int N>
inline Dual2<N> operator-(const Dual2<N>& a) {
  Dual2<N> r(-a.v);
  for (int i = 0; i < N; ++i) r.g[i] = -a.g[i];
  for (int i = 0; i < N * N; ++i) r.h[i] = -a.h[i];
  return r;
}

template <int N>
inline Dual2<N> operator*(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.v * b.v);
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      r.h[i * N + j] = a.h[i * N + j] * b.v + a.v * b.h[i * N + j] +
                       a.g[i] * b.g[j] + a.g[j] * b.g[i];
  return r;
}

/// Unary chain rule: f(u) with f'(u) = d1, f''(u) = d2.
template <int N>
inline Dual2<N> chain(const Dual2<N>& u, double value, double d1, double d2) {
  Dual2<N> r(value);
  for (int i = 0; i < N; ++i) r.g[i] = d1 * u.g[i];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      r.h[i * N + j] = d1 * u.h[i * N + j] + d2 * u.g[i] * u.g[j];
  return r;
}

template <int N>
inline Dual2<N> operator/(const Dual2<N>& a, const Dual2<N>& b) {
  const double inv = 1.0 / b.v;
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int N>
inline Dual2<N> exp(const Dual2<N>& u) {
  const double e = std::exp(u.v);
  return chain(u, e, e, e);
}

template <int N>
inline Dual2<N> log(const Dual2<N>& u) {
  const double inv = 1.0 / u.v;
  return chain(u, std::log(u.v), inv, -inv * inv);
}

template <int N>
inline Dual2<N> tanh(const Dual2<N>& u) {
  const double t = std::tanh(u.v);
  const double d1 = 1.0 - t * t;
  return chain(u, t, d1, -2.0 * t * d1);
}

template <int N>
inline Dual2<N> sigmoid(const Dual2<N>& u) {
  const double s = 1.0 / (1.0 + std::exp(-u.v));
  const double d1 = s * (1.0 - s);
  return chain(u, s, d1, d1 * (1.0 - 2.0 * s));
}

template <int N>
inline Dual2<N> sqrt(const Dual2<N>& u) {
  const double s = std::sqrt(u.v);
  return chain(u, s, 0.5 / s, -0.25 / (s * u.v));
}

// mixed scalar/dual arithmetic (template deduction does not see the
// implicit double -> Dual2 conversion)
template <int N>
inline Dual2<N> operator+(const Dual2<N>& a, double b) { return a + Dual2<N>(b); }
template <int N>
inline Dual2<N> operator+(double a, const Dual2<N>& b) { return Dual2<N>(a) + b; }
template <int N>
inline Dual2<N> operator-(const Dual2<N>& a, double b) { return a - Dual2<N>(b); }
template <int N>
inline Dual2<N> operator-(double a, const Dual2<N>& b) { return Dual2<N>(a) - b; }
template <int N>
inline Dual2<N> operator*(const Dual2<N>& a, double b) {
  Dual2<N> r(a.v * b);
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] * b;
  for (int i = 0; i < N * N; ++i) r.h[i] = a.h[i] * b;
  return r;
}
template <int N>
inline Dual2<N> operator*(double a, const Dual2<N>& b) { return b * a; }
template <int N>
inline Dual2<N> operator/(const Dual2<N>& a, double b) { return a * (1.0 / b); }
template <int N>
inline Dual2<N> operator/(double a, const Dual2<N>& b) { return Dual2<N>(a) / b; }

// double overloads so generic code compiles for plain scalars too
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Uniform accessor for the scalar value of plain doubles and duals.
inline double value_of(double x) { return x; }
template <int N>
inline double value_of(const Dual2<N>& x) { return x.v; }

}  // namespace ngnf
