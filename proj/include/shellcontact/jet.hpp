#pragma once

// Second-order forward-mode dual number over a fixed number of local
// variables. Element kernels are written once as templates on the scalar type
// and instantiated with double (energy only) or Jet<N> (energy, gradient and
// Hessian of one element stencil).

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

namespace shellcontact {

template <std::size_t N>
struct Jet {
  double v = 0.0;
  std::array<double, N> g{};
  /// Upper triangle of the symmetric Hessian, row by row.
  static constexpr std::size_t kPacked = N * (N + 1) / 2;
  std::array<double, kPacked> h{};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet variable(double value, std::size_t index) {
    Jet j(value);
    j.g[index] = 1.0;
    return j;
  }

  double hess(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    return h[a * N - a * (a + 1) / 2 + b];
  }
};

namespace detail {

// f(a) given f, f', f''.
template <std::size_t N>
Jet<N> chain(const Jet<N>& a, double f, double df, double d2f) {
  Jet<N> r(f);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = df * a.g[i];
  std::size_t p = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = i; k < N; ++k, ++p) r.h[p] = df * a.h[p] + d2f * a.g[i] * a.g[k];
  return r;
}

}  // namespace detail

template <std::size_t N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v + b.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] + b.g[i];
  for (std::size_t i = 0; i < Jet<N>::kPacked; ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}

template <std::size_t N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v - b.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] - b.g[i];
  for (std::size_t i = 0; i < Jet<N>::kPacked; ++i) r.h[i] = a.h[i] - b.h[i];
  return r;
}

template <std::size_t N>
Jet<N> operator-(const Jet<N>& a) {
  Jet<N> r(-a.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = -a.g[i];
  for (std::size_t i = 0; i < Jet<N>::kPacked; ++i) r.h[i] = -a.h[i];
  return r;
}

template <std::size_t N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v * b.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] * b.v + b.g[i] * a.v;
  std::size_t p = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = i; k < N; ++k, ++p)
      r.h[p] = a.h[p] * b.v + b.h[p] * a.v + a.g[i] * b.g[k] + b.g[i] * a.g[k];
  return r;
}

template <std::size_t N>
Jet<N> operator*(const Jet<N>& a, double s) {
  Jet<N> r(a.v * s);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] * s;
  for (std::size_t i = 0; i < Jet<N>::kPacked; ++i) r.h[i] = a.h[i] * s;
  return r;
}

template <std::size_t N>
Jet<N> operator*(double s, const Jet<N>& a) {
  return a * s;
}

template <std::size_t N>
Jet<N> operator+(const Jet<N>& a, double s) {
  Jet<N> r = a;
  r.v += s;
  return r;
}

template <std::size_t N>
Jet<N> operator+(double s, const Jet<N>& a) {
  return a + s;
}

template <std::size_t N>
Jet<N> operator-(const Jet<N>& a, double s) {
  return a + (-s);
}

template <std::size_t N>
Jet<N> operator-(double s, const Jet<N>& a) {
  return (-a) + s;
}

template <std::size_t N>
Jet<N> operator/(const Jet<N>& a, double s) {
  return a * (1.0 / s);
}

template <std::size_t N>
Jet<N> inverse(const Jet<N>& a) {
  const double inv = 1.0 / a.v;
  return detail::chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <std::size_t N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  return a * inverse(b);
}

template <std::size_t N>
Jet<N> operator/(double s, const Jet<N>& b) {
  return inverse(b) * s;
}

template <std::size_t N>
Jet<N> sqrt(const Jet<N>& a) {
  const double s = std::sqrt(a.v);
  return detail::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

template <std::size_t N>
Jet<N> sin(const Jet<N>& a) {
  const double s = std::sin(a.v);
  return detail::chain(a, s, std::cos(a.v), -s);
}

template <std::size_t N>
Jet<N> cos(const Jet<N>& a) {
  const double c = std::cos(a.v);
  return detail::chain(a, c, -std::sin(a.v), -c);
}

template <std::size_t N>
Jet<N> atan2(const Jet<N>& y, const Jet<N>& x) {
  const double q = x.v * x.v + y.v * y.v;
  const double q2 = q * q;
  const double dx = -y.v / q;
  const double dy = x.v / q;
  const double dxx = 2.0 * x.v * y.v / q2;
  const double dyy = -dxx;
  const double dxy = (y.v * y.v - x.v * x.v) / q2;
  Jet<N> r(std::atan2(y.v, x.v));
  for (std::size_t i = 0; i < N; ++i) r.g[i] = dx * x.g[i] + dy * y.g[i];
  std::size_t p = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = i; k < N; ++k, ++p)
      r.h[p] = dx * x.h[p] + dy * y.h[p] + dxx * x.g[i] * x.g[k] + dyy * y.g[i] * y.g[k] +
               dxy * (x.g[i] * y.g[k] + y.g[i] * x.g[k]);
  return r;
}

inline double value_of(double x) { return x; }

template <std::size_t N>
double value_of(const Jet<N>& x) {
  return x.v;
}

}  // namespace shellcontact
