#pragma once

#include <array>

#include "pikan/tape.hpp"

namespace pikan {

/// Value plus first and second partial derivatives with respect to the two
/// network input coordinates (x and t, or x and y). Only the three
/// independent second partials are stored; d2 is symmetric by
/// construction. T is double for plain evaluation or Expr for tape
/// recording, in which case every component is a node and anything built
/// from the jet stays differentiable with respect to the parameters.
template <class T>
struct Jet2 {
  T v{};
  T dx{};
  T dy{};
  T dxx{};
  T dxy{};
  T dyy{};
};

using Jet2d = Jet2<double>;
using Jet2e = Jet2<Expr>;

/// Seed jet for input coordinate `coord` (0 or 1) holding `value`:
/// d1 is the unit vector, d2 is zero.
inline Jet2d seed_jet(double value, int coord) {
  Jet2d j;
  j.v = value;
  j.dx = coord == 0 ? 1.0 : 0.0;
  j.dy = coord == 1 ? 1.0 : 0.0;
  j.dxx = j.dxy = j.dyy = 0.0;
  return j;
}

/// SiLU value and its first two derivatives, written once so the plain
/// and taped instantiations perform identical arithmetic.
/// s = x*sig, s' = sig*(1 + x*(1-sig)), s'' = sig*(1-sig)*(2 + x*(1-2 sig)).
template <class T>
std::array<T, 3> silu_derivs(const T& x) {
  const T s = sigmoid(x);
  const T one_minus = 1.0 - s;
  const T f0 = x * s;
  const T f1 = s * (1.0 + x * one_minus);
  const T f2 = (s * one_minus) * (2.0 + x * (1.0 - 2.0 * s));
  return {f0, f1, f2};
}

/// tanh value and first two derivatives.
template <class T>
std::array<T, 3> tanh_derivs(const T& x) {
  const T t = tanh(x);
  const T f1 = 1.0 - square(t);
  const T f2 = -2.0 * (t * f1);
  return {t, f1, f2};
}

template <class T>
Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.v + b.v,     a.dx + b.dx,   a.dy + b.dy,
          a.dxx + b.dxx, a.dxy + b.dxy, a.dyy + b.dyy};
}

template <class T>
Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.v - b.v,     a.dx - b.dx,   a.dy - b.dy,
          a.dxx - b.dxx, a.dxy - b.dxy, a.dyy - b.dyy};
}

template <class T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
  Jet2<T> r;
  r.v = a.v * b.v;
  r.dx = a.dx * b.v + a.v * b.dx;
  r.dy = a.dy * b.v + a.v * b.dy;
  r.dxx = a.dxx * b.v + 2.0 * (a.dx * b.dx) + a.v * b.dxx;
  r.dxy = a.dxy * b.v + a.dx * b.dy + a.dy * b.dx + a.v * b.dxy;
  r.dyy = a.dyy * b.v + 2.0 * (a.dy * b.dy) + a.v * b.dyy;
  return r;
}

template <class T>
Jet2<T> operator*(double c, const Jet2<T>& a) {
  return {c * a.v, c * a.dx, c * a.dy, c * a.dxx, c * a.dxy, c * a.dyy};
}

template <class T>
Jet2<T> operator+(const Jet2<T>& a, double c) {
  Jet2<T> r = a;
  r.v = a.v + c;
  return r;
}

/// Chain rule through a univariate map given its value and first two
/// derivatives at the input's value.
template <class T>
Jet2<T> compose(const Jet2<T>& u, const T& f0, const T& f1, const T& f2) {
  Jet2<T> r;
  r.v = f0;
  r.dx = f1 * u.dx;
  r.dy = f1 * u.dy;
  r.dxx = f2 * (u.dx * u.dx) + f1 * u.dxx;
  r.dxy = f2 * (u.dx * u.dy) + f1 * u.dxy;
  r.dyy = f2 * (u.dy * u.dy) + f1 * u.dyy;
  return r;
}

template <class T>
Jet2<T> sin(const Jet2<T>& u) {
  const T s = sin(u.v);
  const T c = cos(u.v);
  return compose(u, s, c, 0.0 - s);
}

template <class T>
Jet2<T> cos(const Jet2<T>& u) {
  const T c = cos(u.v);
  const T s = sin(u.v);
  return compose(u, c, 0.0 - s, 0.0 - c);
}

template <class T>
Jet2<T> exp(const Jet2<T>& u) {
  const T e = exp(u.v);
  return compose(u, e, e, e);
}

template <class T>
Jet2<T> tanh(const Jet2<T>& u) {
  const auto d = tanh_derivs(u.v);
  return compose(u, d[0], d[1], d[2]);
}

template <class T>
Jet2<T> silu(const Jet2<T>& u) {
  const auto d = silu_derivs(u.v);
  return compose(u, d[0], d[1], d[2]);
}

template <class T>
Jet2<T> pow_int(const Jet2<T>& u, int n) {
  if (n == 0) {
    Jet2<T> r = 0.0 * u;
    r.v = 1.0 + r.v;
    return r;
  }
  if (n == 1) return u;
  const T f0 = pow_int(u.v, n);
  const T f1 = static_cast<double>(n) * pow_int(u.v, n - 1);
  const T f2 = static_cast<double>(n * (n - 1)) * pow_int(u.v, n - 2);
  return compose(u, f0, f1, f2);
}

}  // namespace pikan
