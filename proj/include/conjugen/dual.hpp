#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace conjugen {

using cdouble = std::complex<double>;

/// Forward-mode dual number over an arbitrary scalar field T. With
/// T = cdouble a Dual carries a value and all first partials with respect
/// to a fixed set of variables; nesting (Dual<Dual<cdouble>>) yields exact
/// second partials in a single evaluation pass.
template <class T>
struct Dual {
  T value{};
  std::vector<T> part;

  Dual() = default;
  Dual(T v, std::vector<T> p) : value(std::move(v)), part(std::move(p)) {}
};

inline cdouble zero_like(const cdouble&) { return {}; }

template <class T>
Dual<T> zero_like(const Dual<T>& x) {
  Dual<T> z;
  z.value = zero_like(x.value);
  z.part.assign(x.part.size(), zero_like(x.value));
  return z;
}

/// Builds a constant with the shape of `exemplar` (all derivative slots zero).
inline cdouble constant_like(const cdouble&, cdouble c) { return c; }

template <class T>
Dual<T> constant_like(const Dual<T>& exemplar, cdouble c) {
  Dual<T> r = zero_like(exemplar);
  r.value = constant_like(exemplar.value, c);
  return r;
}

/// Innermost (underlying complex) value of a possibly nested dual.
inline cdouble primal(const cdouble& x) { return x; }

template <class T>
cdouble primal(const Dual<T>& x) {
  return primal(x.value);
}

template <class T>
Dual<T> operator-(const Dual<T>& a) {
  Dual<T> r = a;
  r.value = -a.value;
  for (std::size_t i = 0; i < r.part.size(); ++i) r.part[i] = -a.part[i];
  return r;
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r = a;
  r.value = a.value + b.value;
  for (std::size_t i = 0; i < r.part.size(); ++i) r.part[i] = a.part[i] + b.part[i];
  return r;
}

template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r = a;
  r.value = a.value - b.value;
  for (std::size_t i = 0; i < r.part.size(); ++i) r.part[i] = a.part[i] - b.part[i];
  return r;
}

template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r = a;
  r.value = a.value * b.value;
  for (std::size_t i = 0; i < r.part.size(); ++i)
    r.part[i] = a.value * b.part[i] + a.part[i] * b.value;
  return r;
}

template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r = a;
  r.value = a.value / b.value;
  for (std::size_t i = 0; i < r.part.size(); ++i)
    r.part[i] = (a.part[i] - r.value * b.part[i]) / b.value;
  return r;
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  Dual<T> r = a;
  r.value = exp(a.value);
  for (std::size_t i = 0; i < r.part.size(); ++i) r.part[i] = r.value * a.part[i];
  return r;
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  Dual<T> r = a;
  r.value = sin(a.value);
  T c = cos(a.value);
  for (std::size_t i = 0; i < r.part.size(); ++i) r.part[i] = c * a.part[i];
  return r;
}

template <class T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  Dual<T> r = a;
  r.value = cos(a.value);
  T s = sin(a.value);
  for (std::size_t i = 0; i < r.part.size(); ++i) r.part[i] = -(s * a.part[i]);
  return r;
}

template <class T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  Dual<T> r = a;
  r.value = log(a.value);
  for (std::size_t i = 0; i < r.part.size(); ++i) r.part[i] = a.part[i] / a.value;
  return r;
}

/// x^e for e >= 0 by repeated squaring. Negative exponents are handled by the
/// expression evaluator (which owns the pole check).
template <class S>
S pow_nonneg(const S& x, long e) {
  S result = constant_like(x, cdouble{1.0, 0.0});
  S base = x;
  while (e > 0) {
    if (e & 1) result = result * base;
    base = base * base;
    e >>= 1;
  }
  return result;
}

}  // namespace conjugen
