#pragma once

// Forward-mode automatic differentiation.
//
// Dual<T> carries a value and one partial per active independent
// variable. T is either double or another Dual, so Dual<Dual<double>>
// differentiates code that itself differentiates (Hamiltonians that
// contain temperatures or chemical potentials read off a generating
// function). An empty partial vector means "all partials are zero";
// constants therefore cost no allocation.

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "portthermo/errors.hpp"

namespace portthermo::ad {

template <class T>
struct Dual;

template <class T>
inline constexpr int depth_v = 0;
template <class T>
inline constexpr int depth_v<Dual<T>> = 1 + depth_v<T>;

template <class T>
struct Dual {
  T v{};
  std::vector<T> d;

  Dual() = default;
  Dual(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
  template <class U = T, std::enable_if_t<!std::is_same_v<U, double>, int> = 0>
  Dual(const T& value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Dual(T value, std::vector<T> partials) : v(std::move(value)), d(std::move(partials)) {}

  [[nodiscard]] T partial(std::size_t i) const { return d.empty() ? T(0.0) : d[i]; }
  [[nodiscard]] bool is_constant() const { return d.empty(); }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
  return primal(x.v);
}

// ---- scalar (double) primitives with domain checks ----------------------

inline double recip(double x) {
  if (x == 0.0) throw DomainError("division by zero");
  return 1.0 / x;
}
inline double exp(double x) { return std::exp(x); }
inline double log(double x) {
  if (!(x > 0.0)) throw DomainError("ln of nonpositive argument");
  return std::log(x);
}
inline double sqrt(double x) {
  if (x < 0.0) throw DomainError("sqrt of negative argument");
  return std::sqrt(x);
}
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double pow(double a, double b) {
  if (a < 0.0 && std::trunc(b) != b) throw DomainError("non-integer power of negative base");
  if (a == 0.0 && b < 0.0) throw DomainError("division by zero in power");
  return std::pow(a, b);
}
inline double min(double a, double b) { return b < a ? b : a; }

// ---- Dual arithmetic ----------------------------------------------------

namespace detail {

template <class T, class F>
std::vector<T> map_partials(const std::vector<T>& a, F f) {
  std::vector<T> r;
  r.reserve(a.size());
  for (const auto& x : a) r.push_back(f(x));
  return r;
}

// r_i = fa(a_i) + fb(b_i), honouring the empty-means-zero convention.
template <class T, class FA, class FB>
std::vector<T> combine(const std::vector<T>& a, const std::vector<T>& b, FA fa, FB fb) {
  if (a.empty()) return map_partials(b, fb);
  if (b.empty()) return map_partials(a, fa);
  if (a.size() != b.size()) throw PreconditionError("dual numbers with different seed bases");
  std::vector<T> r;
  r.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r.push_back(fa(a[i]) + fb(b[i]));
  return r;
}

template <class T>
Dual<T> chain(const Dual<T>& x, T value, const T& slope) {
  return Dual<T>(std::move(value), map_partials(x.d, [&](const T& p) { return p * slope; }));
}

}  // namespace detail

template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return Dual<T>(-a.v, detail::map_partials(a.d, [](const T& p) { return -p; }));
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  auto id = [](const T& p) { return p; };
  return Dual<T>(a.v + b.v, detail::combine(a.d, b.d, id, id));
}
template <class T>
Dual<T> operator+(const Dual<T>& a, double b) {
  return Dual<T>(a.v + b, a.d);
}
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) {
  return Dual<T>(a + b.v, b.d);
}

template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return Dual<T>(a.v - b.v, detail::combine(
                                a.d, b.d, [](const T& p) { return p; }, [](const T& p) { return -p; }));
}
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) {
  return Dual<T>(a.v - b, a.d);
}
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) {
  return Dual<T>(a - b.v, detail::map_partials(b.d, [](const T& p) { return -p; }));
}

template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return Dual<T>(a.v * b.v, detail::combine(
                                a.d, b.d, [&](const T& p) { return p * b.v; },
                                [&](const T& p) { return a.v * p; }));
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) {
  return Dual<T>(a.v * b, detail::map_partials(a.d, [&](const T& p) { return p * b; }));
}
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) {
  return b * a;
}

template <class T>
Dual<T> recip(const Dual<T>& b) {
  const T inv = recip(b.v);
  const T slope = -(inv * inv);
  return detail::chain(b, inv, slope);
}

template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  const T inv = recip(b.v);
  T value = a.v * inv;
  auto partials = detail::combine(
      a.d, b.d, [&](const T& p) { return p * inv; }, [&](const T& p) { return -(value * inv) * p; });
  return Dual<T>(std::move(value), std::move(partials));
}
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) {
  const double inv = recip(b);
  return a * inv;
}
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) {
  return a * recip(b);
}

template <class T, class U>
Dual<T>& operator+=(Dual<T>& a, const U& b) {
  a = a + b;
  return a;
}
template <class T, class U>
Dual<T>& operator-=(Dual<T>& a, const U& b) {
  a = a - b;
  return a;
}
template <class T, class U>
Dual<T>& operator*=(Dual<T>& a, const U& b) {
  a = a * b;
  return a;
}
template <class T, class U>
Dual<T>& operator/=(Dual<T>& a, const U& b) {
  a = a / b;
  return a;
}

// ---- Dual elementary functions -------------------------------------------

template <class T>
Dual<T> exp(const Dual<T>& x) {
  T e = exp(x.v);
  if (x.d.empty()) return Dual<T>(e);
  return detail::chain(x, e, e);
}

template <class T>
Dual<T> log(const Dual<T>& x) {
  T l = log(x.v);
  if (x.d.empty()) return Dual<T>(l);
  return detail::chain(x, std::move(l), recip(x.v));
}

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  T s = sqrt(x.v);
  if (x.d.empty()) return Dual<T>(s);
  const T slope = recip(s * 2.0);
  return detail::chain(x, std::move(s), slope);
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
  T s = sin(x.v);
  if (x.d.empty()) return Dual<T>(s);
  return detail::chain(x, std::move(s), cos(x.v));
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
  T c = cos(x.v);
  if (x.d.empty()) return Dual<T>(c);
  return detail::chain(x, std::move(c), -sin(x.v));
}

template <class T>
Dual<T> pow(const Dual<T>& a, const Dual<T>& b) {
  if (b.d.empty()) {
    T value = pow(a.v, b.v);
    if (a.d.empty()) return Dual<T>(value);
    const T slope = b.v * pow(a.v, b.v - 1.0);
    return detail::chain(a, std::move(value), slope);
  }
  if (!(primal(a.v) > 0.0)) throw DomainError("power with variable exponent needs a positive base");
  T value = pow(a.v, b.v);
  const T la = log(a.v);
  auto partials = detail::combine(
      a.d, b.d, [&](const T& p) { return p * (b.v * pow(a.v, b.v - 1.0)); },
      [&](const T& p) { return p * (value * la); });
  return Dual<T>(std::move(value), std::move(partials));
}
template <class T>
Dual<T> pow(const Dual<T>& a, double b) {
  return pow(a, Dual<T>(b));
}
template <class T>
Dual<T> pow(double a, const Dual<T>& b) {
  return pow(Dual<T>(a), b);
}

template <class T>
Dual<T> min(const Dual<T>& a, const Dual<T>& b) {
  return primal(b) < primal(a) ? b : a;
}

// ---- seeding -----------------------------------------------------------

/// An independent variable: value `x`, unit seed in slot `index` of `count`.
template <class N>
Dual<N> variable(const N& x, std::size_t index, std::size_t count) {
  Dual<N> r(x);
  r.d.assign(count, N(0.0));
  r.d[index] = N(1.0);
  return r;
}

}  // namespace portthermo::ad
