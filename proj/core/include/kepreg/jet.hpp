#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace kepreg {

inline constexpr int kMaxJetVars = 16;

using JetVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxJetVars, 1>;
using JetMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxJetVars, kMaxJetVars>;

// Truncated Taylor expansion of a scalar function of n variables.
// Order 1 carries value and gradient; order 2 adds the Hessian.
template <int Order>
class Jet {
  static_assert(Order == 1 || Order == 2);

 public:
  static constexpr int order = Order;

  double v = 0.0;
  JetVec g;
  JetMat h;

  Jet() = default;

  static Jet constant(double value, int n) {
    Jet r;
    r.v = value;
    r.g = JetVec::Zero(n);
    if constexpr (Order == 2) r.h = JetMat::Zero(n, n);
    return r;
  }

  static Jet variable(double value, int index, int n) {
    Jet r = constant(value, n);
    r.g[index] = 1.0;
    return r;
  }

  int size() const { return static_cast<int>(g.size()); }

  // Compose with a scalar function f, given f(v), f'(v), f''(v).
  Jet apply(double f0, double f1, double f2) const {
    Jet r;
    r.v = f0;
    r.g = f1 * g;
    if constexpr (Order == 2) r.h = f1 * h + f2 * (g * g.transpose());
    return r;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    if constexpr (Order == 2) h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    if constexpr (Order == 2) h -= o.h;
    return *this;
  }
  Jet& operator*=(double c) {
    v *= c;
    g *= c;
    if constexpr (Order == 2) h *= c;
    return *this;
  }
  Jet& operator+=(double c) {
    v += c;
    return *this;
  }
  Jet& operator-=(double c) {
    v -= c;
    return *this;
  }
};

template <int O>
Jet<O> operator+(Jet<O> a, const Jet<O>& b) { return a += b; }
template <int O>
Jet<O> operator-(Jet<O> a, const Jet<O>& b) { return a -= b; }
template <int O>
Jet<O> operator+(Jet<O> a, double c) { return a += c; }
template <int O>
Jet<O> operator+(double c, Jet<O> a) { return a += c; }
template <int O>
Jet<O> operator-(Jet<O> a, double c) { return a -= c; }
template <int O>
Jet<O> operator-(double c, const Jet<O>& a) {
  Jet<O> r = a;
  r *= -1.0;
  return r += c;
}
template <int O>
Jet<O> operator-(Jet<O> a) { return a *= -1.0; }
template <int O>
Jet<O> operator*(Jet<O> a, double c) { return a *= c; }
template <int O>
Jet<O> operator*(double c, Jet<O> a) { return a *= c; }

template <int O>
Jet<O> operator*(const Jet<O>& a, const Jet<O>& b) {
  Jet<O> r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  if constexpr (O == 2) {
    JetMat outer = a.g * b.g.transpose();
    r.h = a.v * b.h + b.v * a.h + outer + outer.transpose();
  }
  return r;
}

template <int O>
Jet<O> reciprocal(const Jet<O>& a) {
  const double inv = 1.0 / a.v;
  return a.apply(inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int O>
Jet<O> operator/(const Jet<O>& a, const Jet<O>& b) { return a * reciprocal(b); }
template <int O>
Jet<O> operator/(Jet<O> a, double c) { return a *= (1.0 / c); }
template <int O>
Jet<O> operator/(double c, const Jet<O>& a) { return c * reciprocal(a); }

template <int O>
Jet<O> sqrt(const Jet<O>& a) {
  const double s = std::sqrt(a.v);
  return a.apply(s, 0.5 / s, -0.25 / (s * a.v));
}

template <int O>
Jet<O> sin(const Jet<O>& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return a.apply(s, c, -s);
}

template <int O>
Jet<O> cos(const Jet<O>& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return a.apply(c, -s, -c);
}

// Uniform helpers so generic code can be written once for double and jets.
inline double value_of(double x) { return x; }
template <int O>
double value_of(const Jet<O>& x) { return x.v; }

template <class S>
S make_constant(double value, const S& like);
template <>
inline double make_constant<double>(double value, const double&) { return value; }
template <class S>
S make_constant(double value, const S& like) { return S::constant(value, like.size()); }

using std::cos;
using std::sin;
using std::sqrt;

}  // namespace kepreg
