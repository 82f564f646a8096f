#pragma once

#include "wavegal/rational.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>
#include <vector>

namespace wavegal {

using Mp = boost::multiprecision::mpfr_float;

// Sets the working precision of Mp values created afterwards.
inline void set_mp_digits(unsigned digits) { Mp::default_precision(digits); }

template <class R>
R to_real(const Q& q) {
  if constexpr (std::is_same_v<R, double>) {
    return q.convert_to<double>();
  } else {
    return R(numerator(q)) / R(denominator(q));
  }
}

template <class R>
R pi_value() {
  if constexpr (std::is_same_v<R, double>) {
    return M_PI;
  } else {
    R p;
    mpfr_const_pi(p.backend().data(), MPFR_RNDN);
    return p;
  }
}

template <class R>
double to_double(const R& x) {
  if constexpr (std::is_same_v<R, double>) {
    return x;
  } else {
    return x.template convert_to<double>();
  }
}

// Minimal complex number that works over mpfr_float as well as double.
template <class R>
struct Cx {
  R re{0}, im{0};
  Cx() = default;
  Cx(R r) : re(std::move(r)), im(0) {}
  Cx(R r, R i) : re(std::move(r)), im(std::move(i)) {}
  template <class T, class = std::enable_if_t<std::is_arithmetic_v<T>>>
  Cx(T r) : re(r), im(0) {}

  Cx& operator+=(const Cx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cx& operator-=(const Cx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Cx& operator*=(const Cx& o) {
    R r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = r;
    return *this;
  }
  Cx& operator/=(const Cx& o) {
    R d = o.re * o.re + o.im * o.im;
    R r = (re * o.re + im * o.im) / d;
    im = (im * o.re - re * o.im) / d;
    re = r;
    return *this;
  }
  friend Cx operator+(Cx a, const Cx& b) { return a += b; }
  friend Cx operator-(Cx a, const Cx& b) { return a -= b; }
  friend Cx operator*(Cx a, const Cx& b) { return a *= b; }
  friend Cx operator/(Cx a, const Cx& b) { return a /= b; }
  Cx operator-() const { return Cx(-re, -im); }
  bool operator==(const Cx& o) const { return re == o.re && im == o.im; }
  bool is_zero() const { return re == 0 && im == 0; }
};

template <class R>
Cx<R> conj(const Cx<R>& z) {
  return Cx<R>(z.re, -z.im);
}
template <class R>
R norm2(const Cx<R>& z) {
  return z.re * z.re + z.im * z.im;
}
template <class R>
R abs(const Cx<R>& z) {
  using std::sqrt;
  return sqrt(norm2(z));
}
// e^{i theta}
template <class R>
Cx<R> expi(const R& theta) {
  using std::cos;
  using std::sin;
  return Cx<R>(cos(theta), sin(theta));
}
template <class R>
std::complex<double> to_std(const Cx<R>& z) {
  return {to_double(z.re), to_double(z.im)};
}

// Gauss-Legendre nodes and weights on [0,1].
template <class R>
void gauss_legendre01(int n, std::vector<R>& x, std::vector<R>& w) {
  using std::abs;
  using std::cos;
  x.assign(n, R(0));
  w.assign(n, R(0));
  R pi = pi_value<R>();
  R eps;
  if constexpr (std::is_same_v<R, double>)
    eps = 1e-15;
  else
    eps = boost::multiprecision::pow(R(10), -R(int(Mp::default_precision())) + 3);
  for (int i = 0; i < n; ++i) {
    R z = cos(pi * (R(i) + R(0.75)) / (R(n) + R(0.5)));
    R pp = 0;
    for (int it = 0; it < 100; ++it) {
      R p1 = 1, p2 = 0;
      for (int j = 0; j < n; ++j) {
        R p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1);
      R dz = p1 / pp;
      z -= dz;
      if (abs(dz) < eps) break;
    }
    x[i] = (1 - z) / 2;
    w[i] = 1 / ((1 - z * z) * pp * pp);
  }
}

// Dense LU with partial pivoting over Cx<R>; solves A x = b in place.
template <class R>
bool lu_solve(std::vector<Cx<R>> a, int n, std::vector<Cx<R>>& b) {
  for (int c = 0; c < n; ++c) {
    int p = c;
    R best = norm2(a[size_t(c) * n + c]);
    for (int i = c + 1; i < n; ++i) {
      R v = norm2(a[size_t(i) * n + c]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0) return false;
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(a[size_t(p) * n + j], a[size_t(c) * n + j]);
      std::swap(b[p], b[c]);
    }
    Cx<R> inv = Cx<R>(1) / a[size_t(c) * n + c];
    for (int i = c + 1; i < n; ++i) {
      Cx<R> f = a[size_t(i) * n + c] * inv;
      if (f.is_zero()) continue;
      for (int j = c; j < n; ++j) a[size_t(i) * n + j] -= f * a[size_t(c) * n + j];
      b[i] -= f * b[c];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    Cx<R> s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[size_t(i) * n + j] * b[j];
    b[i] = s / a[size_t(i) * n + i];
  }
  return true;
}

}  // namespace wavegal
