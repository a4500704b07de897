#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace cosserat {

/// Forward-mode dual number carrying N partial derivatives. Nesting
/// (Dual<Dual<double, N>, N>) yields exact second derivatives.
template <class S, int N>
struct Dual {
  S v{};
  std::array<S, N> d{};

  Dual() = default;
  Dual(double c) : v(c) {}  // NOLINT: implicit constants are the point
  template <class U = S, class = std::enable_if_t<!std::is_same_v<U, double>>>
  Dual(const S& value) : v(value) {}  // NOLINT

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[static_cast<size_t>(i)] += o.d[static_cast<size_t>(i)];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[static_cast<size_t>(i)] -= o.d[static_cast<size_t>(i)];
    return *this;
  }
};

template <class S, int N>
Dual<S, N> operator+(Dual<S, N> a, const Dual<S, N>& b) {
  a += b;
  return a;
}
template <class S, int N>
Dual<S, N> operator-(Dual<S, N> a, const Dual<S, N>& b) {
  a -= b;
  return a;
}
template <class S, int N>
Dual<S, N> operator-(const Dual<S, N>& a) {
  Dual<S, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[static_cast<size_t>(i)] = -a.d[static_cast<size_t>(i)];
  return r;
}
template <class S, int N>
Dual<S, N> operator*(const Dual<S, N>& a, const Dual<S, N>& b) {
  Dual<S, N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i)
    r.d[static_cast<size_t>(i)] = a.d[static_cast<size_t>(i)] * b.v + a.v * b.d[static_cast<size_t>(i)];
  return r;
}
template <class S, int N>
Dual<S, N> operator*(double c, const Dual<S, N>& a) {
  Dual<S, N> r;
  r.v = c * a.v;
  for (int i = 0; i < N; ++i) r.d[static_cast<size_t>(i)] = c * a.d[static_cast<size_t>(i)];
  return r;
}
template <class S, int N>
Dual<S, N> operator*(const Dual<S, N>& a, double c) {
  return c * a;
}
template <class S, int N>
Dual<S, N> operator+(const Dual<S, N>& a, double c) {
  Dual<S, N> r = a;
  r.v += c;
  return r;
}
template <class S, int N>
Dual<S, N> operator+(double c, const Dual<S, N>& a) {
  return a + c;
}
template <class S, int N>
Dual<S, N> operator-(const Dual<S, N>& a, double c) {
  Dual<S, N> r = a;
  r.v -= c;
  return r;
}
template <class S, int N>
Dual<S, N> operator-(double c, const Dual<S, N>& a) {
  Dual<S, N> r = -a;
  r.v += c;
  return r;
}

using std::cos;
using std::sin;

template <class S, int N>
Dual<S, N> sin(const Dual<S, N>& a) {
  Dual<S, N> r;
  r.v = sin(a.v);
  const S c = cos(a.v);
  for (int i = 0; i < N; ++i) r.d[static_cast<size_t>(i)] = c * a.d[static_cast<size_t>(i)];
  return r;
}
template <class S, int N>
Dual<S, N> cos(const Dual<S, N>& a) {
  Dual<S, N> r;
  r.v = cos(a.v);
  const S ms = -1.0 * sin(a.v);
  for (int i = 0; i < N; ++i) r.d[static_cast<size_t>(i)] = ms * a.d[static_cast<size_t>(i)];
  return r;
}

inline double value_of(double x) { return x; }
template <class S, int N>
double value_of(const Dual<S, N>& x) {
  return value_of(x.v);
}

}  // namespace cosserat
