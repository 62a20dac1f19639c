#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Core>

#include "ds/errors.hpp"

namespace ds {

using cd = std::complex<double>;

inline constexpr double kExpRealCap = 200.0;      // exp() argument guard, real part
inline constexpr double kSingularRelTol = 1e-12;  // |det| threshold, relative to norm^2
inline constexpr double kPoleRelTol = 1e-10;      // |lam^2 - lam_l^2| threshold
inline constexpr std::size_t kMaxDepth = 8;       // chain depth cap

// First-order jet in the two spatial directions: carries a value and exact
// partial derivatives d/dx, d/dy. Time dependence is handled by finite
// differences at a higher level, so no t-slot is needed.
struct Jet {
  cd v{};
  cd dx{};
  cd dy{};

  constexpr Jet() = default;
  constexpr Jet(const cd& value) : v(value) {}
  constexpr Jet(double value) : v(value) {}
  constexpr Jet(const cd& value, const cd& ddx, const cd& ddy) : v(value), dx(ddx), dy(ddy) {}

  // Seeded independent variables.
  static constexpr Jet var_x(double x) { return Jet(cd(x), cd(1.0), cd(0.0)); }
  static constexpr Jet var_y(double y) { return Jet(cd(y), cd(0.0), cd(1.0)); }

  Jet operator-() const { return Jet(-v, -dx, -dy); }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    dx += o.dx;
    dy += o.dy;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    dx -= o.dx;
    dy -= o.dy;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    dx = dx * o.v + v * o.dx;
    dy = dy * o.v + v * o.dy;
    v *= o.v;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    const cd iv = cd(1.0) / o.v;
    const cd qv = v * iv;
    dx = (dx - qv * o.dx) * iv;
    dy = (dy - qv * o.dy) * iv;
    v = qv;
    return *this;
  }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }

inline bool operator==(const Jet& a, const Jet& b) {
  return a.v == b.v && a.dx == b.dx && a.dy == b.dy;
}
inline bool operator!=(const Jet& a, const Jet& b) { return !(a == b); }

// exp on jets with the overflow guard shared by every exponential in the
// library: arguments with real part above kExpRealCap abort the evaluation
// instead of silently producing inf.
inline Jet jexp(const Jet& a) {
  if (a.v.real() > kExpRealCap) {
    throw Overflow("exp argument real part " + std::to_string(a.v.real()) +
                   " exceeds cap " + std::to_string(kExpRealCap));
  }
  const cd e = std::exp(a.v);
  return Jet(e, e * a.dx, e * a.dy);
}

inline cd cexp_guarded(const cd& a) {
  if (a.real() > kExpRealCap) {
    throw Overflow("exp argument real part " + std::to_string(a.real()) +
                   " exceeds cap " + std::to_string(kExpRealCap));
  }
  return std::exp(a);
}

inline double mag(const cd& z) { return std::abs(z); }
inline double mag(const Jet& j) { return std::abs(j.v); }

}  // namespace ds

// Eigen needs the scalar traits before any Matrix<Jet, ...> is instantiated.
namespace Eigen {

template <>
struct NumTraits<ds::Jet> {
  using Real = ds::Jet;
  using NonInteger = ds::Jet;
  using Nested = ds::Jet;
  using Literal = ds::Jet;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 3,
    AddCost = 6,
    MulCost = 12
  };
  static inline Real epsilon() { return ds::Jet(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return ds::Jet(1e-12); }
  static inline Real highest() { return ds::Jet(std::numeric_limits<double>::max()); }
  static inline Real lowest() { return ds::Jet(std::numeric_limits<double>::lowest()); }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

}  // namespace Eigen

namespace ds {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using Mat2J = Eigen::Matrix<Jet, 2, 2>;
using Vec2J = Eigen::Matrix<Jet, 2, 1>;

inline Mat2 values(const Mat2J& m) {
  Mat2 out;
  out << m(0, 0).v, m(0, 1).v, m(1, 0).v, m(1, 1).v;
  return out;
}

inline Mat2J lift(const Mat2& m) {
  Mat2J out;
  out(0, 0) = Jet(m(0, 0));
  out(0, 1) = Jet(m(0, 1));
  out(1, 0) = Jet(m(1, 0));
  out(1, 1) = Jet(m(1, 1));
  return out;
}

template <typename S>
S det2(const Eigen::Matrix<S, 2, 2>& m) {
  return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

template <typename S>
double frob2(const Eigen::Matrix<S, 2, 2>& m) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double a = mag(m(i, j));
      s += a * a;
    }
  return std::sqrt(s);
}

template <typename S>
Eigen::Matrix<S, 2, 2> adj2(const Eigen::Matrix<S, 2, 2>& m) {
  Eigen::Matrix<S, 2, 2> out;
  out(0, 0) = m(1, 1);
  out(0, 1) = -m(0, 1);
  out(1, 0) = -m(1, 0);
  out(1, 1) = m(0, 0);
  return out;
}

// 2x2 inverse by adjugate with the shared singularity guard:
// |det| <= kSingularRelTol * max(1, ||m||^2) raises SingularMatrix.
template <typename S>
Eigen::Matrix<S, 2, 2> inv2(const Eigen::Matrix<S, 2, 2>& m) {
  const S det = det2(m);
  const double nrm = frob2(m);
  if (mag(det) <= kSingularRelTol * std::max(1.0, nrm * nrm)) {
    throw SingularMatrix("2x2 inverse: |det| = " + std::to_string(mag(det)) +
                         " below tolerance");
  }
  Eigen::Matrix<S, 2, 2> out = adj2(m);
  const S inv_det = S(1.0) / det;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(i, j) = out(i, j) * inv_det;
  return out;
}

template <typename S>
double max_abs_diff(const Eigen::Matrix<S, 2, 2>& a, const Eigen::Matrix<S, 2, 2>& b) {
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) worst = std::max(worst, mag(S(a(i, j) - b(i, j))));
  return worst;
}

}  // namespace ds
