#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <ostream>

namespace garnier {

using Cx = std::complex<double>;

inline constexpr Cx kI{0.0, 1.0};

inline bool is_finite(Cx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Complex 2x2 matrix stored row-major: (a11, a12, a21, a22).
struct Mat2 {
  Cx a11{}, a12{}, a21{}, a22{};

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 zero() { return {}; }
  static constexpr Mat2 diag(Cx d1, Cx d2) { return {d1, 0.0, 0.0, d2}; }

  Cx trace() const { return a11 + a22; }
  Cx det() const { return a11 * a22 - a12 * a21; }

  Mat2 inverse() const {
    const Cx d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }

  /// Largest entry modulus.
  double max_abs() const {
    return std::max(std::max(std::abs(a11), std::abs(a12)), std::max(std::abs(a21), std::abs(a22)));
  }

  bool finite() const { return is_finite(a11) && is_finite(a12) && is_finite(a21) && is_finite(a22); }

  std::array<Cx, 4> entries() const { return {a11, a12, a21, a22}; }

  /// Both eigenvalues, ordered lexicographically by (Re, Im).
  std::array<Cx, 2> eigenvalues() const;

  Mat2& operator+=(const Mat2& o) {
    a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
    return *this;
  }
  Mat2& operator-=(const Mat2& o) {
    a11 -= o.a11; a12 -= o.a12; a21 -= o.a21; a22 -= o.a22;
    return *this;
  }
  Mat2& operator*=(Cx s) {
    a11 *= s; a12 *= s; a21 *= s; a22 *= s;
    return *this;
  }
  Mat2& operator/=(Cx s) { return *this *= (1.0 / s); }
};

inline Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
inline Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
inline Mat2 operator-(const Mat2& a) { return {-a.a11, -a.a12, -a.a21, -a.a22}; }
inline Mat2 operator*(Mat2 a, Cx s) { return a *= s; }
inline Mat2 operator*(Cx s, Mat2 a) { return a *= s; }
inline Mat2 operator*(Mat2 a, double s) { return a *= Cx(s); }
inline Mat2 operator*(double s, Mat2 a) { return a *= Cx(s); }
inline Mat2 operator/(Mat2 a, Cx s) { return a /= s; }
inline Mat2 operator/(Mat2 a, double s) { return a /= Cx(s); }

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

inline bool operator==(const Mat2& a, const Mat2& b) {
  return a.a11 == b.a11 && a.a12 == b.a12 && a.a21 == b.a21 && a.a22 == b.a22;
}

inline double max_abs_diff(const Mat2& a, const Mat2& b) { return (a - b).max_abs(); }

std::ostream& operator<<(std::ostream& os, const Mat2& m);

}  // namespace garnier
