#pragma once

#include <array>
#include <cmath>

#include "gblobs/errors.hpp"

namespace gblobs {

using Vec3 = std::array<double, 3>;
/// Row-major 3x3 matrix: m[3*r + c].
using Mat3 = std::array<double, 9>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Mat3 mat3_identity() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

inline Vec3 mat_vec(const Mat3& m, const Vec3& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
          m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

inline Mat3 mat_mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
      r[3 * i + j] = s;
    }
  return r;
}

inline Mat3 transpose(const Mat3& m) {
  return {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
}

inline double det3(const Mat3& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

/// Rotation about +z by angle (radians).
inline Mat3 rotation_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c, -s, 0, s, c, 0, 0, 0, 1};
}

/// Rodrigues rotation about a (non-zero) axis by angle (radians).
inline Mat3 rotation_axis_angle(const Vec3& axis, double angle) {
  const double n = norm(axis);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("rotation axis must be non-zero and finite");
  const Vec3 u = (1.0 / n) * axis;
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  return {c + u[0] * u[0] * t,        u[0] * u[1] * t - u[2] * s, u[0] * u[2] * t + u[1] * s,
          u[1] * u[0] * t + u[2] * s, c + u[1] * u[1] * t,        u[1] * u[2] * t - u[0] * s,
          u[2] * u[0] * t - u[1] * s, u[2] * u[1] * t + u[0] * s, c + u[2] * u[2] * t};
}

/// Rigid body transform p -> R p + t.
struct RigidTransform {
  Mat3 rotation = mat3_identity();
  Vec3 translation = {0, 0, 0};

  static RigidTransform translate(const Vec3& t) { return {mat3_identity(), t}; }
  static RigidTransform rotate_z(double angle) { return {rotation_z(angle), {0, 0, 0}}; }

  Vec3 apply(const Vec3& p) const { return mat_vec(rotation, p) + translation; }

  /// Inverse transform: p -> R^T (p - t). Assumes a valid rotation.
  RigidTransform inverse() const {
    const Mat3 rt = transpose(rotation);
    const Vec3 t = mat_vec(rt, translation);
    return {rt, {-t[0], -t[1], -t[2]}};
  }

  /// Throws InvalidTransform unless rotation is orthonormal (R^T R = I within
  /// 1e-9 per entry) with determinant +1 within 1e-9.
  void validate() const {
    const Mat3 should_be_i = mat_mul(transpose(rotation), rotation);
    const Mat3 identity = mat3_identity();
    for (int i = 0; i < 9; ++i) {
      if (!std::isfinite(rotation[i]) || std::abs(should_be_i[i] - identity[i]) > 1e-9)
        throw InvalidTransform("rotation is not orthonormal");
    }
    if (std::abs(det3(rotation) - 1.0) > 1e-9)
      throw InvalidTransform("rotation determinant is not +1 (reflection or scaling)");
    for (double c : translation)
      if (!std::isfinite(c)) throw InvalidTransform("translation is not finite");
  }
};

}  // namespace gblobs
