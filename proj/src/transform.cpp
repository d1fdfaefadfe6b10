#include "ralmac/transform.hpp"

#include <algorithm>
#include <cmath>

namespace ralmac {

Matrix3 identity_matrix() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
  Matrix3 out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
    }
  }
  return out;
}

Matrix3 transpose(const Matrix3& m) {
  Matrix3 out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r][c] = m[c][r];
  }
  return out;
}

Point3 multiply(const Matrix3& m, const Point3& p) {
  return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z, m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
          m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z};
}

double determinant(const Matrix3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Matrix3 rotation_matrix(const EulerAngles& angles) {
  const double c1 = std::cos(angles.a1), s1 = std::sin(angles.a1);
  const double c2 = std::cos(angles.a2), s2 = std::sin(angles.a2);
  const double c3 = std::cos(angles.a3), s3 = std::sin(angles.a3);
  // Closed form of Rx * Ry * Rz.
  return {{{c2 * c3, c2 * s3, -s2},
           {-c1 * s3 + s1 * s2 * c3, c1 * c3 + s1 * s2 * s3, s1 * c2},
           {s1 * s3 + c1 * s2 * c3, -s1 * c3 + c1 * s2 * s3, c1 * c2}}};
}

EulerAngles angles_from_matrix(const Matrix3& r) {
  EulerAngles a;
  a.a2 = std::asin(std::clamp(-r[0][2], -1.0, 1.0));
  if (std::abs(r[0][2]) < 1.0 - 1e-12) {
    a.a1 = std::atan2(r[1][2], r[2][2]);
    a.a3 = std::atan2(r[0][1], r[0][0]);
  } else {
    // Gimbal lock: only a1 - a3 (or a1 + a3) is determined; put it all in a1.
    a.a3 = 0.0;
    a.a1 = std::atan2(-r[2][1], r[1][1]);
  }
  return a;
}

bool RigidTransform::is_finite() const {
  return std::isfinite(angles.a1) && std::isfinite(angles.a2) && std::isfinite(angles.a3) &&
         translation.is_finite() && center.is_finite();
}

RigidTransform RigidTransform::recentered(const Point3& new_center) const {
  // c + R(p - c) + t == c' + R(p - c') + t'  =>  t' = t + (c - c') - R(c - c')
  const Point3 d = center - new_center;
  return {angles, translation + d - multiply(rotation(), d), new_center};
}

Point3 apply_transform(const RigidTransform& t, const Point3& p) {
  return t.center + multiply(t.rotation(), p - t.center) + t.translation;
}

RigidTransform invert_transform(const RigidTransform& t) {
  // p = c + R^T (q - c - t)  ->  same center, rotation R^T, translation -R^T t
  const Matrix3 rt = transpose(t.rotation());
  return {angles_from_matrix(rt), -multiply(rt, t.translation), t.center};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  const Matrix3 r = multiply(a.rotation(), b.rotation());
  const Point3 c = b.center;
  // Image of the center under a(b(.)) fixes the translation.
  const Point3 image = apply_transform(a, apply_transform(b, c));
  return {angles_from_matrix(r), image - c, c};
}

}  // namespace ralmac
