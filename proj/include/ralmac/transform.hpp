#pragma once

#include <array>

#include "ralmac/geometry.hpp"

namespace ralmac {

using Matrix3 = std::array<std::array<double, 3>, 3>;

Matrix3 identity_matrix();
Matrix3 multiply(const Matrix3& a, const Matrix3& b);
Matrix3 transpose(const Matrix3& m);
Point3 multiply(const Matrix3& m, const Point3& p);
double determinant(const Matrix3& m);

struct EulerAngles {
  double a1 = 0.0;  // about x (radians)
  double a2 = 0.0;  // about y
  double a3 = 0.0;  // about z
  friend bool operator==(const EulerAngles&, const EulerAngles&) = default;
};

/// R = Rx(a1) * Ry(a2) * Rz(a3) with
///   Rx = [1 0 0; 0 c1 s1; 0 -s1 c1]
///   Ry = [c2 0 -s2; 0 1 0; s2 0 c2]
///   Rz = [c3 s3 0; -s3 c3 0; 0 0 1]
Matrix3 rotation_matrix(const EulerAngles& angles);

/// Inverse of rotation_matrix for a proper rotation; a2 is returned in
/// [-pi/2, pi/2].
EulerAngles angles_from_matrix(const Matrix3& r);

/// 6-DOF rigid map T(p) = center + R (p - center) + translation.
struct RigidTransform {
  EulerAngles angles;
  Point3 translation;
  Point3 center;

  Matrix3 rotation() const { return rotation_matrix(angles); }
  bool is_finite() const;
  /// Same mapping re-expressed about another rotation center.
  RigidTransform recentered(const Point3& new_center) const;
  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

Point3 apply_transform(const RigidTransform& t, const Point3& p);
RigidTransform invert_transform(const RigidTransform& t);
/// (a o b)(p) = a(b(p)), expressed about b's center.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

}  // namespace ralmac
