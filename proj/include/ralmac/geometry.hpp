#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ralmac {

/// Physical position or displacement in millimeters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](std::size_t axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double& operator[](std::size_t axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator-(const Point3& a) { return {-a.x, -a.y, -a.z}; }
  friend Point3 operator*(double s, const Point3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend Point3 operator*(const Point3& a, double s) { return s * a; }
  friend bool operator==(const Point3&, const Point3&) = default;

  bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Point3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }

/// Continuous (possibly fractional) voxel index.
struct Index3 {
  double i = 0.0;
  double j = 0.0;
  double k = 0.0;
  friend bool operator==(const Index3&, const Index3&) = default;
};

struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const { return nx * ny * nz; }
  std::size_t operator[](std::size_t axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Grid geometry shared by volumes and masks: axis-aligned, origin at the
/// center of voxel (0,0,0).
struct Grid {
  Dims dims;
  Point3 spacing{1.0, 1.0, 1.0};
  Point3 origin;

  std::size_t linear(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims.nx * (j + dims.ny * k);
  }
  bool contains_index(const Index3& idx) const;
  double min_spacing() const;
  friend bool operator==(const Grid&, const Grid&) = default;
};

Point3 voxel_to_physical(const Grid& grid, const Index3& index);
Index3 physical_to_voxel(const Grid& grid, const Point3& p);

/// Axis-aligned scalar volume with voxels stored x-fastest.
class Volume {
 public:
  Volume() = default;
  /// Zero-filled volume. Throws SpecError on empty dims or non-positive spacing.
  explicit Volume(Grid grid);
  Volume(Grid grid, std::vector<double> voxels);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims; }
  const Point3& spacing() const { return grid_.spacing; }
  const Point3& origin() const { return grid_.origin; }

  std::span<const double> voxels() const { return voxels_; }
  std::span<double> voxels() { return voxels_; }
  std::size_t size() const { return voxels_.size(); }

  double at(std::size_t i, std::size_t j, std::size_t k) const { return voxels_[grid_.linear(i, j, k)]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) { return voxels_[grid_.linear(i, j, k)]; }

  /// Trilinear interpolation at a continuous index; `fill` outside [0, n-1].
  double interpolate(const Index3& idx, double fill = 0.0) const;
  double sample(const Point3& p, double fill = 0.0) const { return interpolate(physical_to_voxel(grid_, p), fill); }

  /// (min, max) over all voxels.
  std::array<double, 2> intensity_range() const;

 private:
  Grid grid_;
  std::vector<double> voxels_;
};

inline Point3 voxel_to_physical(const Volume& v, const Index3& index) { return voxel_to_physical(v.grid(), index); }
inline Index3 physical_to_voxel(const Volume& v, const Point3& p) { return physical_to_voxel(v.grid(), p); }

}  // namespace ralmac
