#pragma once

#include <cstdint>
#include <vector>

#include "ralmac/geometry.hpp"
#include "ralmac/transform.hpp"

namespace ralmac {

/// Boolean voxel mask on the geometry of its source volume.
struct BinaryMask {
  Grid grid;
  std::vector<std::uint8_t> voxels;

  BinaryMask() = default;
  explicit BinaryMask(const Grid& g) : grid(g), voxels(g.dims.count(), 0) {}

  std::size_t count() const;
  bool empty() const { return count() == 0; }
};

/// Threshold at `threshold` (>=) without component filtering.
BinaryMask threshold_mask(const Volume& v, double threshold);

/// Keeps the largest 6-connected component (first in scan order on ties).
BinaryMask largest_component(const BinaryMask& m);

/// Threshold then largest component; throws EmptyMask when nothing survives.
BinaryMask preprocess_mask(const Volume& v, double body_threshold);

/// Centroid (mm) and second central moments (mm^2) of the true voxels.
struct MaskMoments {
  Point3 centroid;
  Matrix3 covariance{};
  std::size_t count = 0;
};

MaskMoments mask_moments(const BinaryMask& m);

/// Largest distance (mm) from the mask centroid to any true voxel center.
double mask_radius(const BinaryMask& m);

/// 2|A n B| / (|A| + |B|); masks must share geometry.
double dice(const BinaryMask& a, const BinaryMask& b);

/// Box dilation reaching `radius_mm` along each axis.
BinaryMask dilate(const BinaryMask& m, double radius_mm);

/// Voxels outside the mask replaced by `fill`.
Volume apply_mask(const Volume& v, const BinaryMask& m, double fill);

}  // namespace ralmac
