#pragma once

#include "ralmac/geometry.hpp"
#include "ralmac/transform.hpp"

namespace ralmac {

/// Separable Gaussian blur with sigma in voxels (kernel truncated at 4 sigma,
/// edge voxels replicated). sigma <= 0 returns the input.
Volume gaussian_smooth(const Volume& v, double sigma_voxels);

/// Keeps every `factor`-th voxel along each axis; spacing scales by factor,
/// origin unchanged.
Volume shrink(const Volume& v, int factor);

/// Resamples `moving` onto `reference_grid`: each output voxel takes the
/// trilinear moving intensity at t(x); out-of-bounds samples get `fill`.
Volume resample(const Volume& moving, const RigidTransform& t, const Grid& reference_grid, double fill = 0.0);

}  // namespace ralmac
