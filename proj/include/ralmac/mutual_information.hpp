#pragma once

#include <cstdint>
#include <vector>

#include "ralmac/geometry.hpp"
#include "ralmac/mask.hpp"
#include "ralmac/transform.hpp"

namespace ralmac {

/// Mattes mutual information between a fixed volume and a rigidly mapped
/// moving volume, estimated from a fixed random set of points, one per drawn
/// fixed voxel and jittered uniformly within that voxel's cell.
///
/// Joint histogram: `bins` x `bins` over each image's [min, max] range with
/// two padding bins per side. Fixed intensities use hard (zero-order) binning;
/// moving intensities spread over four bins with a cubic B-spline Parzen
/// window. Samples whose mapped point leaves the moving volume (the union of
/// its voxel cells) are dropped.
///
/// The sample set is drawn once at construction, so evaluate() is a
/// deterministic function of the transform. Both volumes must outlive the
/// metric.
class MattesMutualInformation {
 public:
  /// Throws InsufficientRange if either image is constant. With
  /// `sample_region` (on the fixed grid) samples are drawn from its voxels
  /// only; the sample count is still sample_fraction x fixed voxel count.
  MattesMutualInformation(const Volume& fixed, const Volume& moving, int bins, double sample_fraction,
                          std::uint64_t rng_seed, std::uint64_t level_seed,
                          const BinaryMask* sample_region = nullptr);

  /// Negated MI (lower is better). Throws InsufficientOverlap when fewer than
  /// kMinValidSamples samples land inside the moving volume.
  double evaluate(const RigidTransform& t) const;

  std::size_t sample_count() const { return sample_points_.size(); }
  int bins() const { return bins_; }

  static constexpr std::size_t kMinValidSamples = 25;

 private:
  const Volume& moving_;
  int bins_;
  std::vector<float> moving_values_;  // compact copy for the sampling loop
  std::vector<Point3> sample_points_;
  std::vector<int> fixed_bins_;
  double moving_bin_size_ = 1.0;
  double moving_normalized_min_ = 0.0;
};

/// Cubic B-spline kernel B3(x).
double cubic_bspline(double x);

/// One-shot convenience wrapper around MattesMutualInformation.
double mattes_mi(const Volume& fixed, const Volume& moving, const RigidTransform& t, int bins,
                 double sample_fraction, std::uint64_t rng_seed, std::uint64_t level_seed,
                 const BinaryMask* sample_region = nullptr);

}  // namespace ralmac
