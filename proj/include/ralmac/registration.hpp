#pragma once

#include <cstdint>
#include <vector>

#include "ralmac/geometry.hpp"
#include "ralmac/lesion.hpp"
#include "ralmac/mask.hpp"
#include "ralmac/transform.hpp"

namespace ralmac {

struct RegistrationConfig {
  int histogram_bins = 50;
  double sample_fraction = 0.10;
  double learning_rate = 0.1;
  int max_iterations = 1000;
  double convergence_tolerance = 1e-10;
  int convergence_window = 5;
  std::vector<int> shrink_factors{2, 1, 1};
  std::vector<double> smoothing_sigmas{4.0, 2.0, 1.0};  // voxels
  std::uint64_t rng_seed = 0;
  double body_threshold = -300.0;
  double sampling_margin_mm = 10.0;    // metric samples: fixed body mask dilated by this
  double angle_step_rad = 1e-3;        // central-difference step
  double translation_step_mm = 1e-1;   // central-difference step

  /// Throws SpecError on inconsistent settings.
  void validate() const;
};

struct RegistrationResult {
  RigidTransform transform;          // fixed-frame point -> moving-frame point
  RigidTransform initial_transform;  // centroid / principal-axes estimate
  double final_metric = 0.0;
  std::vector<int> iterations_per_level;
  std::vector<bool> converged_per_level;
  bool converged = false;  // finest level stopped on the tolerance test
  std::vector<double> metric_trace;
  bool used_principal_axes = false;
};

/// Translation moves the fixed-mask centroid onto the moving-mask centroid;
/// the rotation maps the fixed principal axes onto the moving ones (rotation
/// center = fixed centroid). Falls back to translation only when consecutive
/// eigenvalues of either mask are within a factor of kDegenerateRatio.
RigidTransform initialize_transform(const BinaryMask& fixed_mask, const BinaryMask& moving_mask,
                                    bool* used_principal_axes = nullptr);

inline constexpr double kDegenerateRatio = 1.05;

/// Preprocess both volumes, initialize, then run multi-resolution gradient
/// descent on negated Mattes MI. Throws InsufficientOverlap from the metric
/// and DivergedError on a non-finite metric.
RegistrationResult register_volumes(const Volume& fixed, const Volume& moving, const RegistrationConfig& cfg);

/// Moving-frame point into the fixed frame (inverse of result.transform).
Point3 map_to_fixed(const RegistrationResult& result, const Point3& moving_point);

/// Applies the inverse transform to every centroid; labels are untouched.
std::vector<LesionAnnotation> map_lesion_centroids(const RegistrationResult& result,
                                                   const std::vector<LesionAnnotation>& moving_lesions);

}  // namespace ralmac
