#include "ralmac/registration.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "ralmac/errors.hpp"
#include "ralmac/image_ops.hpp"
#include "ralmac/mutual_information.hpp"

namespace ralmac {

void RegistrationConfig::validate() const {
  if (histogram_bins < 5) throw SpecError("histogram_bins must be >= 5");
  if (!(sample_fraction > 0.0) || sample_fraction > 1.0) throw SpecError("sample_fraction must be in (0, 1]");
  if (!(learning_rate > 0.0)) throw SpecError("learning_rate must be positive");
  if (max_iterations < 1) throw SpecError("max_iterations must be >= 1");
  if (convergence_window < 1) throw SpecError("convergence_window must be >= 1");
  if (shrink_factors.empty() || shrink_factors.size() != smoothing_sigmas.size()) {
    throw SpecError("shrink_factors and smoothing_sigmas must be non-empty and of equal length");
  }
  for (int f : shrink_factors) {
    if (f < 1) throw SpecError("shrink factors must be >= 1");
  }
  for (double s : smoothing_sigmas) {
    if (s < 0.0) throw SpecError("smoothing sigmas must be >= 0");
  }
  if (!(sampling_margin_mm >= 0.0)) throw SpecError("sampling_margin_mm must be >= 0");
  if (!(angle_step_rad > 0.0) || !(translation_step_mm > 0.0)) throw SpecError("difference steps must be positive");
}

namespace {

struct PrincipalAxes {
  Point3 centroid;
  std::array<Point3, 3> axes;        // descending eigenvalue
  std::array<double, 3> eigenvalues;  // descending
};

PrincipalAxes principal_axes(const BinaryMask& m) {
  const MaskMoments mom = mask_moments(m);
  Eigen::Matrix3d cov;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cov(r, c) = mom.covariance[r][c];
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  PrincipalAxes out;
  out.centroid = mom.centroid;
  for (int a = 0; a < 3; ++a) {
    const int src = 2 - a;  // Eigen sorts ascending
    out.eigenvalues[a] = solver.eigenvalues()(src);
    const auto v = solver.eigenvectors().col(src);
    out.axes[a] = {v(0), v(1), v(2)};
  }
  return out;
}

bool degenerate(const PrincipalAxes& p) {
  for (int a = 0; a < 2; ++a) {
    if (!(p.eigenvalues[a + 1] > 0.0) || p.eigenvalues[a] / p.eigenvalues[a + 1] < kDegenerateRatio) return true;
  }
  return false;
}

Matrix3 columns(const std::array<Point3, 3>& axes) {
  Matrix3 m{};
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < 3; ++r) m[r][c] = axes[c][r];
  }
  return m;
}

}  // namespace

RigidTransform initialize_transform(const BinaryMask& fixed_mask, const BinaryMask& moving_mask,
                                    bool* used_principal_axes) {
  if (fixed_mask.empty() || moving_mask.empty()) throw EmptyMask("initialization needs non-empty masks");
  PrincipalAxes f = principal_axes(fixed_mask);
  PrincipalAxes m = principal_axes(moving_mask);
  RigidTransform t;
  t.center = f.centroid;
  t.translation = m.centroid - f.centroid;
  if (used_principal_axes) *used_principal_axes = false;
  if (degenerate(f) || degenerate(m)) return t;

  if (determinant(columns(f.axes)) < 0.0) f.axes[2] = -f.axes[2];
  for (std::size_t a = 0; a < 3; ++a) {
    if (dot(f.axes[a], m.axes[a]) < 0.0) m.axes[a] = -m.axes[a];
  }
  // A reflection left after sign matching goes to the weakest axis.
  if (determinant(columns(m.axes)) < 0.0) m.axes[2] = -m.axes[2];

  const Matrix3 rot = multiply(columns(m.axes), transpose(columns(f.axes)));
  t.angles = angles_from_matrix(rot);
  if (used_principal_axes) *used_principal_axes = true;
  return t;
}

namespace {

constexpr std::size_t kParams = 6;
using Params = std::array<double, kParams>;

Params to_params(const RigidTransform& t) {
  return {t.angles.a1, t.angles.a2, t.angles.a3, t.translation.x, t.translation.y, t.translation.z};
}

RigidTransform from_params(const Params& p, const Point3& center) {
  return {{p[0], p[1], p[2]}, {p[3], p[4], p[5]}, center};
}

double checked(double value) {
  if (!std::isfinite(value)) throw DivergedError("metric became non-finite");
  return value;
}

struct LevelOutcome {
  int iterations = 0;
  bool converged = false;
  double metric = 0.0;
};

LevelOutcome optimize_level(const MattesMutualInformation& metric, Params& p, const Point3& center,
                            const Params& scales, const RegistrationConfig& cfg, std::vector<double>& trace) {
  const Params steps{cfg.angle_step_rad, cfg.angle_step_rad, cfg.angle_step_rad,
                     cfg.translation_step_mm, cfg.translation_step_mm, cfg.translation_step_mm};
  LevelOutcome out;
  std::deque<double> window;
  double previous = 0.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const double value = checked(metric.evaluate(from_params(p, center)));
    trace.push_back(value);
    out.iterations = it + 1;
    out.metric = value;
    if (it > 0) {
      window.push_back(std::abs(value - previous));
      if (window.size() > static_cast<std::size_t>(cfg.convergence_window)) window.pop_front();
      if (window.size() == static_cast<std::size_t>(cfg.convergence_window) &&
          std::all_of(window.begin(), window.end(), [&](double d) { return d < cfg.convergence_tolerance; })) {
        out.converged = true;
        break;
      }
    }
    previous = value;
    if (it + 1 == cfg.max_iterations) break;

    Params gradient{};
    for (std::size_t k = 0; k < kParams; ++k) {
      Params hi = p, lo = p;
      hi[k] += steps[k];
      lo[k] -= steps[k];
      const double up = checked(metric.evaluate(from_params(hi, center)));
      const double down = checked(metric.evaluate(from_params(lo, center)));
      gradient[k] = (up - down) / (2.0 * steps[k]);
    }
    // Step in scaled coordinates u = p / scale, then map back.
    for (std::size_t k = 0; k < kParams; ++k) p[k] -= cfg.learning_rate * scales[k] * scales[k] * gradient[k];
  }
  return out;
}

}  // namespace

RegistrationResult register_volumes(const Volume& fixed, const Volume& moving, const RegistrationConfig& cfg) {
  cfg.validate();
  const BinaryMask fixed_mask = preprocess_mask(fixed, cfg.body_threshold);
  const BinaryMask moving_mask = preprocess_mask(moving, cfg.body_threshold);

  RegistrationResult result;
  result.initial_transform = initialize_transform(fixed_mask, moving_mask, &result.used_principal_axes);
  const Point3 center = result.initial_transform.center;
  const double radius = std::max(mask_radius(fixed_mask), fixed.grid().min_spacing());

  const Volume fixed_body = apply_mask(fixed, fixed_mask, fixed.intensity_range()[0]);
  const Volume moving_body = apply_mask(moving, moving_mask, moving.intensity_range()[0]);

  // Samples stay near the body: background far from it only adds the bias
  // of samples dropping out at the volume edge.
  const BinaryMask region = dilate(fixed_mask, cfg.sampling_margin_mm);
  Volume region_volume(fixed.grid());
  for (std::size_t i = 0; i < region_volume.size(); ++i) region_volume.voxels()[i] = region.voxels[i];

  Params p = to_params(result.initial_transform);
  for (std::size_t level = 0; level < cfg.shrink_factors.size(); ++level) {
    const Volume f = shrink(gaussian_smooth(fixed_body, cfg.smoothing_sigmas[level]), cfg.shrink_factors[level]);
    const Volume m = shrink(gaussian_smooth(moving_body, cfg.smoothing_sigmas[level]), cfg.shrink_factors[level]);
    const BinaryMask level_region = threshold_mask(shrink(region_volume, cfg.shrink_factors[level]), 0.5);
    const MattesMutualInformation metric(f, m, cfg.histogram_bins, cfg.sample_fraction, cfg.rng_seed, level,
                                         &level_region);

    // One scaled unit ~ one voxel of this level's fixed grid, for translations
    // directly and for rotations at the mask's bounding radius.
    const Point3 sp = f.spacing();
    const double voxel = f.grid().min_spacing();
    const Params scales{voxel / radius, voxel / radius, voxel / radius, sp.x, sp.y, sp.z};

    const LevelOutcome outcome = optimize_level(metric, p, center, scales, cfg, result.metric_trace);
    result.iterations_per_level.push_back(outcome.iterations);
    result.converged_per_level.push_back(outcome.converged);
    result.final_metric = outcome.metric;
    result.converged = outcome.converged;
  }
  result.transform = from_params(p, center);
  if (!result.transform.is_finite()) throw DivergedError("transform parameters became non-finite");
  return result;
}

Point3 map_to_fixed(const RegistrationResult& result, const Point3& moving_point) {
  return apply_transform(invert_transform(result.transform), moving_point);
}

std::vector<LesionAnnotation> map_lesion_centroids(const RegistrationResult& result,
                                                   const std::vector<LesionAnnotation>& moving_lesions) {
  const RigidTransform inverse = invert_transform(result.transform);
  std::vector<LesionAnnotation> out = moving_lesions;
  for (auto& lesion : out) lesion.centroid = apply_transform(inverse, lesion.centroid);
  return out;
}

}  // namespace ralmac
