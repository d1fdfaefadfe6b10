#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ralmac/annotation_io.hpp"
#include "ralmac/geometry.hpp"
#include "ralmac/transform.hpp"

namespace ralmac {

struct PhantomLesion {
  Point3 center;        // mm
  double radius_mm = 5.0;
  double intensity = 100.0;
  LesionClass lesion_class = LesionClass::Target;
  std::string label;    // empty -> T<k> / NT<k>
};

/// CT-like phantom: an axis-aligned body ellipsoid on a background with
/// brighter spherical lesions and additive Gaussian noise.
struct PhantomSpec {
  Grid grid{{64, 64, 64}, {2.0, 2.0, 2.0}, {0.0, 0.0, 0.0}};
  Point3 body_center{63.0, 63.0, 63.0};
  Point3 body_semi_axes{40.0, 30.0, 22.0};
  double body_intensity = 0.0;
  double background_intensity = -1000.0;
  std::vector<PhantomLesion> lesions;
  double noise_sigma = 10.0;
  std::uint64_t rng_seed = 0;

  std::string patient_id = "P1";
  std::string timepoint_id = "Screening";
  std::string series_id = "S1";
  std::string reader_id = "R1";

  /// Throws SpecError if a lesion center lies outside the body or a radius
  /// does not exceed the largest voxel spacing.
  void validate() const;
};

struct Phantom {
  Volume volume;
  AnnotationTable truth;
};

Phantom generate_phantom(const PhantomSpec& spec);

/// Resamples `v` through `t` onto `out_grid` (out(x) = v(t(x))) and maps the
/// truth centroids through the inverse point transform so both stay
/// consistent. Out-of-bounds voxels get `fill`.
Phantom transform_phantom(const Volume& v, const AnnotationTable& truth, const RigidTransform& t,
                          const Grid& out_grid, double fill);
/// `fill` defaults to the minimum intensity of `v`.
Phantom transform_phantom(const Volume& v, const AnnotationTable& truth, const RigidTransform& t,
                          const Grid& out_grid);

/// Adds seeded zero-mean Gaussian noise.
Volume add_noise(const Volume& v, double sigma, std::uint64_t seed);

/// Synthetic longitudinal study: `timepoints` x `series` x `readers`, with
/// persistent lesions, lesions that appear at later timepoints, rigid
/// per-series / per-timepoint poses and bounded reader jitter.
struct StudySpec {
  std::string patient_id = "P1";
  std::vector<std::string> timepoints{"Screening", "Week8"};
  std::vector<std::string> series{"S1", "S2"};
  std::vector<std::string> readers{"R1", "R2"};
  double reader_jitter_mm = 5.0;     // upper bound on |jitter|
  double max_angle_deg = 6.0;
  double max_translation_mm = 8.0;
  double noise_sigma = 10.0;
  std::uint64_t seed = 0;
  PhantomSpec anatomy;  // lesions are filled in by default_study_lesions when empty
};

struct StudyLesion {
  PhantomLesion lesion;
  std::size_t first_timepoint = 0;  // index into StudySpec::timepoints
};

/// Four persistent lesions (three targets, one non-target) plus one target
/// appearing at the second timepoint.
std::vector<StudyLesion> default_study_lesions();

struct Study {
  AnnotationTable annotations;
  /// (timepoint_id, series_id) -> volume
  std::vector<std::pair<std::pair<std::string, std::string>, Volume>> volumes;
  /// Validated truth grouping, as lesion index per annotation row.
  std::vector<std::size_t> truth_lesion_of_row;
  std::vector<StudyLesion> lesions;
};

Study generate_study(const StudySpec& spec, const std::vector<StudyLesion>& lesions);

/// Writes `<dir>/annotations.csv`, `<dir>/volumes/<patient>_<tp>_<series>.{hdr,raw}`
/// and `<dir>/truth.json`.
void write_study(const Study& study, const std::string& patient_id, const std::filesystem::path& dir);

}  // namespace ralmac
