#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ralmac/geometry.hpp"

namespace ralmac {

enum class LesionClass { Target, NonTarget };

std::string_view to_string(LesionClass c);
/// Accepts "target"/"non-target" (also "nontarget", "T", "NT"), case-insensitive.
std::optional<LesionClass> parse_lesion_class(std::string_view text);

/// One reader's mark on one series at one timepoint.
struct LesionAnnotation {
  std::string patient_id;
  std::string timepoint_id;
  std::string series_id;
  std::string reader_id;
  LesionClass lesion_class = LesionClass::Target;
  std::string source_label;
  Point3 centroid;

  /// Uniqueness key within a patient dataset.
  auto key() const { return std::tie(timepoint_id, series_id, reader_id, source_label, lesion_class); }
  friend bool operator==(const LesionAnnotation&, const LesionAnnotation&) = default;
};

/// Ordering used for deterministic naming: (timepoint, series, reader, label).
bool naming_order_less(const LesionAnnotation& a, const LesionAnnotation& b);

struct Observation {
  LesionAnnotation annotation;
  /// Centroid expressed in the owning registry's reference frame.
  Point3 mapped_centroid;
  /// Registration into the reference frame failed; mapped_centroid is unaligned.
  bool unregistered = false;
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// A canonical lesion identity (G<k> or NG<k>) and everything merged into it.
struct LesionTrack {
  std::string canonical_name;
  LesionClass lesion_class = LesionClass::Target;
  std::vector<Observation> observations;
  Point3 reference_centroid;

  /// Arithmetic mean of the observations' mapped centroids.
  void refresh_reference_centroid();
  friend bool operator==(const LesionTrack&, const LesionTrack&) = default;
};

std::string canonical_name(LesionClass c, int index);
/// Parses "G<k>"/"NG<k>" with k >= 1; nullopt otherwise.
std::optional<std::pair<LesionClass, int>> parse_canonical_name(std::string_view name);

}  // namespace ralmac
